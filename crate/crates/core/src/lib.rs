pub mod group;
pub mod scheme;
pub mod crf;
pub mod ledger;
pub mod protocol;
pub mod bench;
pub mod cli;
