use std::collections::HashMap;
use std::path::Path;
use std::sync::RwLock;

use super::{Address, LedgerError};

/// Content-addressed blob store standing in for IPFS.
#[derive(Debug, Default)]
pub struct ContentStore {
    objects: RwLock<HashMap<Address, Vec<u8>>>,
}

impl ContentStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn store(&self, bytes: &[u8]) -> Address {
        let addr = Address::digest(bytes);
        self.objects
            .write()
            .unwrap()
            .entry(addr)
            .or_insert_with(|| bytes.to_vec());
        addr
    }

    pub fn fetch(&self, addr: &Address) -> Option<Vec<u8>> {
        self.objects.read().unwrap().get(addr).cloned()
    }

    pub fn contains(&self, addr: &Address) -> bool {
        self.objects.read().unwrap().contains_key(addr)
    }

    pub fn len(&self) -> usize {
        self.objects.read().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// One file per object, named by its hex address.
    pub fn save_dir(&self, dir: &Path) -> Result<(), LedgerError> {
        std::fs::create_dir_all(dir)?;
        for (addr, bytes) in self.objects.read().unwrap().iter() {
            let path = dir.join(addr.to_hex());
            if !path.exists() {
                std::fs::write(path, bytes)?;
            }
        }
        Ok(())
    }

    /// Loads every object in `dir`, skipping files whose digest does not
    /// match their name.
    pub fn load_dir(dir: &Path) -> Result<Self, LedgerError> {
        let store = ContentStore::new();
        if !dir.exists() {
            return Ok(store);
        }
        for entry in std::fs::read_dir(dir)? {
            let entry = entry?;
            let Some(name) = entry.file_name().to_str().and_then(Address::from_hex) else {
                continue;
            };
            let bytes = std::fs::read(entry.path())?;
            if Address::digest(&bytes) == name {
                store.store(&bytes);
            }
        }
        Ok(store)
    }
}
