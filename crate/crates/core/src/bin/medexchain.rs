fn main() -> std::process::ExitCode {
    medexchain::cli::main()
}
