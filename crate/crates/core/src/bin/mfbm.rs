fn main() -> std::process::ExitCode {
    mfbm::cli::main()
}
