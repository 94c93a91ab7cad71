fn main() -> std::process::ExitCode {
    hsps::cli::main()
}
