fn main() -> std::process::ExitCode {
    anderson_band::cli::main()
}
