fn main() -> std::process::ExitCode {
    portagent::cli::main()
}
