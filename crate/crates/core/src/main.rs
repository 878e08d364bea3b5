fn main() -> std::process::ExitCode {
    greenlink::cli::main()
}
