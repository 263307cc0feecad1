fn main() -> std::process::ExitCode {
    vertexlab::cli::main()
}
