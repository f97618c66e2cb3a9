fn main() -> std::process::ExitCode {
    hicluster::cli::main()
}
