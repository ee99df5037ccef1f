fn main() -> std::process::ExitCode {
    nakamoto_sim::cli::main()
}
