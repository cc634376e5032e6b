fn main() -> std::process::ExitCode {
    sonarsim::cli::run()
}
