fn main() -> std::process::ExitCode {
    streamloop::cli::run(std::env::args_os())
}
