use std::process::ExitCode;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().filter_or("BIASTOL_LOG", "warn"))
        .init();
    biastol::cli::run()
}
