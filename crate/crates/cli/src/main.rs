fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let mut stdout = std::io::stdout().lock();
    std::process::exit(randobdd_cli::run_cli(std::env::args_os(), &mut stdout));
}
