use clap::Parser;

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = chkp_lab::cli::Cli::parse();
    std::process::exit(chkp_lab::cli::run(cli));
}
