use clap::Parser;
use log::LevelFilter;

use quasisol::Cli;

fn main() {
    let cli = Cli::parse();
    let level = if cli.global.quiet { LevelFilter::Warn } else { LevelFilter::Info };
    env_logger::Builder::new().filter_level(level).parse_default_env().init();
    if let Err(err) = quasisol::run(&cli) {
        eprintln!("error: {err}");
        std::process::exit(err.exit_code());
    }
}
