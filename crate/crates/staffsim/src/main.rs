use clap::Parser;
use staffsim::cli::{dispatch, Cli};

fn main() {
    env_logger::Builder::from_env(env_logger::Env::new().filter("STAFFSIM_LOG")).init();
    let cli = Cli::parse();
    if let Err(e) = dispatch(&cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
