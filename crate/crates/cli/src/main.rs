use clap::Parser;

fn main() {
    let cli = sorlayout_cli::Cli::parse();
    if let Err(e) = sorlayout_cli::run(cli) {
        eprintln!("error: {:#}", e);
        std::process::exit(1);
    }
}
