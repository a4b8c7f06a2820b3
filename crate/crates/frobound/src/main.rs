use clap::Parser;

fn main() {
    let cli = frobound::cli::Cli::parse();
    if let Err(e) = frobound::cli::run(cli) {
        eprintln!("{e}");
        std::process::exit(e.exit_code());
    }
}
