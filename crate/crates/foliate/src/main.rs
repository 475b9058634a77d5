use clap::Parser;

fn main() {
    let cli = foliate::cli::Cli::parse();
    std::process::exit(foliate::cli::run(cli));
}
