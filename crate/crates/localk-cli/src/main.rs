use clap::Parser;

fn main() {
    let cli = localk_cli::Cli::parse();
    std::process::exit(localk_cli::run(&cli));
}
