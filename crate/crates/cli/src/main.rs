use clap::Parser;

fn main() {
    let cli = ubo_cli::Cli::parse();
    std::process::exit(ubo_cli::execute(&cli));
}
