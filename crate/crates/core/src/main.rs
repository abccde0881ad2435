use clap::Parser;

fn main() {
    let cli = kac_bgk::cli::Cli::parse();
    std::process::exit(kac_bgk::cli::run(cli));
}
