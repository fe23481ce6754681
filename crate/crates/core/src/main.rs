use clap::Parser;

fn main() {
    let cli = vssbdf2::cli::Cli::parse();
    std::process::exit(vssbdf2::cli::run(cli));
}
