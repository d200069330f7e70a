use clap::Parser;

fn main() {
    let cli = cdgl::cli::Cli::parse();
    std::process::exit(cdgl::cli::run(cli));
}
