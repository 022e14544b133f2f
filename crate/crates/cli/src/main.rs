use clap::Parser;

fn main() {
    let cli = nmdecay::Cli::parse();
    if let Err(e) = nmdecay::run(&cli) {
        eprintln!("nmdecay: {e}");
        std::process::exit(e.exit_code());
    }
}
