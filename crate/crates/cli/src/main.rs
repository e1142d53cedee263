use clap::Parser;

fn main() {
    let cli = ejcm_cli::Cli::parse();
    if let Err(e) = ejcm_cli::execute(&cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
