use clap::Parser;

fn main() {
    let cli = classrep_cli::Cli::parse();
    if let Err(e) = classrep_cli::run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
