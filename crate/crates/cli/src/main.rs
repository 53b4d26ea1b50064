use clap::Parser;
use frst_lab::app::{configure_threads, run, Cli, RunConfig};

fn main() {
    let cli = Cli::parse();
    let threads = std::env::var("FRST_LAB_THREADS").ok();
    let result = configure_threads(threads.as_deref())
        .and_then(|_| RunConfig::resolve(&cli.command))
        .and_then(|cfg| run(&cfg));
    if let Err(e) = result {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
