use clap::Parser;
use delta_stab_cli::{commands::EXIT_ERROR, run, thread_cap, Cli};
use std::process::ExitCode;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match thread_cap(std::env::var("DELTA_STAB_THREADS").ok().as_deref()) {
        Ok(Some(n)) => {
            if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                eprintln!("error: thread pool: {e}");
                return ExitCode::from(EXIT_ERROR as u8);
            }
        }
        Ok(None) => {}
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_ERROR as u8);
        }
    }
    let stdout = std::io::stdout();
    let code = run(&cli, &mut stdout.lock(), &mut std::io::stderr());
    ExitCode::from(code as u8)
}
