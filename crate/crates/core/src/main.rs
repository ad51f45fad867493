use clap::Parser;

use hartree_exact::cli::{execute, exit_code, init_threads, Cli};

fn main() {
    init_threads();
    let cli = Cli::parse();
    let code = match execute(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            exit_code(&err)
        }
    };
    std::process::exit(code);
}
