use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use rankscreen_cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = std::io::stdout();
    let mut out = std::io::BufWriter::new(stdout.lock());
    let result = run(cli, &mut out).and_then(|()| out.flush().map_err(Into::into));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            drop(out);
            eprintln!("rankscreen: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
