use clap::Parser;

use delayed_wc::cli::{run, Cli};
use delayed_wc::Error;

fn main() {
    match run(Cli::parse()) {
        Ok(()) => {}
        Err(Error::Io(e)) if e.kind() == std::io::ErrorKind::BrokenPipe => {}
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
