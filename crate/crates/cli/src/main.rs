use std::process::ExitCode;

fn main() -> ExitCode {
    let stdin = std::io::stdin();
    let mut input = stdin.lock();
    let mut out = std::io::stdout();
    cyrus_cli::run(std::env::args_os(), &mut input, &mut out)
}
