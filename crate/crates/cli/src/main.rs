use std::io::Write;
use std::process::ExitCode;

fn main() -> ExitCode {
    let out = dl_cli::run(std::env::args_os());
    let mut stdout = std::io::stdout().lock();
    let _ = stdout.write_all(out.stdout.as_bytes());
    if !out.stderr.is_empty() {
        eprint!("{}", out.stderr);
    }
    ExitCode::from(out.code)
}
