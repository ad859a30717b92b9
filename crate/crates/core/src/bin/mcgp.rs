use std::io::Write;
use std::process::ExitCode;

fn main() -> ExitCode {
    let (code, output) = mcgp::cli::main_with_args(std::env::args_os());
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    let _ = lock.write_all(output.as_bytes());
    let _ = lock.flush();
    ExitCode::from(code as u8)
}
