use std::io;
use std::process::ExitCode;

fn main() -> ExitCode {
    if let Some(threads) = std::env::var("CUBE_AMALGAM_THREADS").ok().and_then(|v| v.parse().ok()) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
    let code = cube_amalgam_cli::dispatch(std::env::args_os(), &mut io::stdout().lock(), &mut io::stderr().lock());
    ExitCode::from(code as u8)
}
