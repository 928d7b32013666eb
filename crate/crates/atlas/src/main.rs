use std::process::ExitCode;

fn main() -> ExitCode {
    let code = newton_atlas::cli::run(std::env::args_os());
    ExitCode::from(code.clamp(0, 255) as u8)
}
