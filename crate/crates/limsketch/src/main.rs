use std::process::ExitCode;

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let (code, output) = limsketch::cli::run_command(&args);
    print!("{output}");
    ExitCode::from(code as u8)
}
