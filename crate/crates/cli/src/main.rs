use std::process::ExitCode;

fn main() -> ExitCode {
    match rccpabe_cli::run(std::env::args_os()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("rccpabe: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
