use std::io::{IsTerminal, Write};

fn main() {
    let argv: Vec<String> = std::env::args().collect();
    let color = std::io::stdout().is_terminal() && std::env::var_os("SPIRALITY_NO_COLOR").is_none();
    let out = spirality_cli::run_cli_with(&argv, color);
    std::io::stdout().write_all(out.stdout.as_bytes()).ok();
    std::io::stderr().write_all(out.stderr.as_bytes()).ok();
    std::process::exit(out.code);
}
