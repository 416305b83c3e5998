use std::io::Write;

fn main() {
    let out = sosforge_cli::run_captured(std::env::args().collect());
    std::io::stdout().write_all(&out.stdout).ok();
    eprint!("{}", out.stderr);
    std::process::exit(out.code);
}
