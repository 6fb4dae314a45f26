use std::io::Write;

fn main() {
    let out = evpkit::cli::run_command(std::env::args_os());
    if !out.rendered.is_empty() {
        // a closed pipe is not worth a panic
        let _ = writeln!(std::io::stdout(), "{}", out.rendered.trim_end());
    }
    std::process::exit(out.exit_code);
}
