use std::io::Write;

fn main() {
    let result = kltrace_cli::run(std::env::args_os());
    let text = result.output();
    if result.status == 2 {
        eprint!("{text}");
    } else {
        let mut out = std::io::stdout().lock();
        let _ = out.write_all(text.as_bytes());
        let _ = out.flush();
    }
    std::process::exit(result.status);
}
