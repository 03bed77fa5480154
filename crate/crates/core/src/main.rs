use std::io::Write;

fn main() {
    let mut stdout = std::io::stdout().lock();
    let mut stderr = std::io::stderr().lock();
    let code = std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| {
        tmkit::cli::run(std::env::args_os(), &mut stdout, &mut stderr)
    }))
    .unwrap_or(tmkit::cli::EXIT_INTERNAL);
    let _ = std::io::stdout().flush();
    std::process::exit(code);
}
