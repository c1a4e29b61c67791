fn main() {
    let outcome = superhaar::cli::run(std::env::args_os());
    if outcome.code == superhaar::cli::EXIT_USAGE {
        eprint!("{}", outcome.text);
    } else {
        print!("{}", outcome.text);
    }
    std::process::exit(outcome.code);
}
