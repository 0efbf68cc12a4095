fn main() {
    std::process::exit(slangchoice::cli::main_with_args(std::env::args_os()));
}
