fn main() {
    std::process::exit(unisel::cli::main_with(std::env::args_os()));
}
