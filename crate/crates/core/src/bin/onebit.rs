fn main() {
    std::process::exit(onebit::cli::main(std::env::args_os()));
}
