fn main() {
    std::process::exit(sgpursuit::cli::run(std::env::args_os()));
}
