fn main() {
    std::process::exit(janowski::cli::run(std::env::args_os()));
}
