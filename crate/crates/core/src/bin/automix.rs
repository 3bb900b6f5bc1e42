fn main() {
    std::process::exit(automix::cli::run(std::env::args_os()));
}
