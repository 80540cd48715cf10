fn main() {
    std::process::exit(qcontact::cli::run(std::env::args_os()));
}
