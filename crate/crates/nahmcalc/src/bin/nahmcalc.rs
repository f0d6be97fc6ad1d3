fn main() {
    std::process::exit(nahmcalc::cli::main_with_args(std::env::args_os()));
}
