fn main() {
    std::process::exit(rds::cli::main_with_args(std::env::args_os()));
}
