fn main() {
    std::process::exit(qbranch::cli::main_from(std::env::args_os()));
}
