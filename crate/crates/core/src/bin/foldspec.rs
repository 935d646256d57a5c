fn main() {
    std::process::exit(foldspec::cli::run(std::env::args_os()));
}
