fn main() {
    std::process::exit(canondual::cli::run());
}
