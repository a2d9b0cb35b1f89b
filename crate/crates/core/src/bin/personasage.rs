fn main() {
    std::process::exit(personasage::experiment::cli::run(std::env::args_os()));
}
