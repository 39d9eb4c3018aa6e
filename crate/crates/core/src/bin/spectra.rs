fn main() {
    std::process::exit(spectra::cli::run_from(std::env::args_os()));
}
