fn main() {
    std::process::exit(mfsk_demod::cli::run(std::env::args_os()));
}
