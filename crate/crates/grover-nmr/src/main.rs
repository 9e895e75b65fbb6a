fn main() {
    std::process::exit(grover_nmr::cli::run_main());
}
