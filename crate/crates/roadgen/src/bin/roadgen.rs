fn main() {
    std::process::exit(roadgen::cli::dispatch(std::env::args()));
}
