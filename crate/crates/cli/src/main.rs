fn main() {
    let args: Vec<String> = std::env::args().collect();
    std::process::exit(holeflux_cli::run(&args));
}
