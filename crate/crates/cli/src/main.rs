fn main() {
    std::process::exit(litterscan::run(std::env::args_os()));
}
