fn main() {
    std::process::exit(statpres::run(std::env::args_os()));
}
