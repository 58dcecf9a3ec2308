fn main() {
    std::process::exit(sdd::cli::main_entry());
}
