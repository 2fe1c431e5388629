fn main() {
    std::process::exit(rankbandit::cli::main_entry());
}
