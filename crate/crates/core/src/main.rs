fn main() {
    std::process::exit(jaccard_resolve::cli::main_entry());
}
