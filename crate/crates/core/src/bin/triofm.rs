fn main() {
    triofm::cli::main()
}
