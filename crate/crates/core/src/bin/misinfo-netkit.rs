fn main() {
    std::process::exit(misinfo_netkit::harness::main_from_env());
}
