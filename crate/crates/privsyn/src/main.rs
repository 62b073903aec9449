use clap::Parser;

fn main() -> std::process::ExitCode {
    privsyn::cli::run(privsyn::cli::RunConfig::parse())
}
