use std::io::Write;

/// Drives the command-line front end from a TOML file, as the binary would.
fn main() {
    let dir = std::env::temp_dir().join("critwave-cli-example");
    std::fs::create_dir_all(&dir).expect("temp dir");
    let path = dir.join("run.toml");
    let mut f = std::fs::File::create(&path).expect("config file");
    writeln!(
        f,
        "seed = 1\nformat = \"csv\"\n\n[evolve]\nmode = \"nonlinear\"\nn = 12\ntau_max = 2.0\ndata = \"gauge:1.02\""
    )
    .expect("write");
    let out = dir.join("out");
    let code = critwave::cli::main_with_args([
        "critwave",
        "--config",
        path.to_str().unwrap_or_default(),
        "--out",
        out.to_str().unwrap_or_default(),
        "evolve",
    ]);
    println!("exit code {code}");
    let summary = std::fs::read_to_string(out.join("evolve.json")).unwrap_or_default();
    println!("{summary}");
}
