//! Writes the synthetic corpus: `cargo run --example gen_synthetic -- <dir>`.

use scriptmap_core::synthetic::{generate, SyntheticConfig};

fn main() {
    let dir = std::env::args().nth(1).unwrap_or_else(|| "data/synthetic".into());
    let data = generate(&SyntheticConfig::default());
    if let Err(e) = data.write_to(std::path::Path::new(&dir)) {
        eprintln!("error: {e}");
        std::process::exit(2);
    }
}
