//! Regenerates the example data shipped under `data/`.
//!
//!     cargo run -p owc-core --example write_data -- data

use std::path::PathBuf;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "data".into()));
    std::fs::create_dir_all(&dir)?;
    for (name, text) in owc_core::synthetic::data_files()? {
        std::fs::write(dir.join(name), text)?;
    }
    Ok(())
}
