//! Writes the demo corpus (images, waveforms, tables, registry) to a
//! directory, demo/data by default. The committed demo configs point at
//! that location.

use std::path::PathBuf;

fn main() {
    let root = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("demo/data"));
    featex_testkit::fixtures::write_demo_data(&root).expect("failed to write demo corpus");
    println!("demo corpus written to {}", root.display());
}
