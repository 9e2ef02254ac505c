//! Regenerates the sample inputs under `assets/`.

use std::path::Path;

use holonomy_lab::cli::to_json;
use holonomy_lab::gauge::{magnetic_u1, Connection, PunctureConnection};
use holonomy_lab::loopcore::library::{circle_through_origin, retrace_loop, sample_path, two_petal, winding_circle};

fn main() -> holonomy_lab::Result<()> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("assets");
    std::fs::create_dir_all(&dir)?;
    let files = [
        ("circle.json", to_json(&circle_through_origin(1.0))?),
        ("winding2.json", to_json(&winding_circle(1.0, 2))?),
        ("retrace.json", to_json(&retrace_loop(&sample_path()))?),
        ("two_petal.json", to_json(&two_petal())?),
        ("u1_magnetic.json", to_json(&Connection::Polynomial(magnetic_u1(1.0)))?),
        (
            "puncture.json",
            to_json(&Connection::Puncture {
                puncture: PunctureConnection::new(0.3),
            })?,
        ),
    ];
    for (name, body) in files {
        std::fs::write(dir.join(name), body)?;
        println!("wrote assets/{name}");
    }
    Ok(())
}
