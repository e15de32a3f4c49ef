//! Integrates a Kropina geodesic and writes the path to stdout.

use finsler_mroot::cli::document::parse_spec;
use finsler_mroot::spray::{integrate_geodesic, Metric};

const SPEC: &str = include_str!("../fixtures/fix_x.json");

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = parse_spec(SPEC)?;
    let b = spec.one_form.as_ref().expect("fixture has a one-form");
    let path = integrate_geodesic(
        &Metric::kropina(&spec.field, b),
        &[0.0, 0.0],
        &[1.0, 1.0],
        0.5,
        10,
    )?;
    eprintln!("status {:?}", path.status);
    path.write_text(std::io::stdout().lock())?;
    Ok(())
}
