//! Spray coefficients of both metrics and the P, Q split of their difference.

use finsler_mroot::cli::document::parse_spec;
use finsler_mroot::spray::{pq_decomposition, verify_spray_forms};

const SPEC: &str = include_str!("../fixtures/fix_quintic3.json");

fn main() -> finsler_mroot::Result<()> {
    let spec = parse_spec(SPEC)?;
    let b = spec.one_form.as_ref().expect("fixture has a one-form");
    let (x, y) = ([0.1, -0.3, 0.2], [1.0, 0.7, 1.4]);

    let sp = pq_decomposition(&spec.field, b, &x, &y)?;
    println!("G = {}", sp.g.transpose());
    println!("Gbar = {}", sp.gbar.transpose());
    println!("P (closed) = {:?}", sp.p_closed);
    println!("wedge residual = {:.3e}", sp.wedge);
    for row in verify_spray_forms(&sp, &y) {
        println!("{:?}", row);
    }
    Ok(())
}
