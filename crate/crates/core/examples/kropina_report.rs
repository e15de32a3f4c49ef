//! Kropina change of a fixture metric and the sampled adjudication report.

use finsler_mroot::cli::document::parse_spec;
use finsler_mroot::kropina::kropina_point;
use finsler_mroot::sampling::{SampleBox, DEFAULT_SEED};
use finsler_mroot::verify::verify_sampled;

const SPEC: &str = include_str!("../fixtures/fix_x_bx.json");

fn main() -> finsler_mroot::Result<()> {
    let spec = parse_spec(SPEC)?;
    let b = spec.one_form.as_ref().expect("fixture has a one-form");

    let p = kropina_point(&spec.field, b, &[0.1, 0.2], &[1.0, 0.5])?;
    println!("beta = {:.12}, Fbar = {:.12}", p.beta, p.fbar);
    println!("lbar = {}", p.lbar.transpose());
    println!("gbar (oracle) = {}", p.gbar_oracle);
    println!("aux = {:?}", p.aux);

    let report = verify_sampled(&spec.field, b, 200, DEFAULT_SEED, &SampleBox::default())?;
    println!(
        "{} of {} points accepted",
        report.accepted, report.requested
    );
    for row in &report.discrepancy.rows {
        println!(
            "{:<28} max_abs {:>10} pass {:?}",
            row.formula,
            row.max_abs.map_or("-".into(), |v| format!("{v:.2e}")),
            row.pass
        );
    }
    Ok(())
}
