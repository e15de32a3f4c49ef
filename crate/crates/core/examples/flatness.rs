//! Dually flat, projectively flat and projectively related checks.

use finsler_mroot::cli::document::parse_spec;
use finsler_mroot::flatness::{run_check, CheckKind, DEFAULT_TOL};
use finsler_mroot::sampling::{SampleBox, DEFAULT_SEED};

fn main() -> finsler_mroot::Result<()> {
    for (name, text) in [
        ("fix_diag", include_str!("../fixtures/fix_diag.json")),
        ("fix_x_bx", include_str!("../fixtures/fix_x_bx.json")),
    ] {
        let spec = parse_spec(text)?;
        for kind in [
            CheckKind::DuallyFlat,
            CheckKind::ProjectivelyFlat,
            CheckKind::ProjectivelyRelated,
        ] {
            let r = run_check(
                kind,
                &spec.field,
                spec.one_form.as_ref(),
                60,
                DEFAULT_SEED,
                &SampleBox::default(),
                DEFAULT_TOL,
            )?;
            println!(
                "{name} {:<22} {:<16} max residual {:?}",
                kind.label(),
                r.verdict.label(),
                r.max_residual
            );
        }
    }
    Ok(())
}
