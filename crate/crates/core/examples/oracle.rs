//! Forward-mode derivatives of F and their finite-difference cross-check.

use finsler_mroot::calculus::{derivatives, fd_check, FdOrder, MetricFunction, Quantity};
use finsler_mroot::fields::{CoefficientField, Polynomial};

fn main() -> finsler_mroot::Result<()> {
    // A = (1 + x1)(y1^3 + y2^3)
    let c = Polynomial::affine(2, 1.0, 0, 1.0);
    let field = CoefficientField::new(2, 3)
        .with(&[1, 1, 1], c.clone())?
        .with(&[2, 2, 2], c)?;
    let f = MetricFunction::base(&field, Quantity::F);
    let (x, y) = ([0.2, -0.1], [0.7, 1.3]);

    let d = derivatives(&f, &x, &y)?;
    println!("F = {:.15}", d.value);
    println!("dF/dy = {}", d.grad_y.transpose());
    println!("dF/dx = {}", d.grad_x.transpose());
    println!("d2F/dy2 = {}", d.hess_y);

    let report = fd_check(&f, &x, &y, FdOrder::Second)?;
    println!(
        "fd check over {} entries: max rel {:.2e}",
        report.entries, report.max_rel
    );
    Ok(())
}
