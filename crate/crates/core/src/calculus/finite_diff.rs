use serde::Serialize;

use super::{derivatives, ScalarFunction};
use crate::error::Result;

/// Which derivatives an [`fd_check`] compares.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FdOrder {
    /// `grad_y` and `grad_x`.
    First,
    /// Everything in `First` plus `hess_y` and `mixed_xy`.
    Second,
}

/// Largest deviation between forward mode and central differences.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FdReport {
    pub order: FdOrder,
    pub max_abs: f64,
    /// `|fwd - fd| / max(1, |fwd|)`, maximised over entries.
    pub max_rel: f64,
    pub entries: usize,
}

impl FdReport {
    fn push(&mut self, exact: f64, approx: f64) {
        let abs = (exact - approx).abs();
        self.max_abs = self.max_abs.max(abs);
        self.max_rel = self.max_rel.max(abs / exact.abs().max(1.0));
        self.entries += 1;
    }
}

/// Two Richardson levels on a difference quotient whose error is even in `h`,
/// with `|extrapolated - last level|` as an error estimate.
fn richardson_with_error(d: impl Fn(f64) -> f64, h: f64) -> (f64, f64) {
    let (d0, d1, d2) = (d(h), d(h / 2.0), d(h / 4.0));
    let r0 = (4.0 * d1 - d0) / 3.0;
    let r1 = (4.0 * d2 - d1) / 3.0;
    let r = (16.0 * r1 - r0) / 15.0;
    let err = (r - r1).abs();
    (r, if err.is_nan() { f64::INFINITY } else { err })
}

/// Richardson-extrapolated central difference of `g` at `t = 0`.
pub fn richardson_central(g: impl Fn(f64) -> f64, h: f64) -> f64 {
    richardson_with_error(|h| (g(h) - g(-h)) / (2.0 * h), h).0
}

const FIRST_SCALES: [f64; 3] = [1.0 / 3.0, 1.0 / 4.0, 1.0 / 5.0];
const SECOND_SCALES: [f64; 3] = [1.0 / 4.0, 1.0 / 5.0, 1.0 / 6.0];

/// Runs the quotient `d(s)` (unit base step scaled by `s`) at base steps
/// `eps^p`, keeping the estimate with the smallest error estimate. Large steps
/// lose to truncation near singularities, small ones to rounding elsewhere.
fn adaptive(d: impl Fn(f64, f64) -> f64, powers: &[f64]) -> f64 {
    powers
        .iter()
        .map(|&p| richardson_with_error(|s| d(f64::EPSILON.powf(p), s), 1.0))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map_or(f64::NAN, |(v, _)| v)
}

/// Compares the jet derivatives of `f` at `(x, y)` against Richardson
/// central differences of plain evaluations.
pub fn fd_check(
    f: &(impl ScalarFunction + ?Sized),
    x: &[f64],
    y: &[f64],
    order: FdOrder,
) -> Result<FdReport> {
    let n = f.dim();
    let exact = derivatives(f, x, y)?;
    let eval = |dx: &[(usize, f64)], dy: &[(usize, f64)]| -> f64 {
        let mut xs = x.to_vec();
        let mut ys = y.to_vec();
        for &(i, h) in dx {
            xs[i] += h;
        }
        for &(i, h) in dy {
            ys[i] += h;
        }
        f.eval(&xs, &ys).unwrap_or(f64::NAN)
    };

    let mut report = FdReport {
        order,
        max_abs: 0.0,
        max_rel: 0.0,
        entries: 0,
    };

    let scaled = |c: f64| 1.0 + c.abs();
    for i in 0..n {
        let gy = adaptive(
            |base, s| {
                let h = s * base * scaled(y[i]);
                (eval(&[], &[(i, h)]) - eval(&[], &[(i, -h)])) / (2.0 * h)
            },
            &FIRST_SCALES,
        );
        report.push(exact.grad_y[i], gy);
        let gx = adaptive(
            |base, s| {
                let h = s * base * scaled(x[i]);
                (eval(&[(i, h)], &[]) - eval(&[(i, -h)], &[])) / (2.0 * h)
            },
            &FIRST_SCALES,
        );
        report.push(exact.grad_x[i], gx);
    }

    if order == FdOrder::Second {
        let f0 = eval(&[], &[]);
        for i in 0..n {
            for j in 0..n {
                let hyy = if i == j {
                    adaptive(
                        |base, s| {
                            let h = s * base * scaled(y[i]);
                            (eval(&[], &[(i, h)]) - 2.0 * f0 + eval(&[], &[(i, -h)])) / (h * h)
                        },
                        &SECOND_SCALES,
                    )
                } else {
                    adaptive(
                        |base, s| {
                            let (a, b) = (s * base * scaled(y[i]), s * base * scaled(y[j]));
                            (eval(&[], &[(i, a), (j, b)])
                                - eval(&[], &[(i, a), (j, -b)])
                                - eval(&[], &[(i, -a), (j, b)])
                                + eval(&[], &[(i, -a), (j, -b)]))
                                / (4.0 * a * b)
                        },
                        &SECOND_SCALES,
                    )
                };
                report.push(exact.hess_y[(i, j)], hyy);

                let hxy = adaptive(
                    |base, s| {
                        let (a, b) = (s * base * scaled(x[i]), s * base * scaled(y[j]));
                        (eval(&[(i, a)], &[(j, b)])
                            - eval(&[(i, a)], &[(j, -b)])
                            - eval(&[(i, -a)], &[(j, b)])
                            + eval(&[(i, -a)], &[(j, -b)]))
                            / (4.0 * a * b)
                    },
                    &SECOND_SCALES,
                );
                report.push(exact.mixed_xy[(i, j)], hxy);
            }
        }
    }
    Ok(report)
}
