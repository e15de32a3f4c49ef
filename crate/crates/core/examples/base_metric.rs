//! Closed-form base quantities at one point compared with the oracle.

use finsler_mroot::fields::CoefficientField;
use finsler_mroot::mth_root::{metric_point, verify_base_forms};
use finsler_mroot::symmetric_tensor::SymmetricTensor;

fn main() -> finsler_mroot::Result<()> {
    let tensor = SymmetricTensor::new(3, 3)
        .with(&[1, 1, 1], 1.0)?
        .with(&[1, 2, 3], 0.2)?
        .with(&[2, 2, 2], 1.5)?
        .with(&[3, 3, 3], 2.0)?;
    let field = CoefficientField::constant(&tensor);
    let (x, y) = ([0.0; 3], [1.0, 0.8, 0.6]);

    let p = metric_point(&field, &x, &y)?;
    println!("A = {:.12}, F = {:.12}", p.a, p.f);
    println!("l = {}", p.l.transpose());
    println!("g = {}", p.g);
    println!("g^-1 = {}", p.g_inv);

    let r = verify_base_forms(&field, &p)?;
    println!("{r:#?}");
    Ok(())
}
