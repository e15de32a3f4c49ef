//! Multiset storage and contractions of a symmetric tensor.

use finsler_mroot::symmetric_tensor::{canonicalize, SymmetricTensor};

fn main() -> finsler_mroot::Result<()> {
    let idx = canonicalize(&[2, 1, 2, 1], 2)?;
    println!(
        "canonical {:?}, multiplicity {}",
        idx.indices(),
        idx.multiplicity()
    );

    // A = y1^4 + 6 c y1^2 y2^2 + y2^4 with c = 1/3
    let t = SymmetricTensor::new(2, 4)
        .with(&[1, 1, 1, 1], 1.0)?
        .with(&[1, 1, 2, 2], 1.0 / 3.0)?
        .with(&[2, 2, 2, 2], 1.0)?;
    let y = [1.0, 2.0];
    println!("A(y) = {}", t.eval(&y)?);
    println!("A_i = {}", t.contract(&y, 1)?.to_vector().transpose());
    println!("A_ij = {}", t.contract(&y, 2)?.to_matrix());
    Ok(())
}
