//! Diagonal and Hermitian operators in a fixed basis and their norms.
//!
//! `cargo run --example operators`

use lrd_fts::operator::{compose, hs_norm, op_norm, trace_norm, BasisSpec, DiagonalOperator, HermitianFrame};
use num_complex::Complex64;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let basis = BasisSpec::with_labels(vec!["level".into(), "slope".into(), "curvature".into()])?;
    let v = [
        Complex64::new(1.0, 0.0),
        Complex64::new(0.5, -0.5),
        Complex64::new(0.0, 2.0),
    ];
    let p = HermitianFrame::rank_one(basis.clone(), &v)?;
    println!("rank-one frame: eigenvalues {:.4?}", p.eigenvalues());
    println!(
        "trace norm {:.4}, HS norm {:.4}, operator norm {:.4}",
        trace_norm(&p),
        hs_norm(&p),
        op_norm(&p)
    );

    let d = DiagonalOperator::positive(basis, vec![1.0, 0.25, 1.0 / 9.0])?;
    let pd = compose(&p, &d)?;
    println!(
        "P D diagonal: {:.4?}",
        (0..3).map(|i| pd[(i, i)].re).collect::<Vec<_>>()
    );
    let mut csv = Vec::new();
    p.write_csv(&mut csv)?;
    print!("{}", String::from_utf8(csv)?);
    Ok(())
}
