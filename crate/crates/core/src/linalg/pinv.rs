use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Eigenvalues below this fraction of the largest are treated as zero.
pub const PINV_CUTOFF: f64 = 1e-12;

/// Moore–Penrose pseudo-inverse of a small symmetric matrix via eigendecomposition.
pub fn small_pinv(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if m.nrows() != m.ncols() {
        return Err(Error::Dimension(format!("pseudo-inverse of a {}x{} matrix", m.nrows(), m.ncols())));
    }
    let n = m.nrows();
    if n == 0 {
        return Ok(DMatrix::zeros(0, 0));
    }
    let scale = m.amax();
    let asym = (m - m.transpose()).amax();
    if asym > 1e-12 * scale {
        return Err(Error::NotSymmetric(asym));
    }
    if n == 1 {
        let v = m[(0, 0)];
        return Ok(DMatrix::from_element(1, 1, if v.abs() > 0.0 { 1.0 / v } else { 0.0 }));
    }
    let eig = ((m + m.transpose()) * 0.5).symmetric_eigen();
    let top = eig.eigenvalues.amax();
    let mut out = DMatrix::zeros(n, n);
    for (k, &lambda) in eig.eigenvalues.iter().enumerate() {
        if lambda.abs() > PINV_CUTOFF * top {
            let v = eig.eigenvectors.column(k);
            out += (v * v.transpose()) / lambda;
        }
    }
    Ok((&out + out.transpose()) * 0.5)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn scalar_and_rank_one() {
        assert_eq!(small_pinv(&DMatrix::from_element(1, 1, 2.0)).unwrap()[(0, 0)], 0.5);
        let m = DMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0]);
        let p = small_pinv(&m).unwrap();
        assert!((&p - &m * 0.25).amax() < 1e-15);
    }

    #[test]
    fn rejects_asymmetric() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 0.0, 1.0]);
        assert!(matches!(small_pinv(&m), Err(Error::NotSymmetric(_))));
    }

    #[test]
    fn penrose_identities_on_random_psd() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..30 {
            let n = rng.random_range(1..8);
            let rank = rng.random_range(1..=n);
            let a = DMatrix::from_fn(rank, n, |_, _| rng.random_range(-1.0..1.0));
            let m = a.transpose() * &a;
            let p = small_pinv(&m).unwrap();
            let scale = m.norm().max(p.norm());
            assert!((&p * &m * &p - &p).amax() <= 1e-10 * scale * p.norm().max(1.0));
            assert!((&m * &p * &m - &m).amax() <= 1e-10 * m.norm());
        }
    }
}
