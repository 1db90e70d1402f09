//! Dense real linear algebra utilities: channel sampling, orthonormal null
//! bases, numeric rank, Gaussian differential entropies, and DoF slope
//! estimation over an SNR ladder.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MatrixError {
    #[error("null space is empty")]
    EmptyNullSpace,
    #[error("covariance matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("power ladder must contain at least 2 strictly increasing entries")]
    BadLadder,
}

/// One draw of the four channel matrices (each N rows by M columns),
/// i.i.d. standard normal entries.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    pub h11: DMatrix<f64>,
    pub h12: DMatrix<f64>,
    pub h21: DMatrix<f64>,
    pub h22: DMatrix<f64>,
    pub seed: u64,
}

impl ChannelRealization {
    /// Channel from Tx `tx` to Rx `rx` (indices 1 or 2).
    pub fn h(&self, rx: usize, tx: usize) -> &DMatrix<f64> {
        match (rx, tx) {
            (1, 1) => &self.h11,
            (1, 2) => &self.h12,
            (2, 1) => &self.h21,
            (2, 2) => &self.h22,
            _ => panic!("indices must be 1 or 2"),
        }
    }

    /// Largest absolute entry over all four matrices.
    pub fn max_abs(&self) -> f64 {
        [&self.h11, &self.h12, &self.h21, &self.h22]
            .iter()
            .map(|h| h.amax())
            .fold(0.0, f64::max)
    }
}

/// Samples the four channel matrices deterministically from a seed.
pub fn sample_channel(m: usize, n: usize, seed: u64) -> ChannelRealization {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draw = |rng: &mut ChaCha8Rng| {
        DMatrix::from_fn(n, m, |_, _| StandardNormal.sample(rng))
    };
    let h11 = draw(&mut rng);
    let h12 = draw(&mut rng);
    let h21 = draw(&mut rng);
    let h22 = draw(&mut rng);
    ChannelRealization { h11, h12, h21, h22, seed }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NullSide {
    Right,
    Left,
}

fn default_tol(h: &DMatrix<f64>) -> f64 {
    h.nrows().max(h.ncols()) as f64 * f64::EPSILON
}

/// Number of singular values exceeding `tol * sigma_max` (relative
/// threshold; a zero matrix has rank 0). `tol = None` uses the standard
/// `max(rows, cols) * eps` heuristic.
pub fn numeric_rank(h: &DMatrix<f64>, tol: Option<f64>) -> usize {
    if h.nrows() == 0 || h.ncols() == 0 {
        return 0;
    }
    let tol = tol.unwrap_or_else(|| default_tol(h));
    let sv = h.clone().singular_values();
    let smax = sv.max();
    if smax <= 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > tol * smax).count()
}

/// Orthonormal basis of the right (`H B = 0`) or left (`B^T H = 0`) null
/// space. Columns of the result are orthonormal; the basis dimension equals
/// `cols(H) - rank` (right) or `rows(H) - rank` (left).
///
/// Built by completing the row-space singular vectors to a full orthonormal
/// set with a double-pass Gram-Schmidt sweep over identity columns; this
/// keeps residuals at machine-epsilon level.
pub fn null_basis(
    h: &DMatrix<f64>,
    side: NullSide,
    tol: Option<f64>,
) -> Result<DMatrix<f64>, MatrixError> {
    match side {
        NullSide::Left => null_basis(&h.transpose(), NullSide::Right, tol),
        NullSide::Right => {
            let dim = h.ncols();
            let rank = numeric_rank(h, tol);
            let null_dim = dim - rank;
            if null_dim == 0 {
                return Err(MatrixError::EmptyNullSpace);
            }
            let svd = h.clone().svd(false, true);
            let v_t = svd.v_t.expect("right singular vectors requested");
            // row-space basis: right singular vectors of the numerically
            // nonzero singular values
            let mut basis: Vec<nalgebra::DVector<f64>> = (0..rank)
                .map(|i| v_t.row(i).transpose())
                .collect();
            let mut null_cols: Vec<nalgebra::DVector<f64>> = Vec::with_capacity(null_dim);
            for j in 0..dim {
                if null_cols.len() == null_dim {
                    break;
                }
                let mut v = nalgebra::DVector::zeros(dim);
                v[j] = 1.0;
                for _pass in 0..2 {
                    for b in &basis {
                        let proj = b.dot(&v);
                        v -= b * proj;
                    }
                }
                let norm = v.norm();
                if norm > 0.5 {
                    v /= norm;
                    basis.push(v.clone());
                    null_cols.push(v);
                }
            }
            // a 0.5 acceptance threshold can in principle skip candidates;
            // sweep again accepting anything with substantial residual
            if null_cols.len() < null_dim {
                for j in 0..dim {
                    if null_cols.len() == null_dim {
                        break;
                    }
                    let mut v = nalgebra::DVector::zeros(dim);
                    v[j] = 1.0;
                    for _pass in 0..2 {
                        for b in &basis {
                            let proj = b.dot(&v);
                            v -= b * proj;
                        }
                    }
                    let norm = v.norm();
                    if norm > 1e-6 {
                        v /= norm;
                        basis.push(v.clone());
                        null_cols.push(v);
                    }
                }
            }
            assert_eq!(null_cols.len(), null_dim, "null-space completion failed");
            Ok(DMatrix::from_columns(&null_cols))
        }
    }
}

/// Differential entropy of a Gaussian with covariance `K`, in nats:
/// `0.5 * ln det(2 pi e K)`.
pub fn gaussian_entropy(k: &DMatrix<f64>) -> Result<f64, MatrixError> {
    let n = k.nrows();
    let chol = nalgebra::Cholesky::new(k.clone()).ok_or(MatrixError::NotPositiveDefinite)?;
    let log_det: f64 = (0..n).map(|i| chol.l_dirty()[(i, i)].ln()).sum::<f64>() * 2.0;
    Ok(0.5 * (n as f64 * (2.0 * std::f64::consts::PI * std::f64::consts::E).ln() + log_det))
}

/// Differential entropy of a Gaussian `L x + z` with `x`, `z` standard
/// normal: `0.5 * sum ln(2 pi e (1 + sigma_i^2))` over the singular values of
/// `L`. Numerically safe at any signal scale, unlike factoring the assembled
/// covariance, whose unit-noise eigendirections drown in roundoff once the
/// condition number passes 1/eps.
pub fn entropy_from_factors(l: &DMatrix<f64>) -> f64 {
    let n = l.nrows();
    let two_pi_e = 2.0 * std::f64::consts::PI * std::f64::consts::E;
    let mut h = n as f64 * two_pi_e.ln();
    if l.ncols() > 0 {
        for s in l.clone().singular_values().iter() {
            h += (s * s).ln_1p();
        }
    }
    0.5 * h
}

/// High-SNR slope estimate of entropy values against `0.5 ln P`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlopeEstimate {
    pub slope: f64,
    pub ladder: Vec<f64>,
    /// Max deviation of the consecutive-pair slopes from the reported slope.
    pub residual: f64,
}

/// Estimates the slope of `h` against `0.5 ln P` from the top ladder pair;
/// the residual reports how far the other consecutive pairs deviate.
pub fn dof_slope(values: &[(f64, f64)]) -> Result<SlopeEstimate, MatrixError> {
    if values.len() < 2 || values.windows(2).any(|w| w[1].0 <= w[0].0) {
        return Err(MatrixError::BadLadder);
    }
    let pair_slope = |a: &(f64, f64), b: &(f64, f64)| -> f64 {
        (b.1 - a.1) / (0.5 * b.0.ln() - 0.5 * a.0.ln())
    };
    let top = values.len() - 1;
    let slope = pair_slope(&values[top - 1], &values[top]);
    let residual = values
        .windows(2)
        .map(|w| (pair_slope(&w[0], &w[1]) - slope).abs())
        .fold(0.0, f64::max);
    Ok(SlopeEstimate { slope, ladder: values.iter().map(|v| v.0).collect(), residual })
}

/// Default power ladder for informational slope reports.
pub const LADDER_DEFAULT: [f64; 4] = [1e4, 1e6, 1e8, 1e10];
/// Power ladder used by the verification suites. The rungs sit high because
/// signals at a fractional power exponent `a` approach their asymptotic
/// entropy slope only like P^(a-1); around P = 1e10 the pairwise slope of an
/// a = 0.7 stream is still several percent short of its limit.
pub const LADDER_VERIFY: [f64; 3] = [1e10, 1e14, 1e18];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sampling_deterministic_and_distinct() {
        let a = sample_channel(3, 2, 11);
        let b = sample_channel(3, 2, 11);
        assert_eq!(a, b);
        let c = sample_channel(3, 2, 12);
        assert_ne!(a, c);
        assert_eq!(a.h11.shape(), (2, 3));
    }

    #[test]
    fn random_channels_have_full_rank() {
        for seed in 0..100 {
            let r = sample_channel(3, 2, seed);
            assert_eq!(numeric_rank(&r.h11, None), 2);
        }
    }

    #[test]
    fn rank_oracles() {
        assert_eq!(numeric_rank(&DMatrix::<f64>::zeros(3, 3), None), 0);
        let r = sample_channel(4, 4, 3);
        assert_eq!(numeric_rank(&r.h11, None), 4);
        let v = r.h11.column(0).clone_owned();
        let dup = DMatrix::from_columns(&[v.clone(), v * 2.0]);
        assert_eq!(numeric_rank(&dup, None), 1);
    }

    #[test]
    fn null_basis_canonical() {
        let h = DMatrix::from_row_slice(2, 3, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        let b = null_basis(&h, NullSide::Right, None).unwrap();
        assert_eq!(b.shape(), (3, 1));
        assert!((b[(2, 0)].abs() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn null_basis_trivial_is_error() {
        let h = DMatrix::<f64>::identity(3, 3);
        assert!(matches!(null_basis(&h, NullSide::Right, None), Err(MatrixError::EmptyNullSpace)));
    }

    #[test]
    fn null_basis_residuals_and_orthonormality() {
        for seed in 0..100 {
            let r = sample_channel(3, 2, 1000 + seed);
            let h = &r.h12; // 2x3
            let b = null_basis(h, NullSide::Right, None).unwrap();
            assert_eq!(b.ncols(), 1);
            assert!((h * &b).amax() < 1e-10 * h.amax());
            let gram = b.transpose() * &b;
            assert!((gram - DMatrix::identity(1, 1)).amax() < 1e-12);

            let bl = null_basis(h, NullSide::Left, None);
            assert!(bl.is_err()); // 2x3 has full row rank: no left null space
        }
    }

    #[test]
    fn left_null_basis() {
        for seed in 0..20 {
            let r = sample_channel(2, 3, 2000 + seed);
            let h = &r.h12; // 3x2
            let b = null_basis(h, NullSide::Left, None).unwrap();
            assert_eq!(b.shape(), (3, 1));
            assert!((b.transpose() * h).amax() < 1e-10 * h.amax());
        }
    }

    #[test]
    fn rank_nullity() {
        for (m, n, seed) in [(5, 3, 1u64), (3, 5, 2), (12, 12, 3), (7, 4, 4)] {
            let r = sample_channel(m, n, seed);
            let rk = numeric_rank(&r.h11, None);
            match null_basis(&r.h11, NullSide::Right, None) {
                Ok(b) => assert_eq!(rk + b.ncols(), m),
                Err(_) => assert_eq!(rk, m),
            }
        }
    }

    #[test]
    fn entropy_scalar_standard_normal() {
        let h = gaussian_entropy(&DMatrix::identity(1, 1)).unwrap();
        assert!((h - 0.5 * (2.0 * std::f64::consts::PI * std::f64::consts::E).ln()).abs() < 1e-12);
    }

    #[test]
    fn entropy_block_additivity() {
        let r = sample_channel(3, 3, 9);
        let k1 = &r.h11 * r.h11.transpose() + DMatrix::identity(3, 3);
        let k2 = &r.h22 * r.h22.transpose() + DMatrix::identity(3, 3);
        let mut kb = DMatrix::zeros(6, 6);
        kb.view_mut((0, 0), (3, 3)).copy_from(&k1);
        kb.view_mut((3, 3), (3, 3)).copy_from(&k2);
        let sum = gaussian_entropy(&k1).unwrap() + gaussian_entropy(&k2).unwrap();
        assert!((gaussian_entropy(&kb).unwrap() - sum).abs() < 1e-9);
    }

    #[test]
    fn entropy_rejects_indefinite() {
        let k = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(gaussian_entropy(&k).is_err());
    }

    #[test]
    fn entropy_rotation_invariance() {
        let r = sample_channel(4, 4, 17);
        let k = &r.h11 * r.h11.transpose() + DMatrix::identity(4, 4);
        let q = r.h22.clone().qr().q();
        let rotated = &q * &k * q.transpose();
        assert!(
            (gaussian_entropy(&rotated).unwrap() - gaussian_entropy(&k).unwrap()).abs() < 1e-9
        );
    }

    #[test]
    fn slope_affine_exact() {
        let vals: Vec<(f64, f64)> =
            [1e4, 1e6, 1e8].iter().map(|&p: &f64| (p, 3.0 * 0.5 * p.ln() + 7.0)).collect();
        let s = dof_slope(&vals).unwrap();
        assert!((s.slope - 3.0).abs() < 1e-12);
        assert!(s.residual < 1e-12);
    }

    #[test]
    fn slope_scalar_channel() {
        let vals: Vec<(f64, f64)> = LADDER_VERIFY
            .iter()
            .map(|&p| {
                (p, 0.5 * (2.0 * std::f64::consts::PI * std::f64::consts::E * (1.0 + p)).ln())
            })
            .collect();
        let s = dof_slope(&vals).unwrap();
        assert!((s.slope - 1.0).abs() < 1e-5);
    }

    #[test]
    fn slope_constant_and_errors() {
        let s = dof_slope(&[(1e4, 2.0), (1e6, 2.0)]).unwrap();
        assert_eq!(s.slope, 0.0);
        assert!(dof_slope(&[(1e4, 1.0)]).is_err());
        assert!(dof_slope(&[(1e6, 1.0), (1e4, 2.0)]).is_err());
    }

    #[test]
    fn fact1_slope_equals_rank() {
        // the entropy of H x + z with x at power P grows like rank(H)
        for (m, n, seed) in [(3, 2, 5u64), (2, 3, 6), (4, 4, 7)] {
            let r = sample_channel(m, n, seed);
            let h = &r.h11;
            let vals: Vec<(f64, f64)> = LADDER_VERIFY
                .iter()
                .map(|&p| (p, entropy_from_factors(&(h * (p / m as f64).sqrt()))))
                .collect();
            let s = dof_slope(&vals).unwrap();
            assert!(
                (s.slope - numeric_rank(h, None) as f64).abs() < 0.02,
                "slope {} rank {}",
                s.slope,
                numeric_rank(h, None)
            );
        }
    }
}
