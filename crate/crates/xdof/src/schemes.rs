//! Explicit filter-matrix constructions for every beamforming and
//! rate-splitting scheme family, with per-state effective channels,
//! received-signal covariances, and algebraic condition checking.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matrix_core::{
    entropy_from_factors, null_basis, numeric_rank, ChannelRealization, MatrixError, NullSide,
};
use crate::model::{state_mask, StateLabel};

#[derive(Debug, Error)]
pub enum SchemeError {
    #[error("family {family} is not defined for M={m}, N={n}")]
    DimensionMismatch { family: &'static str, m: usize, n: usize },
    #[error("power exponents must lie in [0,1] (a={a}, b={b})")]
    BadExponent { a: f64, b: f64 },
    #[error("effective channel matrix is singular; resample the channel")]
    SingularEffectiveChannel,
    #[error("null-space construction failed: {0}")]
    NullSpace(#[from] MatrixError),
    #[error("unknown stream name: {0}")]
    UnknownStream(String),
    #[error("covariance is not positive definite")]
    BadCovariance,
}

/// Scheme families. The `type*` names index by which side has more antennas
/// (1: more receive antennas, 2: more transmit antennas) and the burstiness
/// regime the scheme targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Family {
    Type1R1,
    Type1R2,
    Type2R1,
    Type2R2Hkia,
    SimplifiedT1,
    SimplifiedT2,
    HkiaLbT1,
    HkiaLbT2Blend,
}

impl Family {
    pub const ALL: [Family; 8] = [
        Family::Type1R1,
        Family::Type1R2,
        Family::Type2R1,
        Family::Type2R2Hkia,
        Family::SimplifiedT1,
        Family::SimplifiedT2,
        Family::HkiaLbT1,
        Family::HkiaLbT2Blend,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Family::Type1R1 => "type1_r1",
            Family::Type1R2 => "type1_r2",
            Family::Type2R1 => "type2_r1",
            Family::Type2R2Hkia => "type2_r2_hkia",
            Family::SimplifiedT1 => "simplified_t1",
            Family::SimplifiedT2 => "simplified_t2",
            Family::HkiaLbT1 => "hkia_lb_t1",
            Family::HkiaLbT2Blend => "hkia_lb_t2_blend",
        }
    }

    pub fn parse(s: &str) -> Option<Family> {
        Family::ALL.iter().copied().find(|f| f.name() == s)
    }

    /// Whether the (M, N) pair lies in the family's domain.
    pub fn legal(&self, m: usize, n: usize) -> bool {
        match self {
            Family::Type1R1 => m <= n && 2 * m >= n,
            Family::Type1R2 => m <= n && 2 * m > n && 3 * m <= 2 * n,
            Family::Type2R1 | Family::Type2R2Hkia => n <= m && 2 * n > m,
            Family::SimplifiedT1 => 2 * m <= n,
            Family::SimplifiedT2 => 2 * n <= m,
            // the per-remainder splits need n / 3 >= 1 to be nonzero
            Family::HkiaLbT1 => m <= n && 3 * m > 2 * n && n >= 3,
            Family::HkiaLbT2Blend => n <= m && 3 * n > 2 * m,
        }
    }

    /// Families that superimpose public messages on the private streams.
    pub fn is_hkia(&self) -> bool {
        matches!(self, Family::Type2R2Hkia | Family::HkiaLbT1 | Family::HkiaLbT2Blend)
    }
}

/// One message stream: a transmit precoder (M x d) plus the per-column symbol
/// variances expressed as `coeff * P^exponent`.
#[derive(Debug, Clone, PartialEq)]
pub struct Stream {
    pub name: &'static str,
    pub tx: usize,
    /// Intended receiver; `None` for public streams decoded by both.
    pub rx: Option<usize>,
    pub precoder: DMatrix<f64>,
    pub col_vars: Vec<(f64, f64)>,
}

impl Stream {
    pub fn dim(&self) -> usize {
        self.precoder.ncols()
    }

    /// Average transmit power of the stream at total power budget `p`.
    pub fn power(&self, p: f64) -> f64 {
        self.col_vars
            .iter()
            .enumerate()
            .map(|(j, (c, e))| c * p.powf(*e) * self.precoder.column(j).norm_squared())
            .sum()
    }
}

/// A constructed scheme: named filter matrices, the stream dimension split
/// `[d_D1, d_C1, d_C2, d_D2]`, power exponents, and the transmit streams.
#[derive(Debug, Clone, PartialEq)]
pub struct SchemeSpec {
    pub family: Family,
    pub m: usize,
    pub n: usize,
    pub a: f64,
    pub b: f64,
    pub dims: [usize; 4],
    pub filters: BTreeMap<String, DMatrix<f64>>,
    pub streams: Vec<Stream>,
    pub public_power_fraction: f64,
}

impl SchemeSpec {
    pub fn stream(&self, name: &str) -> Option<&Stream> {
        self.streams.iter().find(|s| s.name == name)
    }
}

fn first_cols(h: &DMatrix<f64>, w: usize) -> DMatrix<f64> {
    h.columns(0, w).into_owned()
}

fn first_rows(h: &DMatrix<f64>, r: usize) -> DMatrix<f64> {
    h.rows(0, r).into_owned()
}

fn vcat(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    assert_eq!(a.ncols(), b.ncols());
    let mut out = DMatrix::zeros(a.nrows() + b.nrows(), a.ncols());
    out.view_mut((0, 0), (a.nrows(), a.ncols())).copy_from(a);
    out.view_mut((a.nrows(), 0), (b.nrows(), b.ncols())).copy_from(b);
    out
}

fn hcat(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    assert_eq!(a.nrows(), b.nrows());
    let mut out = DMatrix::zeros(a.nrows(), a.ncols() + b.ncols());
    out.view_mut((0, 0), (a.nrows(), a.ncols())).copy_from(a);
    out.view_mut((0, a.ncols()), (b.nrows(), b.ncols())).copy_from(b);
    out
}

/// Right null basis truncated to `want` columns; empty matrix when `want` is 0.
fn right_null_cols(h: &DMatrix<f64>, want: usize) -> Result<DMatrix<f64>, SchemeError> {
    if want == 0 {
        return Ok(DMatrix::zeros(h.ncols(), 0));
    }
    let b = null_basis(h, NullSide::Right, None)?;
    assert!(b.ncols() >= want, "null space smaller than requested");
    Ok(first_cols(&b, want))
}

fn left_null_cols(h: &DMatrix<f64>, want: usize) -> Result<DMatrix<f64>, SchemeError> {
    if want == 0 {
        return Ok(DMatrix::zeros(h.nrows(), 0));
    }
    let b = null_basis(h, NullSide::Left, None)?;
    assert!(b.ncols() >= want, "null space smaller than requested");
    Ok(first_cols(&b, want))
}

fn invert(g: &DMatrix<f64>) -> Result<DMatrix<f64>, SchemeError> {
    if numeric_rank(g, None) < g.nrows() {
        return Err(SchemeError::SingularEffectiveChannel);
    }
    g.clone().try_inverse().ok_or(SchemeError::SingularEffectiveChannel)
}

/// Pads a precoder defined on the first `rows(t)` antennas with zero rows up
/// to `m` antennas.
fn pad_rows(t: &DMatrix<f64>, m: usize) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(m, t.ncols());
    out.view_mut((0, 0), (t.nrows(), t.ncols())).copy_from(t);
    out
}

/// Per-column variances `share * P^e / ||t_j||^2` so that the stream's total
/// transmit power is exactly `share_total * P^e`.
fn normalized_vars(t: &DMatrix<f64>, per_col_share: f64, exponent: f64) -> Vec<(f64, f64)> {
    (0..t.ncols())
        .map(|j| {
            let ns = t.column(j).norm_squared();
            (per_col_share / ns, exponent)
        })
        .collect()
}

/// Builds a scheme of the given family from a channel realization. Power
/// exponents `a`, `b` apply only to the families that use them; all filter
/// choices are deterministic functions of the realization.
pub fn build(
    family: Family,
    re: &ChannelRealization,
    m: usize,
    n: usize,
    a: f64,
    b: f64,
) -> Result<SchemeSpec, SchemeError> {
    if !family.legal(m, n) {
        return Err(SchemeError::DimensionMismatch { family: family.name(), m, n });
    }
    if !(0.0..=1.0).contains(&a) || !(0.0..=1.0).contains(&b) {
        return Err(SchemeError::BadExponent { a, b });
    }
    let mut filters: BTreeMap<String, DMatrix<f64>> = BTreeMap::new();
    let mut streams: Vec<Stream> = Vec::new();
    #[allow(unused_assignments)]
    let mut dims = [0usize; 4];
    let mut public_power_fraction = 0.0;
    let push = |streams: &mut Vec<Stream>,
                    name: &'static str,
                    tx: usize,
                    rx: Option<usize>,
                    t: DMatrix<f64>,
                    share: f64,
                    exp: f64| {
        if t.ncols() > 0 {
            let vars = normalized_vars(&t, share, exp);
            streams.push(Stream { name, tx, rx, precoder: t, col_vars: vars });
        }
    };

    match family {
        Family::Type1R1 => {
            // receive-side nulling of the cross link; each Tx sends its
            // direct message over all antennas
            let psi1 = left_null_cols(&re.h12, n - m)?;
            let psi2 = left_null_cols(&re.h21, n - m)?;
            filters.insert("psi1".into(), psi1);
            filters.insert("psi2".into(), psi2);
            filters.insert("psi1_tilde".into(), first_cols(&re.h12, 2 * m - n));
            filters.insert("psi2_tilde".into(), first_cols(&re.h21, 2 * m - n));
            dims = [m, 0, 0, m];
            push(&mut streams, "D1", 1, Some(1), DMatrix::identity(m, m), 1.0 / m as f64, 1.0);
            push(&mut streams, "D2", 2, Some(2), DMatrix::identity(m, m), 1.0 / m as f64, 1.0);
        }
        Family::SimplifiedT1 => {
            let psi1 = first_cols(&null_basis(&re.h12, NullSide::Left, None)?, m);
            let psi2 = first_cols(&null_basis(&re.h21, NullSide::Left, None)?, m);
            filters.insert("psi1".into(), psi1);
            filters.insert("psi2".into(), psi2);
            dims = [m, 0, 0, m];
            push(&mut streams, "D1", 1, Some(1), DMatrix::identity(m, m), 1.0 / m as f64, 1.0);
            push(&mut streams, "D2", 2, Some(2), DMatrix::identity(m, m), 1.0 / m as f64, 1.0);
        }
        Family::Type1R2 => {
            // channel inversion onto two orthogonal broadcast channels
            let d_d = n - m;
            let d_c = 2 * m - n;
            let psi1 = left_null_cols(&re.h12, d_d)?;
            let psi2 = left_null_cols(&re.h21, d_d)?;
            let phi1 = left_null_cols(&re.h11, d_c)?;
            let phi2 = left_null_cols(&re.h22, d_c)?;
            let g1 = vcat(&(psi1.transpose() * &re.h11), &(phi2.transpose() * &re.h21));
            let g2 = vcat(&(psi2.transpose() * &re.h22), &(phi1.transpose() * &re.h12));
            let g1_inv = invert(&g1)?;
            let g2_inv = invert(&g2)?;
            dims = [d_d, d_c, d_c, d_d];
            push(
                &mut streams,
                "D1",
                1,
                Some(1),
                first_cols(&g1_inv, d_d),
                1.0 / (2.0 * d_d as f64),
                1.0,
            );
            push(
                &mut streams,
                "C1",
                1,
                Some(2),
                g1_inv.columns(d_d, d_c).into_owned(),
                1.0 / (2.0 * d_c as f64),
                1.0,
            );
            push(
                &mut streams,
                "D2",
                2,
                Some(2),
                first_cols(&g2_inv, d_d),
                1.0 / (2.0 * d_d as f64),
                1.0,
            );
            push(
                &mut streams,
                "C2",
                2,
                Some(1),
                g2_inv.columns(d_d, d_c).into_owned(),
                1.0 / (2.0 * d_c as f64),
                1.0,
            );
            filters.insert("psi1".into(), psi1);
            filters.insert("psi2".into(), psi2);
            filters.insert("phi1".into(), phi1);
            filters.insert("phi2".into(), phi2);
            filters.insert("G1".into(), g1);
            filters.insert("G2".into(), g2);
        }
        Family::Type2R1 => {
            // transmit-side nulling; the direct message rides both the
            // cross-invisible block and an auxiliary block used when the
            // cross links are off
            let e = m - n;
            let w = 2 * n - m;
            let psi1 = right_null_cols(&re.h21, e)?;
            let psi2 = right_null_cols(&re.h12, e)?;
            let phi1 = right_null_cols(&re.h11, e)?;
            let phi2 = right_null_cols(&re.h22, e)?;
            let psi1_tilde = first_cols(&re.h21.transpose(), w);
            let psi2_tilde = first_cols(&re.h12.transpose(), w);
            // the receive filters null the auxiliary-block interference from
            // the other transmitter; their response to the cross-message
            // block stays full rank
            let theta1 = left_null_cols(&(&re.h12 * &psi2_tilde), e)?;
            let theta2 = left_null_cols(&(&re.h21 * &psi1_tilde), e)?;
            dims = [n, e, e, n];
            push(
                &mut streams,
                "D1",
                1,
                Some(1),
                hcat(&psi1, &psi1_tilde),
                1.0 / (2.0 * n as f64),
                1.0,
            );
            push(&mut streams, "C1", 1, Some(2), phi1.clone(), 1.0 / (2.0 * e.max(1) as f64), 1.0);
            push(
                &mut streams,
                "D2",
                2,
                Some(2),
                hcat(&psi2, &psi2_tilde),
                1.0 / (2.0 * n as f64),
                1.0,
            );
            push(&mut streams, "C2", 2, Some(1), phi2.clone(), 1.0 / (2.0 * e.max(1) as f64), 1.0);
            filters.insert("psi1".into(), psi1);
            filters.insert("psi2".into(), psi2);
            filters.insert("phi1".into(), phi1);
            filters.insert("phi2".into(), phi2);
            filters.insert("psi1_tilde".into(), psi1_tilde);
            filters.insert("psi2_tilde".into(), psi2_tilde);
            filters.insert("theta1".into(), theta1);
            filters.insert("theta2".into(), theta2);
        }
        Family::Type2R2Hkia => {
            let e = m - n;
            let psi1 = right_null_cols(&re.h21, e)?;
            let phi1 = right_null_cols(&re.h11, e)?;
            let psi2 = right_null_cols(&re.h12, e)?;
            let phi2 = right_null_cols(&re.h22, e)?;
            dims = [e, e, e, e];
            public_power_fraction = 0.5;
            let priv_share = if e > 0 { 1.0 / (4.0 * e as f64) } else { 0.0 };
            push(&mut streams, "U1", 1, None, DMatrix::identity(m, m), 1.0 / (2.0 * m as f64), 1.0);
            push(&mut streams, "U2", 2, None, DMatrix::identity(m, m), 1.0 / (2.0 * m as f64), 1.0);
            push(&mut streams, "D1", 1, Some(1), psi1.clone(), priv_share, 1.0);
            push(&mut streams, "C1", 1, Some(2), phi1.clone(), priv_share, 1.0);
            push(&mut streams, "D2", 2, Some(2), psi2.clone(), priv_share, 1.0);
            push(&mut streams, "C2", 2, Some(1), phi2.clone(), priv_share, 1.0);
            filters.insert("psi1".into(), psi1);
            filters.insert("phi1".into(), phi1);
            filters.insert("psi2".into(), psi2);
            filters.insert("phi2".into(), phi2);
        }
        Family::SimplifiedT2 => {
            let psi1 = first_cols(&null_basis(&re.h21, NullSide::Right, None)?, n);
            let phi1 = first_cols(&null_basis(&re.h11, NullSide::Right, None)?, n);
            let psi2 = first_cols(&null_basis(&re.h12, NullSide::Right, None)?, n);
            let phi2 = first_cols(&null_basis(&re.h22, NullSide::Right, None)?, n);
            dims = [n, n, n, n];
            let share = 1.0 / (2.0 * n as f64);
            push(&mut streams, "D1", 1, Some(1), psi1.clone(), share, 1.0);
            push(&mut streams, "C1", 1, Some(2), phi1.clone(), share, 1.0);
            push(&mut streams, "D2", 2, Some(2), psi2.clone(), share, 1.0);
            push(&mut streams, "C2", 2, Some(1), phi2.clone(), share, 1.0);
            filters.insert("psi1".into(), psi1);
            filters.insert("phi1".into(), phi1);
            filters.insert("psi2".into(), psi2);
            filters.insert("phi2".into(), phi2);
        }
        Family::HkiaLbT1 => {
            // inversion-based scheme on the leading transmit antennas with
            // per-remainder dimension splits
            let (k, q) = (n / 3, n % 3);
            dims = match q {
                0 => [k, k, k, k],
                1 => [k, k, k, k + 1],
                _ => [k + 1, k, k, k + 1],
            };
            let [d_d1, d_c1, d_c2, d_d2] = dims;
            let m1 = d_d1 + d_c1;
            let m2 = d_c2 + d_d2;
            let h11 = first_cols(&re.h11, m1);
            let h21 = first_cols(&re.h21, m1);
            let h12 = first_cols(&re.h12, m2);
            let h22 = first_cols(&re.h22, m2);
            let psi1 = left_null_cols(&h12, d_d1)?;
            let phi2 = left_null_cols(&h22, d_c1)?;
            let psi2 = left_null_cols(&h21, d_d2)?;
            let phi1 = left_null_cols(&h11, d_c2)?;
            let g1 = vcat(&(psi1.transpose() * &h11), &(phi2.transpose() * &h21));
            let g2 = vcat(&(psi2.transpose() * &h22), &(phi1.transpose() * &h12));
            let g1_inv = invert(&g1)?;
            let g2_inv = invert(&g2)?;
            public_power_fraction = 0.5;
            push(&mut streams, "U1", 1, None, DMatrix::identity(m, m), 1.0 / (2.0 * m as f64), 1.0);
            push(&mut streams, "U2", 2, None, DMatrix::identity(m, m), 1.0 / (2.0 * m as f64), 1.0);
            push(
                &mut streams,
                "D1",
                1,
                Some(1),
                pad_rows(&first_cols(&g1_inv, d_d1), m),
                1.0 / (4.0 * d_d1 as f64),
                a,
            );
            push(
                &mut streams,
                "C1",
                1,
                Some(2),
                pad_rows(&g1_inv.columns(d_d1, d_c1).into_owned(), m),
                1.0 / (4.0 * d_c1 as f64),
                a,
            );
            push(
                &mut streams,
                "D2",
                2,
                Some(2),
                pad_rows(&first_cols(&g2_inv, d_d2), m),
                1.0 / (4.0 * d_d2 as f64),
                a,
            );
            push(
                &mut streams,
                "C2",
                2,
                Some(1),
                pad_rows(&g2_inv.columns(d_d2, d_c2).into_owned(), m),
                1.0 / (4.0 * d_c2 as f64),
                a,
            );
            filters.insert("psi1".into(), psi1);
            filters.insert("phi1".into(), phi1);
            filters.insert("psi2".into(), psi2);
            filters.insert("phi2".into(), phi2);
            filters.insert("G1".into(), g1);
            filters.insert("G2".into(), g2);
        }
        Family::HkiaLbT2Blend => {
            // per-message precoder: an exactly-nulled block at power P^b and
            // a partially-nulled block at power P^a, confined to the trailing
            // receive coordinates of the unintended receiver
            let k = m / 3;
            let e = m - n;
            let acols = k - e;
            let rows_hat = m - k;
            let exact = |h: &DMatrix<f64>| right_null_cols(h, e);
            let partial = |h: &DMatrix<f64>, ex: &DMatrix<f64>| -> Result<DMatrix<f64>, SchemeError> {
                if acols == 0 {
                    return Ok(DMatrix::zeros(m, 0));
                }
                let stacked = vcat(&first_rows(h, rows_hat), &ex.transpose());
                right_null_cols(&stacked, acols)
            };
            let psi1_e = exact(&re.h21)?;
            let psi1_p = partial(&re.h21, &psi1_e)?;
            let phi1_e = exact(&re.h11)?;
            let phi1_p = partial(&re.h11, &phi1_e)?;
            let psi2_e = exact(&re.h12)?;
            let psi2_p = partial(&re.h12, &psi2_e)?;
            let phi2_e = exact(&re.h22)?;
            let phi2_p = partial(&re.h22, &phi2_e)?;
            dims = [k, k, k, k];
            public_power_fraction = 0.5;
            let blend_vars = |_t: &DMatrix<f64>| -> Vec<(f64, f64)> {
                // orthonormal columns: no norm correction needed
                // each message gets P/4 total, split evenly across its
                // exactly-nulled and partially-nulled blocks
                let mut v = Vec::with_capacity(k);
                for _ in 0..e {
                    v.push((1.0 / (8.0 * e as f64), b));
                }
                for _ in 0..acols {
                    v.push((1.0 / (8.0 * acols as f64), a));
                }
                v
            };
            let push_blend = |streams: &mut Vec<Stream>,
                              name: &'static str,
                              tx: usize,
                              rx: usize,
                              ex: &DMatrix<f64>,
                              pa: &DMatrix<f64>| {
                let t = hcat(ex, pa);
                if t.ncols() > 0 {
                    let vars = blend_vars(&t);
                    streams.push(Stream { name, tx, rx: Some(rx), precoder: t, col_vars: vars });
                }
            };
            push(&mut streams, "U1", 1, None, DMatrix::identity(m, m), 1.0 / (2.0 * m as f64), 1.0);
            push(&mut streams, "U2", 2, None, DMatrix::identity(m, m), 1.0 / (2.0 * m as f64), 1.0);
            push_blend(&mut streams, "D1", 1, 1, &psi1_e, &psi1_p);
            push_blend(&mut streams, "C1", 1, 2, &phi1_e, &phi1_p);
            push_blend(&mut streams, "D2", 2, 2, &psi2_e, &psi2_p);
            push_blend(&mut streams, "C2", 2, 1, &phi2_e, &phi2_p);
            filters.insert("psi1_exact".into(), psi1_e);
            filters.insert("psi1_partial".into(), psi1_p);
            filters.insert("phi1_exact".into(), phi1_e);
            filters.insert("phi1_partial".into(), phi1_p);
            filters.insert("psi2_exact".into(), psi2_e);
            filters.insert("psi2_partial".into(), psi2_p);
            filters.insert("phi2_exact".into(), phi2_e);
            filters.insert("phi2_partial".into(), phi2_p);
        }
    }

    Ok(SchemeSpec { family, m, n, a, b, dims, filters, streams, public_power_fraction })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CheckKind {
    /// Residual must stay below threshold (relative to the channel scale).
    Null,
    /// Smallest-to-largest singular value ratio must exceed threshold.
    FullRank,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionCheck {
    pub name: String,
    pub kind: CheckKind,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
}

fn null_check(name: &str, x: &DMatrix<f64>, scale: f64) -> ConditionCheck {
    let value = if x.ncols() == 0 || x.nrows() == 0 { 0.0 } else { x.amax() / scale };
    ConditionCheck { name: name.into(), kind: CheckKind::Null, value, threshold: 1e-10, pass: value <= 1e-10 }
}

fn rank_check(name: &str, x: &DMatrix<f64>) -> ConditionCheck {
    let (value, pass) = if x.ncols() == 0 || x.nrows() == 0 {
        (1.0, true) // vacuous
    } else {
        let sv = x.clone().singular_values();
        let smax = sv.max();
        let smin = sv.iter().cloned().fold(f64::INFINITY, f64::min);
        let ratio = if smax > 0.0 { smin / smax } else { 0.0 };
        // full rank requires as many singular values as min dimension
        let full = sv.len() == x.nrows().min(x.ncols());
        (ratio, full && ratio > 1e-8)
    };
    ConditionCheck { name: name.into(), kind: CheckKind::FullRank, value, threshold: 1e-8, pass }
}

/// Verifies every algebraic condition the family's construction promises:
/// exact nulls, full-rank effective matrices, and (for the transmit-side
/// Regime-1 scheme) the cross-filter rank property.
pub fn check_conditions(spec: &SchemeSpec, re: &ChannelRealization) -> Vec<ConditionCheck> {
    let s = re.max_abs();
    let f = |n: &str| spec.filters.get(n).expect("filter present");
    let mut out = Vec::new();
    match spec.family {
        Family::Type1R1 | Family::SimplifiedT1 => {
            out.push(null_check("psi1' H12", &(f("psi1").transpose() * &re.h12), s));
            out.push(null_check("psi2' H21", &(f("psi2").transpose() * &re.h21), s));
            if spec.family == Family::Type1R1 {
                let b1 = hcat(f("psi1"), f("psi1_tilde"));
                let b2 = hcat(f("psi2"), f("psi2_tilde"));
                out.push(rank_check("[psi1 psi1~]", &b1));
                out.push(rank_check("[psi2 psi2~]", &b2));
                out.push(rank_check("[psi1 psi1~]' H11", &(b1.transpose() * &re.h11)));
                out.push(rank_check("[psi2 psi2~]' H22", &(b2.transpose() * &re.h22)));
            } else {
                out.push(rank_check("psi1' H11", &(f("psi1").transpose() * &re.h11)));
                out.push(rank_check("psi2' H22", &(f("psi2").transpose() * &re.h22)));
            }
        }
        Family::Type1R2 => {
            out.push(null_check("psi1' H12", &(f("psi1").transpose() * &re.h12), s));
            out.push(null_check("psi2' H21", &(f("psi2").transpose() * &re.h21), s));
            out.push(null_check("phi1' H11", &(f("phi1").transpose() * &re.h11), s));
            out.push(null_check("phi2' H22", &(f("phi2").transpose() * &re.h22), s));
            out.push(rank_check("G1", f("G1")));
            out.push(rank_check("G2", f("G2")));
        }
        Family::Type2R1 => {
            out.push(null_check("H21 psi1", &(&re.h21 * f("psi1")), s));
            out.push(null_check("H12 psi2", &(&re.h12 * f("psi2")), s));
            out.push(null_check("H11 phi1", &(&re.h11 * f("phi1")), s));
            out.push(null_check("H22 phi2", &(&re.h22 * f("phi2")), s));
            out.push(null_check("theta1' H12 psi2~", &(f("theta1").transpose() * &re.h12 * f("psi2_tilde")), s));
            out.push(null_check("theta2' H21 psi1~", &(f("theta2").transpose() * &re.h21 * f("psi1_tilde")), s));
            out.push(rank_check("[psi1 psi1~]", &hcat(f("psi1"), f("psi1_tilde"))));
            out.push(rank_check("[psi2 psi2~]", &hcat(f("psi2"), f("psi2_tilde"))));
            out.push(rank_check(
                "theta1' H11 [psi1 psi1~]",
                &(f("theta1").transpose() * &re.h11 * hcat(f("psi1"), f("psi1_tilde"))),
            ));
            out.push(rank_check(
                "theta2' H22 [psi2 psi2~]",
                &(f("theta2").transpose() * &re.h22 * hcat(f("psi2"), f("psi2_tilde"))),
            ));
            out.push(rank_check("theta1' H12 phi2", &(f("theta1").transpose() * &re.h12 * f("phi2"))));
            out.push(rank_check("theta2' H21 phi1", &(f("theta2").transpose() * &re.h21 * f("phi1"))));
        }
        Family::Type2R2Hkia | Family::SimplifiedT2 => {
            out.push(null_check("H21 psi1", &(&re.h21 * f("psi1")), s));
            out.push(null_check("H11 phi1", &(&re.h11 * f("phi1")), s));
            out.push(null_check("H12 psi2", &(&re.h12 * f("psi2")), s));
            out.push(null_check("H22 phi2", &(&re.h22 * f("phi2")), s));
            out.push(rank_check("[H11 psi1, H12 phi2]", &hcat(&(&re.h11 * f("psi1")), &(&re.h12 * f("phi2")))));
            out.push(rank_check("[H22 psi2, H21 phi1]", &hcat(&(&re.h22 * f("psi2")), &(&re.h21 * f("phi1")))));
        }
        Family::HkiaLbT1 => {
            let [d_d1, d_c1, d_c2, d_d2] = spec.dims;
            let m1 = d_d1 + d_c1;
            let m2 = d_c2 + d_d2;
            let h11 = first_cols(&re.h11, m1);
            let h21 = first_cols(&re.h21, m1);
            let h12 = first_cols(&re.h12, m2);
            let h22 = first_cols(&re.h22, m2);
            out.push(null_check("psi1' H12^", &(f("psi1").transpose() * &h12), s));
            out.push(null_check("phi2' H22^", &(f("phi2").transpose() * &h22), s));
            out.push(null_check("psi2' H21^", &(f("psi2").transpose() * &h21), s));
            out.push(null_check("phi1' H11^", &(f("phi1").transpose() * &h11), s));
            out.push(rank_check("G1", f("G1")));
            out.push(rank_check("G2", f("G2")));
            let _ = (h11, h21);
        }
        Family::HkiaLbT2Blend => {
            let k = spec.m / 3;
            let rows_hat = spec.m - k;
            for (name, h, ex, pa) in [
                ("psi1", &re.h21, "psi1_exact", "psi1_partial"),
                ("phi1", &re.h11, "phi1_exact", "phi1_partial"),
                ("psi2", &re.h12, "psi2_exact", "psi2_partial"),
                ("phi2", &re.h22, "phi2_exact", "phi2_partial"),
            ] {
                out.push(null_check(&format!("H {name} exact"), &(h * f(ex)), s));
                out.push(null_check(
                    &format!("H^ {name} partial"),
                    &(first_rows(h, rows_hat) * f(pa)),
                    s,
                ));
                out.push(null_check(
                    &format!("{name} exact'partial"),
                    &(f(ex).transpose() * f(pa)),
                    1.0,
                ));
            }
            out.push(rank_check(
                "[H11 psi1, H12 phi2]",
                &hcat(
                    &(&re.h11 * hcat(f("psi1_exact"), f("psi1_partial"))),
                    &(&re.h12 * hcat(f("phi2_exact"), f("phi2_partial"))),
                ),
            ));
        }
    }
    out
}

/// The composed stream-to-observation matrix at one receiver in one state.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveChannel {
    pub stream: &'static str,
    pub tx: usize,
    pub rx: usize,
    pub desired: bool,
    pub matrix: DMatrix<f64>,
}

/// Per-state effective channels for every (stream, receiver) pair; off links
/// compose to the zero matrix.
pub fn effective_channels(
    spec: &SchemeSpec,
    re: &ChannelRealization,
    state: StateLabel,
) -> Vec<EffectiveChannel> {
    let mask = state_mask(state);
    let mut out = Vec::new();
    for rx in [1usize, 2] {
        for s in &spec.streams {
            // link index into the (S11, S12, S21, S22) mask
            let on = match (rx, s.tx) {
                (1, 1) => mask[0],
                (1, 2) => mask[1],
                (2, 1) => mask[2],
                (2, 2) => mask[3],
                _ => unreachable!(),
            };
            let h = re.h(rx, s.tx);
            let matrix = if on { h * &s.precoder } else { DMatrix::zeros(spec.n, s.dim()) };
            let desired = s.rx.map_or(true, |r| r == rx);
            out.push(EffectiveChannel { stream: s.name, tx: s.tx, rx, desired, matrix });
        }
    }
    out
}

/// Covariance of the received signal at `rx` in `state` at power `p`, given
/// (i.e. with the contributions removed of) the named streams.
pub fn received_covariance(
    spec: &SchemeSpec,
    re: &ChannelRealization,
    state: StateLabel,
    rx: usize,
    p: f64,
    conditioned: &[&str],
) -> Result<DMatrix<f64>, SchemeError> {
    for c in conditioned {
        if spec.stream(c).is_none() {
            return Err(SchemeError::UnknownStream((*c).into()));
        }
    }
    let mut k = DMatrix::identity(spec.n, spec.n);
    for ec in effective_channels(spec, re, state) {
        if ec.rx != rx || conditioned.contains(&ec.stream) {
            continue;
        }
        let s = spec.stream(ec.stream).expect("stream exists");
        for (j, (c, e)) in s.col_vars.iter().enumerate() {
            let col = ec.matrix.column(j);
            let var = c * p.powf(*e);
            k += var * &col * col.transpose();
        }
    }
    Ok(k)
}

/// Differential entropy of the received signal at `rx` in `state`, given the
/// conditioned streams.
pub fn received_entropy(
    spec: &SchemeSpec,
    re: &ChannelRealization,
    state: StateLabel,
    rx: usize,
    p: f64,
    conditioned: &[&str],
) -> Result<f64, SchemeError> {
    for c in conditioned {
        if spec.stream(c).is_none() {
            return Err(SchemeError::UnknownStream((*c).into()));
        }
    }
    // factor form: columns scaled by their standard deviations, so the
    // entropy stays accurate at arbitrarily high power
    let mut cols: Vec<nalgebra::DVector<f64>> = Vec::new();
    for ec in effective_channels(spec, re, state) {
        if ec.rx != rx || conditioned.contains(&ec.stream) {
            continue;
        }
        let s = spec.stream(ec.stream).expect("stream exists");
        for (j, (c, e)) in s.col_vars.iter().enumerate() {
            let sd = (c * p.powf(*e)).sqrt();
            cols.push(ec.matrix.column(j) * sd);
        }
    }
    let l = if cols.is_empty() {
        DMatrix::zeros(spec.n, 0)
    } else {
        DMatrix::from_columns(&cols)
    };
    Ok(entropy_from_factors(&l))
}
