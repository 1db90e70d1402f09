//! Closed-form sum-DoF quantities: the upper bound and its coefficient-triple
//! table, the tightness region, lower bounds, per-scheme achievable DoF,
//! optimal power exponents, and a consolidated report.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{
    classify, eta_eval, state_probs, triple, ChannelParams, Classification, EtaTriple, Regime,
};

#[derive(Debug, Error, PartialEq)]
pub enum BoundsError {
    #[error("parameters are not canonical (p_c > p_d); canonicalize first")]
    NonCanonical,
    #[error("parameter point outside the formula's domain: {0}")]
    OutOfDomain(String),
    #[error("unknown scheme family: {0}")]
    UnknownFamily(String),
    #[error("degenerate parameter point: {0}")]
    Degenerate(String),
}

fn require_canonical(params: &ChannelParams) -> Result<(), BoundsError> {
    if params.is_canonical() {
        Ok(())
    } else {
        Err(BoundsError::NonCanonical)
    }
}

/// Splits `x = 3k + q` with `q` in {0, 1, 2}.
pub fn split3(x: usize) -> (usize, usize) {
    (x / 3, x % 3)
}

/// The ratio weight `(3N - 2M) / (2N - M)` appearing in the tightness
/// condition for channels with more transmit than receive antennas.
/// Undefined when `2N = M`.
pub fn alpha(m: usize, n: usize) -> Option<f64> {
    if 2 * n == m {
        None
    } else {
        Some((3.0 * n as f64 - 2.0 * m as f64) / (2.0 * n as f64 - m as f64))
    }
}

/// Sum-DoF upper bound, evaluated from the regime-dependent closed form.
pub fn eta_ub(params: &ChannelParams) -> Result<f64, BoundsError> {
    require_canonical(params)?;
    let c = classify(params).map_err(|_| BoundsError::NonCanonical)?;
    let (m, n) = (params.m as f64, params.n as f64);
    let min_2m_n = (2.0 * m).min(n);
    let min_m_2n = m.min(2.0 * n);
    let min_m_n = m.min(n);
    let (p_d, p_c, p_cd) = (params.p_d, params.p_c, params.p_cd);
    let val = match c.regime {
        Regime::Regime1 => {
            2.0 * (p_cd * min_2m_n + p_c * min_m_2n + (p_d - p_c - 2.0 * p_cd) * min_m_n)
        }
        Regime::Regime2 => {
            2.0 * ((p_d - p_c) * min_2m_n
                + (p_d - p_cd) * min_m_2n
                + (p_cd - 2.0 * p_d + 2.0 * p_c) * min_m_n)
        }
    };
    Ok(val)
}

/// The upper bound as a coefficient triple (the tabulated per-ratio forms,
/// already scaled by 2 for the two receivers).
pub fn ub_triple(m: usize, n: usize, regime: Regime) -> EtaTriple {
    let (mf, nf) = (m as f64, n as f64);
    if m <= n {
        // more receive antennas (or square)
        if 2 * m <= n {
            triple(mf, mf, 0.0).scale(2.0)
        } else {
            match regime {
                Regime::Regime1 => triple(nf - mf, mf, 0.0).scale(2.0),
                Regime::Regime2 => triple(mf, nf - mf, 2.0 * mf - nf).scale(2.0),
            }
        }
    } else {
        // more transmit antennas
        if 2 * n <= m {
            triple(nf, nf, nf).scale(2.0)
        } else {
            match regime {
                Regime::Regime1 => triple(mf - nf, nf, mf - nf).scale(2.0),
                Regime::Regime2 => triple(nf, mf - nf, nf).scale(2.0),
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tightness {
    pub tight: bool,
    pub reason: String,
}

/// Whether the upper bound is known to be achievable at this point.
///
/// Not tight iff either (i) 2/3 < M/N <= 1 and the burstiness point lies
/// strictly above the regime boundary, or (ii) 2/3 < N/M <= 1 and it lies
/// strictly above the alpha-weighted boundary. Both tests are done
/// division-free.
pub fn tightness(params: &ChannelParams) -> Result<Tightness, BoundsError> {
    require_canonical(params)?;
    let (m, n) = (params.m, params.n);
    let (p_d, p_c, p_cd) = (params.p_d, params.p_c, params.p_cd);
    // clause (i): 2/3 < M/N <= 1 and p_c / p_d > 1 / (1 + p_dgc),
    // i.e. p_c + p_cd > p_d
    if m <= n && 3 * m > 2 * n && p_c + p_cd > p_d {
        return Ok(Tightness {
            tight: false,
            reason: "exception (i): 2/3 < M/N <= 1 above the regime boundary".into(),
        });
    }
    // clause (ii): 2/3 < N/M <= 1 and p_c / p_d > 1 / (1 + alpha * p_dgc),
    // i.e. p_c * (2N - M) + (3N - 2M) * p_cd > p_d * (2N - M)
    if n < m && 3 * n > 2 * m {
        let w = (2 * n - m) as f64;
        if p_c * w + (3 * n as i64 - 2 * m as i64) as f64 * p_cd > p_d * w {
            return Ok(Tightness {
                tight: false,
                reason: "exception (ii): 2/3 < N/M <= 1 above the alpha-weighted boundary".into(),
            });
        }
    }
    Ok(Tightness { tight: true, reason: "outside both exception regions".into() })
}

/// Lower bound on the sum DoF for channels with more receive antennas
/// (exception region i), N = 3k + q.
fn eta_lb_more_rx(params: &ChannelParams) -> f64 {
    let (m, n) = (params.m as f64, params.n as f64);
    let (k, q) = split3(params.n);
    let (kf, qf) = (k as f64, q as f64);
    let (p_d, p_c, p_cd) = (params.p_d, params.p_c, params.p_cd);
    // branch test p_c + beta1 * p_cd <= p_d with
    // beta1 = (2M - 4k - q) / (2k + q), division-free
    let denom = 2.0 * kf + qf;
    let beta1_num = 2.0 * m - 4.0 * kf - qf;
    if p_c * denom + beta1_num * p_cd <= p_d * denom {
        eta_eval(&triple(4.0 * kf + qf, 2.0 * kf + qf, 2.0 * m - 2.0 * kf - qf), params)
    } else {
        let qh = (q + 1) / 2; // ceil(q / 2)
        let ql = q / 2;
        let num = eta_eval(&triple(2.0 * m - n, -m, m), params);
        let den = eta_eval(
            &triple(2.0 * m - n, -(2.0 * kf + qh as f64), 2.0 * kf + qh as f64),
            params,
        );
        let base = eta_eval(&triple(n, m, m), params);
        let step = eta_eval(&triple(kf, ql as f64, -(ql as f64)), params);
        base + step * num / den
    }
}

/// Lower bound for channels with more transmit antennas (exception region
/// ii), M = 3k + q.
fn eta_lb_more_tx(params: &ChannelParams) -> f64 {
    let m = params.m as f64;
    let (k, q) = split3(params.m);
    let (kf, qf) = (k as f64, q as f64);
    let (p_d, p_c, p_cd) = (params.p_d, params.p_c, params.p_cd);
    // branch test p_c + beta2 * p_cd <= p_d with beta2 = q / (k + q)
    let denom = kf + qf;
    if p_c * denom + qf * p_cd <= p_d * denom {
        let ratio =
            eta_eval(&triple(1.0, -1.0, 1.0), params) / eta_eval(&triple(3.0, -2.0, 2.0), params);
        m * (eta_eval(&triple(1.0, 1.0, 1.0), params)
            + eta_eval(&triple(1.0, 0.0, 0.0), params) * ratio)
    } else {
        m * eta_eval(&triple(1.0, 1.0, 1.0), params)
            + kf * eta_eval(&triple(1.0, 0.0, 0.0), params)
    }
}

/// Sum-DoF lower bound: equals the upper bound wherever it is tight, and the
/// rate-splitting scheme values inside the two exception regions.
pub fn eta_lb(params: &ChannelParams) -> Result<f64, BoundsError> {
    require_canonical(params)?;
    let t = tightness(params)?;
    if t.tight {
        return eta_ub(params);
    }
    if params.m <= params.n {
        Ok(eta_lb_more_rx(params))
    } else {
        Ok(eta_lb_more_tx(params))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prop1Dof {
    pub eta_priv: f64,
    pub eta_pub: f64,
    pub eta_total: f64,
}

/// Private/public/total DoF of the rate-splitting scheme for channels with
/// more transmit antennas (1/2 < N/M <= 1).
pub fn prop1_dof(params: &ChannelParams) -> Result<Prop1Dof, BoundsError> {
    require_canonical(params)?;
    let (m, n) = (params.m, params.n);
    if n > m || 2 * n <= m {
        return Err(BoundsError::OutOfDomain(format!(
            "needs 1/2 < N/M <= 1, got N={n}, M={m}"
        )));
    }
    let (mf, nf) = (m as f64, n as f64);
    let (eta_priv, eta_pub) = if 3 * n <= 2 * m {
        // 1/2 < N/M <= 2/3
        (
            eta_eval(&triple(nf, mf - nf, mf - nf).scale(2.0), params),
            eta_eval(&triple(0.0, 0.0, 2.0 * nf - mf).scale(2.0), params),
        )
    } else {
        // 2/3 < N/M <= 1: requires p_c <= p_d / (1 + alpha * p_dgc)
        let w = (2 * n - m) as f64;
        if params.p_c * w + (3 * n as i64 - 2 * m as i64) as f64 * params.p_cd > params.p_d * w {
            return Err(BoundsError::OutOfDomain(
                "burstiness above the alpha-weighted boundary; the scheme's public \
                 region collapses"
                    .into(),
            ));
        }
        (
            eta_eval(&triple(2.0, 1.0, 1.0).scale(2.0 * (mf - nf)), params),
            eta_eval(&triple(3.0 * nf - 2.0 * mf, 0.0, 2.0 * nf - mf).scale(2.0), params),
        )
    };
    Ok(Prop1Dof { eta_priv, eta_pub, eta_total: eta_priv + eta_pub })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prop2Result {
    /// Optimal partial-null power exponent; `None` when the partial block is
    /// empty and the scheme degenerates to the pure rate-splitting one.
    pub a_opt: Option<f64>,
    pub b_opt: f64,
    pub eta_total: f64,
    pub k: usize,
    pub q: usize,
    pub beta2: f64,
}

/// Optimal exponents and total DoF of the blended exact/partial-null scheme
/// (more transmit antennas, 2/3 < N/M <= 1, above the alpha-weighted
/// boundary).
pub fn prop2(params: &ChannelParams) -> Result<Prop2Result, BoundsError> {
    require_canonical(params)?;
    let (m, n) = (params.m, params.n);
    if n > m || 3 * n <= 2 * m {
        return Err(BoundsError::OutOfDomain(format!(
            "needs 2/3 < N/M <= 1, got N={n}, M={m}"
        )));
    }
    let gate = triple(
        (3 * n) as f64 - (2 * m) as f64,
        m as f64 - (2 * n) as f64,
        (2 * n) as f64 - m as f64,
    );
    if eta_eval(&gate, params) <= 0.0 {
        return Err(BoundsError::OutOfDomain(
            "below the alpha-weighted boundary; exponent blending is not needed".into(),
        ));
    }
    let (k, q) = split3(m);
    let beta2 = q as f64 / (k + q) as f64;
    let a_cols = k as i64 - (m as i64 - n as i64);
    if a_cols < 0 {
        return Err(BoundsError::Degenerate("partial-null block has negative size".into()));
    }
    if a_cols == 0 {
        let total = eta_eval(&ub_triple(m, n, Regime::Regime2), params);
        return Ok(Prop2Result { a_opt: None, b_opt: 1.0, eta_total: total, k, q, beta2 });
    }
    // branch by p_c + beta2 * p_cd <= p_d, division-free
    let denom = (k + q) as f64;
    let first_branch = params.p_c * denom + q as f64 * params.p_cd <= params.p_d * denom;
    let a_opt = if first_branch {
        let num = eta_eval(&gate, params);
        let den = a_cols as f64 * eta_eval(&triple(3.0, -2.0, 2.0), params);
        (num / den).clamp(0.0, 1.0)
    } else {
        1.0
    };
    let eta_total = eta_lb_more_tx(params);
    Ok(Prop2Result { a_opt: Some(a_opt), b_opt: 1.0, eta_total, k, q, beta2 })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prop3Result {
    pub a_opt: f64,
    pub eta_total: f64,
    pub k: usize,
    pub q: usize,
    pub beta1: f64,
}

/// Optimal exponent and total DoF of the partial-power scheme for channels
/// with more receive antennas (2/3 < M/N <= 1, Regime 2).
pub fn prop3(params: &ChannelParams) -> Result<Prop3Result, BoundsError> {
    require_canonical(params)?;
    let (m, n) = (params.m, params.n);
    if m > n || 3 * m <= 2 * n {
        return Err(BoundsError::OutOfDomain(format!(
            "needs 2/3 < M/N <= 1, got M={m}, N={n}"
        )));
    }
    let c = classify(params).map_err(|_| BoundsError::NonCanonical)?;
    if c.regime != Regime::Regime2 {
        return Err(BoundsError::OutOfDomain("needs Regime 2".into()));
    }
    let (k, q) = split3(n);
    let beta1 = (2.0 * m as f64 - (4 * k + q) as f64) / (2 * k + q) as f64;
    let denom = (2 * k + q) as f64;
    let first_branch =
        params.p_c * denom + (2.0 * m as f64 - (4 * k + q) as f64) * params.p_cd
            <= params.p_d * denom;
    let a_opt = if first_branch {
        1.0
    } else {
        let qh = ((q + 1) / 2) as f64;
        let num = eta_eval(&triple(2.0 * m as f64 - n as f64, -(m as f64), m as f64), params);
        let den = eta_eval(
            &triple(2.0 * m as f64 - n as f64, -(2.0 * k as f64 + qh), 2.0 * k as f64 + qh),
            params,
        );
        if den.abs() < 1e-300 {
            return Err(BoundsError::Degenerate("exponent denominator vanishes".into()));
        }
        (num / den).clamp(0.0, 1.0)
    };
    let eta_total = eta_lb_more_rx(params);
    Ok(Prop3Result { a_opt, eta_total, k, q, beta1 })
}

/// Closed-form achievable DoF of a named beamforming/rate-splitting family.
pub fn inbf_dof(params: &ChannelParams, family: &str) -> Result<f64, BoundsError> {
    require_canonical(params)?;
    let (m, n) = (params.m, params.n);
    let (mf, nf) = (m as f64, n as f64);
    let t = match family {
        "type1_r1" => {
            if m > n || 2 * m < n {
                return Err(BoundsError::OutOfDomain("type1_r1 needs 1/2 <= M/N <= 1".into()));
            }
            triple(nf - mf, mf, 0.0).scale(2.0)
        }
        "type1_r2" => {
            if m > n || 2 * m <= n || 3 * m > 2 * n {
                return Err(BoundsError::OutOfDomain("type1_r2 needs 1/2 < M/N <= 2/3".into()));
            }
            triple(mf, nf - mf, 2.0 * mf - nf).scale(2.0)
        }
        "type2_r1" => {
            if n > m || 2 * n <= m {
                return Err(BoundsError::OutOfDomain("type2_r1 needs 1/2 < N/M <= 1".into()));
            }
            triple(mf - nf, nf, mf - nf).scale(2.0)
        }
        "type2_r2_inbf" => {
            if n > m || 2 * n <= m {
                return Err(BoundsError::OutOfDomain("type2_r2_inbf needs 1/2 < N/M <= 1".into()));
            }
            if 3 * n <= 2 * m {
                triple(nf, mf - nf, mf - nf).scale(2.0)
            } else {
                triple(2.0, 1.0, 1.0).scale(2.0 * (mf - nf))
            }
        }
        "simplified" => {
            if 2 * m <= n {
                triple(mf, mf, 0.0).scale(2.0)
            } else if 2 * n <= m {
                triple(nf, nf, nf).scale(2.0)
            } else {
                return Err(BoundsError::OutOfDomain(
                    "simplified scheme needs a ratio at or below 1/2".into(),
                ));
            }
        }
        "no_crosslink_baseline" => {
            return Ok(2.0 * mf.min(nf) * params.p_d);
        }
        "nonbursty_ia_baseline" => nonbursty_ia_triple(m, n),
        other => return Err(BoundsError::UnknownFamily(other.into())),
    };
    Ok(eta_eval(&t, params))
}

/// The interference-alignment baseline designed for the always-on channel,
/// evaluated under burstiness.
pub fn nonbursty_ia_triple(m: usize, n: usize) -> EtaTriple {
    let (mf, nf) = (m as f64, n as f64);
    if m <= n {
        if 2 * m <= n {
            triple(mf, mf, 0.0).scale(2.0)
        } else {
            triple(mf, nf - mf, 2.0 * mf - nf).scale(2.0)
        }
    } else if 2 * n <= m {
        triple(nf, nf, nf).scale(2.0)
    } else if 3 * n <= 2 * m {
        triple(nf, mf - nf, mf - nf).scale(2.0)
    } else {
        triple(2.0, 1.0, 1.0).scale(2.0 * (mf - nf))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DofReport {
    pub m: usize,
    pub n: usize,
    pub p_d: f64,
    pub p_c: f64,
    pub p_cd: f64,
    pub eta_ub: f64,
    pub eta_lb: f64,
    pub tight: bool,
    pub tight_reason: String,
    pub classification: Classification,
    /// `(3N - 2M) / (2N - M)`; `None` when `2N = M`.
    pub alpha: Option<f64>,
    pub per_scheme: BTreeMap<String, f64>,
    pub gap: f64,
}

/// Consolidated report for one parameter point (auto-canonicalizes).
pub fn report(params: &ChannelParams) -> DofReport {
    let p = crate::model::canonicalize(params);
    let classification = classify(&p).expect("canonical");
    let ub = eta_ub(&p).expect("canonical");
    let lb = eta_lb(&p).expect("canonical");
    let t = tightness(&p).expect("canonical");
    let mut per_scheme = BTreeMap::new();
    per_scheme.insert("ia".to_string(), eta_eval(&nonbursty_ia_triple(p.m, p.n), &p));
    per_scheme.insert("hkia".to_string(), lb);
    per_scheme
        .insert("no_crosslink".to_string(), inbf_dof(&p, "no_crosslink_baseline").unwrap());
    for fam in ["type1_r1", "type1_r2", "type2_r1", "type2_r2_inbf", "simplified"] {
        if let Ok(v) = inbf_dof(&p, fam) {
            per_scheme.insert(fam.to_string(), v);
        }
    }
    DofReport {
        m: p.m,
        n: p.n,
        p_d: p.p_d,
        p_c: p.p_c,
        p_cd: p.p_cd,
        eta_ub: ub,
        eta_lb: lb,
        tight: t.tight,
        tight_reason: t.reason,
        classification,
        alpha: alpha(p.m, p.n),
        per_scheme,
        gap: ub - lb,
    }
}

/// State-probability shorthand used in a few tests and the verifier.
pub fn probs_tuple(params: &ChannelParams) -> (f64, f64, f64) {
    let sp = state_probs(params);
    (sp.p_cd, sp.p_cbar_d, sp.p_c_dbar)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{make_params, make_params_joint};

    #[test]
    fn ub_worked_values() {
        let p = make_params_joint(2, 3, 0.7, 0.3, 0.15).unwrap();
        assert!((eta_ub(&p).unwrap() - 2.5).abs() < 1e-12);
        assert!(
            (eta_eval(&ub_triple(2, 3, Regime::Regime1), &p) - 2.5).abs() < 1e-12
        );

        let p = make_params(3, 2, 0.7, 0.5, 0.9).unwrap();
        assert!((eta_ub(&p).unwrap() - 2.5).abs() < 1e-12);
        assert!((eta_eval(&triple(2.0, 1.0, 2.0).scale(2.0), &p) - 2.5).abs() < 1e-12);

        let p = make_params(5, 4, 0.6, 0.0, 0.3).unwrap();
        assert!((eta_ub(&p).unwrap() - 2.0 * 4.0 * 0.6).abs() < 1e-12);
    }

    #[test]
    fn ub_matches_triple_table_on_grid() {
        for m in 1..=12 {
            for n in 1..=12 {
                for pd10 in 0..=10 {
                    for pc10 in 0..=pd10 {
                        let p_d = pd10 as f64 / 10.0;
                        let p_c = pc10 as f64 / 10.0;
                        let p_cd = 0.5 * p_c.min(p_d);
                        let Ok(p) = make_params_joint(m, n, p_d, p_c, p_cd) else {
                            continue; // negative all-off probability
                        };
                        let regime = classify(&p).unwrap().regime;
                        let a = eta_ub(&p).unwrap();
                        let b = eta_eval(&ub_triple(m, n, regime), &p);
                        assert!((a - b).abs() < 1e-12, "M={m} N={n} {a} vs {b}");
                    }
                }
            }
        }
    }

    #[test]
    fn ub_continuous_at_regime_boundary() {
        // on the boundary p_c + p_cd = p_d the two branches agree
        for (m, n) in [(3, 2), (2, 3), (4, 4), (7, 5), (5, 7)] {
            let (p_c, p_cd) = (0.4, 0.2);
            let p_d = p_c + p_cd;
            let p = make_params_joint(m, n, p_d, p_c, p_cd).unwrap();
            let r1 = eta_eval(&ub_triple(m, n, Regime::Regime1), &p);
            let r2 = eta_eval(&ub_triple(m, n, Regime::Regime2), &p);
            assert!((r1 - r2).abs() < 1e-12, "M={m} N={n}: {r1} vs {r2}");
        }
    }

    #[test]
    fn square_entries_agree() {
        let p = make_params(4, 4, 0.8, 0.5, 0.6).unwrap();
        let t1 = triple(4.0, 0.0, 4.0).scale(2.0); // more-rx form at M=N, regime 2
        let t2 = triple(4.0, 0.0, 4.0).scale(2.0); // more-tx form at M=N
        assert!((eta_eval(&t1, &p) - eta_eval(&t2, &p)).abs() < 1e-15);
        assert_eq!(ub_triple(4, 4, Regime::Regime2), t2);
    }

    #[test]
    fn tightness_examples() {
        let p = make_params(3, 2, 0.7, 0.5, 0.9).unwrap();
        assert!(tightness(&p).unwrap().tight); // N/M = 2/3 exactly

        let p = make_params(2, 2, 0.7, 0.5, 0.7).unwrap();
        let t = tightness(&p).unwrap();
        assert!(!t.tight);
        assert!(t.reason.contains("(i)"));

        let p = make_params(2, 3, 0.7, 0.3, 0.5).unwrap(); // Regime 1
        assert!(tightness(&p).unwrap().tight);
    }

    #[test]
    fn lb_worked_values() {
        // more-tx exception, first branch
        let p = make_params(6, 5, 0.7, 0.6, 0.9).unwrap();
        assert!((eta_lb(&p).unwrap() - 5.563943661971831).abs() < 1e-9);

        // more-tx exception, second branch
        let p = make_params(7, 6, 0.7, 0.6, 0.9).unwrap();
        assert!((eta_lb(&p).unwrap() - 6.40).abs() < 1e-12);

        // more-rx exception, first branch
        let p = make_params(5, 6, 0.7, 0.45, 0.9).unwrap();
        assert!((eta_lb(&p).unwrap() - 4.69).abs() < 1e-12);

        // more-rx exception, second branch at M=N
        let p = make_params(3, 3, 0.7, 0.5, 0.9).unwrap();
        assert!((eta_ub(&p).unwrap() - 3.0).abs() < 1e-12);
        assert!((eta_lb(&p).unwrap() - (2.25 + 0.45 * 0.75 / 0.95)).abs() < 1e-12);
    }

    #[test]
    fn lb_never_exceeds_ub_on_grid() {
        for m in 1..=9 {
            for n in 1..=9 {
                for pd10 in 1..=10 {
                    for pc10 in 0..=pd10 {
                        let p_d = pd10 as f64 / 10.0;
                        let p_c = pc10 as f64 / 10.0;
                        for pj in [0.0, 0.3, 0.7, 1.0] {
                            let p_cd = pj * p_c.min(p_d);
                            let Ok(p) = make_params_joint(m, n, p_d, p_c, p_cd) else {
                                continue; // negative all-off probability
                            };
                            let ub = eta_ub(&p).unwrap();
                            let lb = eta_lb(&p).unwrap();
                            assert!(lb <= ub + 1e-9, "M={m} N={n} lb {lb} > ub {ub}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn prop1_worked_values() {
        let p = make_params(3, 2, 0.7, 0.5, 0.9).unwrap();
        let d = prop1_dof(&p).unwrap();
        assert!((d.eta_priv - 2.4).abs() < 1e-12);
        assert!((d.eta_pub - 0.1).abs() < 1e-12);
        assert!((d.eta_total - 2.5).abs() < 1e-12);
        assert!(
            (d.eta_total - eta_eval(&ub_triple(3, 2, Regime::Regime2), &p)).abs() < 1e-12
        );

        // p_cd = p_c: the cross-only state vanishes, public DoF is 0
        let p = make_params(3, 2, 0.7, 0.5, 1.0).unwrap();
        assert!(prop1_dof(&p).unwrap().eta_pub.abs() < 1e-15);
    }

    #[test]
    fn prop1_out_of_domain() {
        let p = make_params(4, 1, 0.7, 0.5, 0.9).unwrap();
        assert!(prop1_dof(&p).is_err());
        // case (ii) probability condition fails
        let p = make_params(6, 5, 0.7, 0.6, 0.9).unwrap();
        assert!(matches!(prop1_dof(&p), Err(BoundsError::OutOfDomain(_))));
    }

    #[test]
    fn prop2_worked_value() {
        let p = make_params(6, 5, 0.7, 0.6, 0.9).unwrap();
        let r = prop2(&p).unwrap();
        assert!((r.a_opt.unwrap() - 1.22 / 1.42).abs() < 1e-12);
        assert!((r.eta_total - 5.563943661971831).abs() < 1e-9);
        assert_eq!((r.k, r.q), (2, 0));
        assert_eq!(r.b_opt, 1.0);
    }

    #[test]
    fn prop2_out_of_domain_below_boundary() {
        let p = make_params(6, 5, 0.7, 0.3, 0.5).unwrap();
        assert!(prop2(&p).is_err());
    }

    #[test]
    fn prop3_worked_values() {
        let p = make_params(5, 6, 0.7, 0.6, 0.9).unwrap();
        let r = prop3(&p).unwrap();
        assert!((r.a_opt - 1.66 / 1.76).abs() < 1e-12);
        assert!((r.eta_total - 5.358636363636364).abs() < 1e-9);
        assert_eq!((r.k, r.q), (2, 0));

        // first branch: a_opt = 1, total 2<2k, k, M-k>
        let p = make_params(5, 6, 0.7, 0.45, 0.9).unwrap();
        let r = prop3(&p).unwrap();
        assert_eq!(r.a_opt, 1.0);
        assert!(
            (r.eta_total - eta_eval(&triple(4.0, 2.0, 3.0).scale(2.0), &p)).abs() < 1e-12
        );
    }

    #[test]
    fn inbf_anchor_values() {
        let p = make_params(3, 2, 0.7, 0.5, 0.9).unwrap();
        assert!((inbf_dof(&p, "nonbursty_ia_baseline").unwrap() - 2.4).abs() < 1e-12);

        let p = make_params(3, 1, 0.7, 0.5, 0.9).unwrap();
        let v = inbf_dof(&p, "simplified").unwrap();
        assert!((v - 2.0 * (p.p_d + p.p_c - p.p_cd)).abs() < 1e-12);

        let p = make_params(1, 3, 0.7, 0.5, 0.9).unwrap();
        assert!(
            (inbf_dof(&p, "nonbursty_ia_baseline").unwrap() - 2.0 * p.p_d).abs() < 1e-12
        );
        assert!((inbf_dof(&p, "no_crosslink_baseline").unwrap() - 2.0 * p.p_d).abs() < 1e-12);

        assert!(matches!(inbf_dof(&p, "nope"), Err(BoundsError::UnknownFamily(_))));
    }

    #[test]
    fn contrasts() {
        for pc10 in 1..=7 {
            let p_c = pc10 as f64 / 10.0;
            for pj in [0.0, 0.4, 0.9] {
                let p_cd = pj * p_c;
                if p_cd < 0.7 + p_c - 1.0 {
                    continue; // negative all-off probability
                }
                let p31 = make_params_joint(3, 1, 0.7, p_c, p_cd).unwrap();
                let p13 = make_params_joint(1, 3, 0.7, p_c, p_cd).unwrap();
                // non-reciprocity
                let diff = eta_ub(&p31).unwrap() - eta_ub(&p13).unwrap();
                assert!((diff - 2.0 * (p_c - p_cd)).abs() < 1e-12);
                // cross-links help the 3x1 channel by the same amount
                let gain = inbf_dof(&p31, "simplified").unwrap()
                    - inbf_dof(&p31, "no_crosslink_baseline").unwrap();
                assert!((gain - 2.0 * (p_c - p_cd)).abs() < 1e-12);
                // rate splitting beats the always-on baseline on 3x2
                let p32 = make_params_joint(3, 2, 0.7, p_c, p_cd).unwrap();
                let hk = prop1_dof(&p32).unwrap().eta_total;
                let ia = inbf_dof(&p32, "nonbursty_ia_baseline").unwrap();
                assert!((hk - ia - 2.0 * (p_c - p_cd)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn no_saturation_in_regime1() {
        // Regime-1 upper bound strictly increases in M past 2N/3 when the
        // direct-only state is more likely than the both-on state
        let n = 9;
        let p_d = 0.8;
        let p_c = 0.3;
        let p_cd = 0.1; // p_cbar_d = 0.7 > p_cd
        let mut prev = None;
        for m in (2 * n / 3 + 1)..=n {
            let p = make_params_joint(m, n, p_d, p_c, p_cd).unwrap();
            assert_eq!(classify(&p).unwrap().regime, Regime::Regime1);
            let v = eta_ub(&p).unwrap();
            if let Some(pv) = prev {
                assert!(v > pv + 1e-12, "M={m}: {v} vs {pv}");
            }
            prev = Some(v);
        }
    }

    #[test]
    fn report_worked_values() {
        let p = make_params(3, 2, 0.7, 0.5, 0.9).unwrap();
        let r = report(&p);
        assert!((r.eta_ub - 2.5).abs() < 1e-12);
        assert!((r.eta_lb - 2.5).abs() < 1e-12);
        assert!(r.tight);
        assert!((r.per_scheme["ia"] - 2.4).abs() < 1e-12);
        assert!((r.per_scheme["hkia"] - 2.5).abs() < 1e-12);

        let p = make_params(3, 3, 0.7, 0.5, 0.9).unwrap();
        let r = report(&p);
        assert!(!r.tight);
        assert!((r.eta_ub - 3.0).abs() < 1e-12);
        assert!((r.eta_lb - 2.605263157894737).abs() < 1e-9);

        let p = make_params(2, 5, 1.0, 1.0, 1.0).unwrap();
        let r = report(&p);
        assert!((r.eta_ub - 4.0).abs() < 1e-12);
        assert!((r.eta_lb - 4.0).abs() < 1e-12);
    }

    #[test]
    fn report_canonicalizes() {
        let p = make_params_joint(3, 2, 0.3, 0.7, 0.15).unwrap();
        let r = report(&p);
        assert_eq!((r.p_d, r.p_c), (0.7, 0.3));
    }
}
