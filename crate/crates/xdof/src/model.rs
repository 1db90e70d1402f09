//! Channel parameters, derived state probabilities, coefficient-triple
//! algebra, regime/type classification, the contracted 5-state reduction,
//! and deterministic state-sequence sampling.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("probability out of range: {name} = {value}")]
    ProbabilityRange { name: &'static str, value: f64 },
    #[error("joint on-probability exceeds direct-link probability: p_cd = {p_cd} > p_d = {p_d}")]
    JointExceedsDirect { p_cd: f64, p_d: f64 },
    #[error("off-state probability is negative: 1 - p_d - p_c + p_cd = {p_off} (need p_cd >= p_d + p_c - 1)")]
    NegativeOffState { p_off: f64 },
    #[error("antenna counts must be at least 1 (got M={m}, N={n})")]
    ZeroAntennas { m: usize, n: usize },
    #[error("parameters are not canonical (p_c = {p_c} > p_d = {p_d}); canonicalize first")]
    NonCanonical { p_c: f64, p_d: f64 },
}

/// Antenna counts and link on-probabilities for the symmetric bursty X channel.
///
/// Internally stores the joint probability `p_cd` (both the direct and cross
/// link into a receiver simultaneously on); the conditional probability given
/// a cross-link is an input convenience only.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    /// Transmit antennas per transmitter.
    pub m: usize,
    /// Receive antennas per receiver.
    pub n: usize,
    /// Direct-link on probability.
    pub p_d: f64,
    /// Cross-link on probability.
    pub p_c: f64,
    /// Joint probability that the direct and cross link into a receiver are
    /// both on.
    pub p_cd: f64,
}

fn check_prob(name: &'static str, value: f64) -> Result<(), ModelError> {
    if !(0.0..=1.0).contains(&value) || !value.is_finite() {
        return Err(ModelError::ProbabilityRange { name, value });
    }
    Ok(())
}

/// Builds validated channel parameters. `p_dgc` is the probability that the
/// direct link is on given the cross link is on; it is converted immediately
/// to the joint probability `p_cd = p_c * p_dgc`. When `p_c = 0` the
/// conditional is irrelevant and `p_cd` is fixed to 0.
pub fn make_params(
    m: usize,
    n: usize,
    p_d: f64,
    p_c: f64,
    p_dgc: f64,
) -> Result<ChannelParams, ModelError> {
    if m == 0 || n == 0 {
        return Err(ModelError::ZeroAntennas { m, n });
    }
    check_prob("p_d", p_d)?;
    check_prob("p_c", p_c)?;
    check_prob("p_dgc", p_dgc)?;
    let p_cd = if p_c == 0.0 { 0.0 } else { p_c * p_dgc };
    if p_cd > p_d {
        return Err(ModelError::JointExceedsDirect { p_cd, p_d });
    }
    let p_off = 1.0 - p_d - p_c + p_cd;
    if p_off < -1e-15 {
        return Err(ModelError::NegativeOffState { p_off });
    }
    Ok(ChannelParams { m, n, p_d, p_c, p_cd })
}

/// Builds parameters directly from the joint probability `p_cd`.
pub fn make_params_joint(
    m: usize,
    n: usize,
    p_d: f64,
    p_c: f64,
    p_cd: f64,
) -> Result<ChannelParams, ModelError> {
    if m == 0 || n == 0 {
        return Err(ModelError::ZeroAntennas { m, n });
    }
    check_prob("p_d", p_d)?;
    check_prob("p_c", p_c)?;
    check_prob("p_cd", p_cd)?;
    if p_cd > p_d || p_cd > p_c {
        return Err(ModelError::JointExceedsDirect { p_cd, p_d: p_d.min(p_c) });
    }
    let p_off = 1.0 - p_d - p_c + p_cd;
    if p_off < -1e-15 {
        return Err(ModelError::NegativeOffState { p_off });
    }
    Ok(ChannelParams { m, n, p_d, p_c, p_cd })
}

impl ChannelParams {
    /// Conditional probability that the direct link is on given the cross
    /// link is on (0 when there is no cross link).
    pub fn p_dgc(&self) -> f64 {
        if self.p_c == 0.0 {
            0.0
        } else {
            self.p_cd / self.p_c
        }
    }

    pub fn is_canonical(&self) -> bool {
        self.p_c <= self.p_d
    }
}

/// The four joint on/off probabilities of (direct, cross) at one receiver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StateProbs {
    /// Both links on.
    pub p_cd: f64,
    /// Direct on, cross off.
    pub p_cbar_d: f64,
    /// Cross on, direct off.
    pub p_c_dbar: f64,
    /// Both links off.
    pub p_off: f64,
}

pub fn state_probs(params: &ChannelParams) -> StateProbs {
    StateProbs {
        p_cd: params.p_cd,
        p_cbar_d: params.p_d - params.p_cd,
        p_c_dbar: params.p_c - params.p_cd,
        p_off: 1.0 - params.p_d - params.p_c + params.p_cd,
    }
}

/// A coefficient triple over the three active per-receiver link states:
/// (both on, direct only, cross only). Evaluation against the state
/// probabilities yields a scalar DoF value; the algebra is linear.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EtaTriple {
    pub c_cd: f64,
    pub c_cbd: f64,
    pub c_cdb: f64,
}

impl EtaTriple {
    pub const ZERO: EtaTriple = EtaTriple { c_cd: 0.0, c_cbd: 0.0, c_cdb: 0.0 };

    pub fn new(c_cd: f64, c_cbd: f64, c_cdb: f64) -> Self {
        EtaTriple { c_cd, c_cbd, c_cdb }
    }

    pub fn scale(&self, s: f64) -> Self {
        EtaTriple::new(s * self.c_cd, s * self.c_cbd, s * self.c_cdb)
    }
}

/// Shorthand constructor for a coefficient triple.
pub fn triple(c_cd: f64, c_cbd: f64, c_cdb: f64) -> EtaTriple {
    EtaTriple::new(c_cd, c_cbd, c_cdb)
}

/// Evaluates a coefficient triple to a scalar:
/// `c_cd * p_cd + c_cbd * (p_d - p_cd) + c_cdb * (p_c - p_cd)`.
pub fn eta_eval(t: &EtaTriple, params: &ChannelParams) -> f64 {
    let sp = state_probs(params);
    t.c_cd * sp.p_cd + t.c_cbd * sp.p_cbar_d + t.c_cdb * sp.p_c_dbar
}

/// Componentwise linear combination `alpha * t1 + beta * t2`.
pub fn eta_axpy(alpha: f64, t1: &EtaTriple, beta: f64, t2: &EtaTriple) -> EtaTriple {
    EtaTriple::new(
        alpha * t1.c_cd + beta * t2.c_cd,
        alpha * t1.c_cbd + beta * t2.c_cbd,
        alpha * t1.c_cdb + beta * t2.c_cdb,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ChannelType {
    /// More receive antennas (M < N).
    TypeI,
    /// More transmit antennas (N < M).
    TypeII,
    /// M = N; the Type I and Type II formulas coincide.
    Square,
}

impl ChannelType {
    pub fn is_type1(&self) -> bool {
        matches!(self, ChannelType::TypeI | ChannelType::Square)
    }
    pub fn is_type2(&self) -> bool {
        matches!(self, ChannelType::TypeII | ChannelType::Square)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    Regime1,
    Regime2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Classification {
    pub channel_type: ChannelType,
    pub regime: Regime,
}

/// Classifies canonical parameters by antenna ratio and burstiness regime.
///
/// Regime 1 holds iff `p_c / p_d <= 1 / (1 + p_dgc)`. The test is performed
/// division-free as `p_c + p_cd <= p_d`, which is exact (equality at the
/// boundary classifies as Regime 1, and `p_c = 0` always lands in Regime 1).
pub fn classify(params: &ChannelParams) -> Result<Classification, ModelError> {
    if !params.is_canonical() {
        return Err(ModelError::NonCanonical { p_c: params.p_c, p_d: params.p_d });
    }
    let channel_type = match params.m.cmp(&params.n) {
        std::cmp::Ordering::Less => ChannelType::TypeI,
        std::cmp::Ordering::Greater => ChannelType::TypeII,
        std::cmp::Ordering::Equal => ChannelType::Square,
    };
    let regime = if params.p_c + params.p_cd <= params.p_d {
        Regime::Regime1
    } else {
        Regime::Regime2
    };
    Ok(Classification { channel_type, regime })
}

/// Returns parameters with `p_c <= p_d`, swapping the two marginals if
/// needed. The joint probability is preserved exactly; idempotent.
pub fn canonicalize(params: &ChannelParams) -> ChannelParams {
    if params.p_c > params.p_d {
        ChannelParams {
            p_d: params.p_c,
            p_c: params.p_d,
            ..*params
        }
    } else {
        *params
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum StateLabel {
    A,
    B,
    C,
    D,
    E,
}

impl StateLabel {
    pub const ALL: [StateLabel; 5] =
        [StateLabel::A, StateLabel::B, StateLabel::C, StateLabel::D, StateLabel::E];
}

impl std::fmt::Display for StateLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:?}", self)
    }
}

/// One state of the contracted 5-state joint law. The mask lists the on/off
/// values of (S11, S12, S21, S22): direct into Rx1, cross into Rx1, cross
/// into Rx2, direct into Rx2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContractedState {
    pub label: StateLabel,
    pub mask: [bool; 4],
    pub prob: f64,
}

impl ContractedState {
    /// On/off pair (direct, cross) seen by receiver 1 or 2 in this state.
    pub fn rx_links(&self, rx: usize) -> (bool, bool) {
        match rx {
            1 => (self.mask[0], self.mask[1]),
            2 => (self.mask[3], self.mask[2]),
            _ => panic!("receiver index must be 1 or 2"),
        }
    }
}

pub fn state_mask(label: StateLabel) -> [bool; 4] {
    match label {
        StateLabel::A => [true, true, true, true],
        StateLabel::B => [true, false, false, true],
        StateLabel::C => [true, false, true, false],
        StateLabel::D => [false, true, false, true],
        StateLabel::E => [false, false, false, false],
    }
}

/// The 5-state joint law whose per-receiver marginals match the channel's
/// (direct, cross) law. Requires canonical parameters so that the
/// direct-only state has nonnegative probability.
pub fn contracted_states(params: &ChannelParams) -> Result<[ContractedState; 5], ModelError> {
    if !params.is_canonical() {
        return Err(ModelError::NonCanonical { p_c: params.p_c, p_d: params.p_d });
    }
    let probs = [
        params.p_cd,
        params.p_d - params.p_c,
        params.p_c - params.p_cd,
        params.p_c - params.p_cd,
        1.0 - params.p_d - params.p_c + params.p_cd,
    ];
    let mut out = [ContractedState { label: StateLabel::A, mask: [false; 4], prob: 0.0 }; 5];
    for (i, label) in StateLabel::ALL.iter().enumerate() {
        out[i] = ContractedState { label: *label, mask: state_mask(*label), prob: probs[i] };
    }
    Ok(out)
}

/// Draws `n` i.i.d. labels from the contracted law; deterministic given the
/// seed.
pub fn sample_states(
    params: &ChannelParams,
    n: usize,
    seed: u64,
) -> Result<Vec<StateLabel>, ModelError> {
    let states = contracted_states(params)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut chosen = StateLabel::E;
        for s in &states {
            acc += s.prob;
            if u < acc {
                chosen = s.label;
                break;
            }
        }
        out.push(chosen);
    }
    Ok(out)
}
