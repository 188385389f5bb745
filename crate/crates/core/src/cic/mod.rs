//! Interference-cancellation mathematics for the UE1 uplink.
//!
//! Coordinate 0 of every per-BS vector is BS1 (the victim); coordinates
//! `1..=J` are the helping BSs. Four receivers are modeled:
//!
//! * [`Scheme::Baseline`]: BS1 treats the UAV as noise.
//! * [`Scheme::Df`]: helpers decode the UAV individually and forward the
//!   decoded signal; BS1 cancels it if any single BS can decode.
//! * [`Scheme::Qf1`]: helpers quantize and forward; BS1 MMSE-combines all
//!   copies to decode the UAV, then cancels it (nonlinear).
//! * [`Scheme::Qf2`]: helpers quantize and forward; BS1 MMSE-combines to
//!   suppress the UAV and decodes UE1 directly (linear).

mod combining;

pub use combining::{
    mmse_weights, rank_one_update_inverse, sinr_quadratic, sinr_ue1_qf2_direct, Weights,
};

use num_complex::Complex64;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CicError {
    #[error("vector lengths disagree: {0}")]
    LengthMismatch(String),
    #[error("invalid realization: {0}")]
    InvalidRealization(String),
    #[error("helper index {index} out of range 1..={count}")]
    HelperIndex { index: usize, count: usize },
    #[error("every noise-plus-quantization entry is infinite")]
    AllInfiniteNoise,
    #[error("combining weights are all zero")]
    ZeroWeights,
    #[error("linear system is singular")]
    Singular,
}

/// Thermal noise power in Watts for a PSD in dBm/Hz over `bandwidth_hz`.
pub fn noise_power(psd_dbm_per_hz: f64, bandwidth_hz: f64) -> f64 {
    dbm_to_watts(psd_dbm_per_hz + 10.0 * bandwidth_hz.log10())
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0) * 1e-3
}

pub fn watts_to_dbm(watts: f64) -> f64 {
    10.0 * (watts * 1e3).log10()
}

/// Noise power of uniform scalar quantization with `bits` per I/Q
/// component of a signal of power `pu_gain + sigma2`. Zero bits means the
/// helper forwards nothing, modeled as infinite noise.
pub fn quantization_noise(pu_gain: f64, sigma2: f64, bits: u32) -> f64 {
    if bits == 0 {
        f64::INFINITY
    } else {
        3.0 * (pu_gain + sigma2) * 2f64.powi(-2 * bits as i32)
    }
}

/// Bits per I/Q component used by each helper.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuantizerConfig {
    pub bits: Vec<u32>,
}

impl QuantizerConfig {
    pub fn uniform(bits: u32, helpers: usize) -> Self {
        Self {
            bits: vec![bits; helpers],
        }
    }

    /// Quantization noise for every BS, with the BS1 entry fixed at zero.
    pub fn noise_powers(
        &self,
        pu: f64,
        f: &[Complex64],
        sigma2: &[f64],
    ) -> Result<Vec<f64>, CicError> {
        if f.len() != self.bits.len() + 1 || sigma2.len() != f.len() {
            return Err(CicError::LengthMismatch(format!(
                "{} helpers quantized, {} gains, {} noise powers",
                self.bits.len(),
                f.len(),
                sigma2.len()
            )));
        }
        let mut q = Vec::with_capacity(f.len());
        q.push(0.0);
        for (i, &bits) in self.bits.iter().enumerate() {
            q.push(quantization_noise(
                pu * f[i + 1].norm_sqr(),
                sigma2[i + 1],
                bits,
            ));
        }
        Ok(q)
    }
}

/// Forwarding `bits` per I/Q component costs `2 * bits` per sample; helper
/// `i` is feasible iff that fits its backhaul capacity.
pub fn backhaul_feasible(
    bits: &QuantizerConfig,
    capacities_bits_per_sample: &[f64],
) -> Result<Vec<bool>, CicError> {
    if bits.bits.len() != capacities_bits_per_sample.len() {
        return Err(CicError::LengthMismatch(format!(
            "{} helpers, {} capacities",
            bits.bits.len(),
            capacities_bits_per_sample.len()
        )));
    }
    Ok(bits
        .bits
        .iter()
        .zip(capacities_bits_per_sample)
        .map(|(&b, &c)| 2.0 * b as f64 <= c)
        .collect())
}

/// One channel draw with everything the receivers need.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkRealization {
    pub p1: f64,
    pub pu: f64,
    pub h1: Complex64,
    pub f: Vec<Complex64>,
    pub sigma2: Vec<f64>,
    /// Quantization noise; `q[0]` is always zero and entries may be infinite.
    pub q: Vec<f64>,
}

impl LinkRealization {
    pub fn new(
        p1: f64,
        pu: f64,
        h1: Complex64,
        f: Vec<Complex64>,
        sigma2: Vec<f64>,
        q: Vec<f64>,
    ) -> Result<Self, CicError> {
        let r = Self {
            p1,
            pu,
            h1,
            f,
            sigma2,
            q,
        };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<(), CicError> {
        let n = self.f.len();
        if n == 0 || self.sigma2.len() != n || self.q.len() != n {
            return Err(CicError::LengthMismatch(format!(
                "f: {n}, sigma2: {}, q: {}",
                self.sigma2.len(),
                self.q.len()
            )));
        }
        if !(self.p1 >= 0.0 && self.p1.is_finite() && self.pu >= 0.0 && self.pu.is_finite()) {
            return Err(CicError::InvalidRealization(
                "transmit powers must be finite and nonnegative".into(),
            ));
        }
        if self.sigma2.iter().any(|&s| !(s > 0.0 && s.is_finite())) {
            return Err(CicError::InvalidRealization(
                "noise powers must be finite and positive".into(),
            ));
        }
        if self.q[0] != 0.0 || self.q.iter().any(|&q| q.is_nan() || q < 0.0) {
            return Err(CicError::InvalidRealization(
                "quantization noise must be nonnegative with q[0] = 0".into(),
            ));
        }
        Ok(())
    }

    pub fn helper_count(&self) -> usize {
        self.f.len() - 1
    }

    /// `p1 |h1|^2`
    pub fn ue1_power(&self) -> f64 {
        self.p1 * self.h1.norm_sqr()
    }

    /// `pu |f_i|^2`
    pub fn uav_power(&self, i: usize) -> f64 {
        self.pu * self.f[i].norm_sqr()
    }

    /// Diagonal of noise plus quantization noise.
    pub fn gamma(&self) -> Vec<f64> {
        self.sigma2
            .iter()
            .zip(&self.q)
            .map(|(s, q)| s + q)
            .collect()
    }

    /// UE1's channel across all BSs: nonzero only at BS1.
    pub fn ue1_vector(&self) -> Vec<Complex64> {
        let mut h = vec![Complex64::new(0.0, 0.0); self.f.len()];
        h[0] = self.h1;
        h
    }

    /// `sum_i |f_i|^2 / (sigma_i^2 + q_i)` over the helpers.
    pub fn helper_gain_sum(&self) -> f64 {
        (1..self.f.len())
            .map(|i| self.f[i].norm_sqr() / (self.sigma2[i] + self.q[i]))
            .sum()
    }

    /// Copy with every `q_i` replaced by the uniform-quantizer noise.
    pub fn with_quantizer(&self, quantizer: &QuantizerConfig) -> Result<Self, CicError> {
        let q = quantizer.noise_powers(self.pu, &self.f, &self.sigma2)?;
        Ok(Self { q, ..self.clone() })
    }
}

pub fn rate(sinr: f64) -> f64 {
    (1.0 + sinr).log2()
}

/// UE1's SINR after perfect cancellation of the UAV.
pub fn sinr_interference_free(r: &LinkRealization) -> f64 {
    r.ue1_power() / r.sigma2[0]
}

/// UE1's SINR at BS1 treating the UAV as noise.
pub fn sinr_baseline(r: &LinkRealization) -> f64 {
    r.ue1_power() / (r.uav_power(0) + r.sigma2[0])
}

/// The UAV's rate at BS1 treating UE1 as noise (direct SIC).
pub fn rate_uav_at_bs1(r: &LinkRealization) -> f64 {
    rate(r.uav_power(0) / (r.ue1_power() + r.sigma2[0]))
}

pub fn rate_uav_at_helper(r: &LinkRealization, i: usize) -> Result<f64, CicError> {
    let count = r.helper_count();
    if i == 0 || i > count {
        return Err(CicError::HelperIndex { index: i, count });
    }
    Ok(rate(r.uav_power(i) / r.sigma2[i]))
}

/// Best single-BS decoding rate of the UAV.
pub fn rate_uav_df(r: &LinkRealization) -> f64 {
    (1..=r.helper_count())
        .map(|i| rate(r.uav_power(i) / r.sigma2[i]))
        .fold(rate_uav_at_bs1(r), f64::max)
}

/// The UAV's SINR after MMSE-combining BS1 with the quantized helper copies.
/// Helpers with infinite quantization noise contribute nothing.
pub fn sinr_uav_qf1(r: &LinkRealization) -> f64 {
    let direct = r.uav_power(0) / (r.ue1_power() + r.sigma2[0]);
    let helpers: f64 = (1..r.f.len())
        .map(|i| r.uav_power(i) / (r.sigma2[i] + r.q[i]))
        .sum();
    direct + helpers
}

pub fn rate_uav_qf1(r: &LinkRealization) -> f64 {
    rate(sinr_uav_qf1(r))
}

/// UE1's SINR under linear MMSE suppression of the UAV, in closed form.
///
/// Evaluated as `(p1|h1|^2/s1) / (1 + |f1|^2 / (s1 (1/pu + S)))` with
/// `S = sum_i |f_i|^2/(s_i + q_i)`, which is algebraically the usual
/// `(p1|h1|^2/s1)(1 - pu|f1|^2/(s1 + pu|f1|^2 + pu s1 S))` but free of the
/// `1 - x` cancellation and monotone under rounding in both `pu` and `S`.
/// With `S = 0` no helper carries information and the baseline SINR is
/// returned as is.
pub fn sinr_ue1_qf2_closed(r: &LinkRealization) -> f64 {
    let s1 = r.sigma2[0];
    let gain_sum = r.helper_gain_sum();
    if gain_sum == 0.0 {
        return sinr_baseline(r);
    }
    let residual = s1 * (1.0 / r.pu + gain_sum);
    sinr_interference_free(r) / (1.0 + r.f[0].norm_sqr() / residual)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Baseline,
    Df,
    Qf1,
    Qf2,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [Scheme::Baseline, Scheme::Df, Scheme::Qf1, Scheme::Qf2];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Baseline => "baseline",
            Scheme::Df => "df",
            Scheme::Qf1 => "qf1",
            Scheme::Qf2 => "qf2",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeOutcome {
    pub scheme: Scheme,
    pub ue1_sinr: f64,
    pub ue1_rate: f64,
    /// Rate at which the UAV can be decoded, for the SIC-based schemes.
    pub uav_rate_bound: Option<f64>,
    /// Whether the UAV was decoded and cancelled, for the SIC-based schemes.
    pub uav_decoded: Option<bool>,
}

impl SchemeOutcome {
    fn new(scheme: Scheme, ue1_sinr: f64, bound: Option<f64>, decoded: Option<bool>) -> Self {
        Self {
            scheme,
            ue1_sinr,
            ue1_rate: rate(ue1_sinr),
            uav_rate_bound: bound,
            uav_decoded: decoded,
        }
    }
}

/// Cancel the UAV if its rate `ru` fits under `bound` (inclusive).
fn sic_outcome(scheme: Scheme, r: &LinkRealization, bound: f64, ru: f64) -> SchemeOutcome {
    let decoded = bound >= ru;
    let sinr = if decoded {
        sinr_interference_free(r)
    } else {
        sinr_baseline(r)
    };
    SchemeOutcome::new(scheme, sinr, Some(bound), Some(decoded))
}

pub fn evaluate_baseline(r: &LinkRealization) -> SchemeOutcome {
    SchemeOutcome::new(Scheme::Baseline, sinr_baseline(r), None, None)
}

pub fn evaluate_df(r: &LinkRealization, ru: f64) -> SchemeOutcome {
    sic_outcome(Scheme::Df, r, rate_uav_df(r), ru)
}

pub fn evaluate_qf1(r: &LinkRealization, ru: f64) -> SchemeOutcome {
    sic_outcome(Scheme::Qf1, r, rate_uav_qf1(r), ru)
}

pub fn evaluate_qf2(r: &LinkRealization) -> SchemeOutcome {
    SchemeOutcome::new(Scheme::Qf2, sinr_ue1_qf2_closed(r), None, None)
}

pub fn evaluate(scheme: Scheme, r: &LinkRealization, ru: f64) -> SchemeOutcome {
    match scheme {
        Scheme::Baseline => evaluate_baseline(r),
        Scheme::Df => evaluate_df(r, ru),
        Scheme::Qf1 => evaluate_qf1(r, ru),
        Scheme::Qf2 => evaluate_qf2(r),
    }
}

/// Outcome of a pairwise comparison, from the first scheme's point of view.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Dominance {
    Better,
    Worse,
    Tie,
}

impl Dominance {
    /// Direct comparison of two SINRs.
    pub fn of_sinrs(first: f64, second: f64) -> Self {
        if first > second {
            Dominance::Better
        } else if first < second {
            Dominance::Worse
        } else {
            Dominance::Tie
        }
    }
}

/// Pairwise rankings predicted from decoding conditions alone.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DominanceReport {
    pub qf1_vs_df: Dominance,
    pub qf2_vs_df: Dominance,
    pub qf2_vs_qf1: Dominance,
}

/// Ranks the CIC schemes from the UAV decoding conditions.
///
/// QF2's SINR sits strictly between the baseline and the interference-free
/// SINR whenever the UAV reaches BS1 and at least one helper contributes;
/// outside that case it collapses onto one of the endpoints and the
/// rankings degenerate accordingly.
pub fn compare_schemes(r: &LinkRealization, ru: f64) -> DominanceReport {
    let df = rate_uav_df(r) >= ru;
    let qf1 = rate_uav_qf1(r) >= ru;

    if r.uav_power(0) == 0.0 || r.ue1_power() == 0.0 {
        // No interference, or nothing to protect: every SINR coincides.
        return DominanceReport {
            qf1_vs_df: Dominance::Tie,
            qf2_vs_df: Dominance::Tie,
            qf2_vs_qf1: Dominance::Tie,
        };
    }

    let qf1_vs_df = match (qf1, df) {
        (true, false) => Dominance::Better,
        (false, true) => Dominance::Worse,
        _ => Dominance::Tie,
    };
    let qf2_interior = r.helper_gain_sum() > 0.0;
    let vs_sic = |decoded: bool| match (decoded, qf2_interior) {
        (true, _) => Dominance::Worse,
        (false, true) => Dominance::Better,
        (false, false) => Dominance::Tie,
    };
    DominanceReport {
        qf1_vs_df,
        qf2_vs_df: vs_sic(df),
        qf2_vs_qf1: vs_sic(qf1),
    }
}
