//! Seeded Monte-Carlo trials and parameter sweeps.
//!
//! Trial `i` draws from ChaCha8 keyed by the scenario seed on stream `i`, so
//! a trial's randomness does not depend on how trials are scheduled. Every
//! grid point of a sweep reuses the same streams (common random numbers).
//! Per-trial results are reduced in trial order, which makes every
//! aggregate bit-identical for any worker count.

use crate::channel::{draw_link, LinkKind};
use crate::cic::{
    compare_schemes, dbm_to_watts, evaluate, noise_power, rate, rate_uav_at_bs1,
    sinr_interference_free, CicError, DominanceReport, LinkRealization, QuantizerConfig, Scheme,
    SchemeOutcome,
};
use crate::config::{BitsSetting, ConfigError, ScenarioConfig};
use crate::geometry::{hex_layout, link_geom, uniform_hex_point_excluding, Site};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Cic(#[from] CicError),
    #[error("unknown sweep variable `{0}` (expected ru, pu_dbm, distance_m or bits)")]
    UnknownVariable(String),
    #[error("invalid sweep grid: {0}")]
    InvalidGrid(String),
}

/// How trials are scheduled. Without the `parallel` feature both variants
/// run on the calling thread.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

/// RNG for one trial: the scenario seed selects the key, the trial index the
/// stream.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Draws geometry and channels for one trial and assembles the realization.
pub fn build_realization<R: rand::Rng + ?Sized>(
    cfg: &ScenarioConfig,
    rng: &mut R,
) -> Result<LinkRealization, SimError> {
    let layout = hex_layout(cfg.cell_radius_m, cfg.tiers, cfg.bs_height_m);
    let pattern = cfg.antenna();
    let fc = cfg.fc_ghz;

    let (ux, uy) =
        uniform_hex_point_excluding((0.0, 0.0), cfg.cell_radius_m, cfg.ue_min_distance_m, rng);
    let ue = Site::new(ux, uy, cfg.ue_height_m);
    let uav = Site::new(cfg.uav_bs1_horizontal_distance_m, 0.0, cfg.uav_altitude_m);

    let terrestrial = LinkKind::Terrestrial {
        bs_height: cfg.bs_height_m,
        ue_height: cfg.ue_height_m,
    };
    let aerial = LinkKind::Aerial {
        bs_height: cfg.bs_height_m,
        uav_height: cfg.uav_altitude_m,
    };

    let p1 = dbm_to_watts(cfg.p1_dbm);
    let pu = dbm_to_watts(cfg.pu_dbm);
    let thermal = noise_power(cfg.noise_psd_dbm_hz, cfg.rb_bandwidth_hz);

    let mut h1 = None;
    let mut sigma2 = Vec::with_capacity(layout.sites.len());
    for (k, bs) in layout.sites.iter().enumerate() {
        let draw = draw_link(terrestrial, &link_geom(&ue, bs), &pattern, fc, rng);
        if k == 0 {
            h1 = Some(draw.amplitude());
            sigma2.push(thermal);
        } else {
            // UE1 leaks into the helpers; other cells' UEs stay below the noise.
            sigma2.push(thermal + p1 * draw.power_gain());
        }
    }
    let f: Vec<_> = layout
        .sites
        .iter()
        .map(|bs| draw_link(aerial, &link_geom(&uav, bs), &pattern, fc, rng).amplitude())
        .collect();

    let quantizer = QuantizerConfig {
        bits: cfg.helper_bits(),
    };
    let q = quantizer.noise_powers(pu, &f, &sigma2)?;
    Ok(LinkRealization::new(
        p1,
        pu,
        h1.expect("layout has BS1"),
        f,
        sigma2,
        q,
    )?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialResult {
    pub trial: u64,
    /// Indexed like [`Scheme::ALL`].
    pub outcomes: [SchemeOutcome; 4],
    pub interference_free_rate: f64,
    /// BS1 alone could decode the UAV while treating UE1 as noise.
    pub direct_sic_decoded: bool,
    pub dominance: DominanceReport,
}

impl TrialResult {
    pub fn outcome(&self, scheme: Scheme) -> &SchemeOutcome {
        &self.outcomes[scheme as usize]
    }
}

pub fn evaluate_trial(cfg: &ScenarioConfig, trial: u64) -> Result<TrialResult, SimError> {
    let mut rng = trial_rng(cfg.seed, trial);
    let r = build_realization(cfg, &mut rng)?;
    let ru = cfg.ru_bps_hz;
    Ok(TrialResult {
        trial,
        outcomes: Scheme::ALL.map(|s| evaluate(s, &r, ru)),
        interference_free_rate: rate(sinr_interference_free(&r)),
        direct_sic_decoded: rate_uav_at_bs1(&r) >= ru,
        dominance: compare_schemes(&r, ru),
    })
}

/// Runs every trial of `cfg`, returned in trial order.
pub fn simulate(cfg: &ScenarioConfig, exec: Execution) -> Result<Vec<TrialResult>, SimError> {
    cfg.validate()?;
    let n = cfg.n_trials;
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            (0..n)
                .into_par_iter()
                .map(|t| evaluate_trial(cfg, t))
                .collect()
        }
        _ => (0..n).map(|t| evaluate_trial(cfg, t)).collect(),
    }
}

/// Mean and standard error of a sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
    pub n: u64,
}

impl Estimate {
    pub fn from_samples(xs: impl IntoIterator<Item = f64>) -> Self {
        let xs: Vec<f64> = xs.into_iter().collect();
        let n = xs.len() as u64;
        let mean = xs.iter().sum::<f64>() / n as f64;
        let stderr = if n > 1 {
            let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64;
            (var / n as f64).sqrt()
        } else {
            0.0
        };
        Self { mean, stderr, n }
    }
}

/// Fractions of trials for which each dominance verdict held.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DominanceFractions {
    pub qf1_over_df: f64,
    pub df_over_qf1: f64,
    pub qf2_over_df: f64,
    pub df_over_qf2: f64,
    pub qf2_over_qf1: f64,
    pub qf1_over_qf2: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    /// Indexed like [`Scheme::ALL`].
    pub rates: [Estimate; 4],
    pub interference_free: Estimate,
    pub df_decode_fraction: f64,
    pub qf1_decode_fraction: f64,
    /// Fraction of trials in which BS1 alone could decode the UAV.
    pub direct_sic_fraction: f64,
    pub dominance: DominanceFractions,
}

impl RunSummary {
    pub fn rate(&self, scheme: Scheme) -> &Estimate {
        &self.rates[scheme as usize]
    }
}

pub fn summarize(trials: &[TrialResult]) -> RunSummary {
    use crate::cic::Dominance::{Better, Worse};
    let n = trials.len() as f64;
    let frac =
        |pred: &dyn Fn(&TrialResult) -> bool| trials.iter().filter(|t| pred(t)).count() as f64 / n;
    let decoded = |s: Scheme| move |t: &TrialResult| t.outcome(s).uav_decoded == Some(true);
    RunSummary {
        rates: Scheme::ALL
            .map(|s| Estimate::from_samples(trials.iter().map(|t| t.outcome(s).ue1_rate))),
        interference_free: Estimate::from_samples(trials.iter().map(|t| t.interference_free_rate)),
        df_decode_fraction: frac(&decoded(Scheme::Df)),
        qf1_decode_fraction: frac(&decoded(Scheme::Qf1)),
        direct_sic_fraction: frac(&|t: &TrialResult| t.direct_sic_decoded),
        dominance: DominanceFractions {
            qf1_over_df: frac(&|t| t.dominance.qf1_vs_df == Better),
            df_over_qf1: frac(&|t| t.dominance.qf1_vs_df == Worse),
            qf2_over_df: frac(&|t| t.dominance.qf2_vs_df == Better),
            df_over_qf2: frac(&|t| t.dominance.qf2_vs_df == Worse),
            qf2_over_qf1: frac(&|t| t.dominance.qf2_vs_qf1 == Better),
            qf1_over_qf2: frac(&|t| t.dominance.qf2_vs_qf1 == Worse),
        },
    }
}

pub fn run_trials(cfg: &ScenarioConfig) -> Result<RunSummary, SimError> {
    run_trials_with(cfg, Execution::default())
}

pub fn run_trials_with(cfg: &ScenarioConfig, exec: Execution) -> Result<RunSummary, SimError> {
    let trials = simulate(cfg, exec)?;
    Ok(summarize(&trials))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVariable {
    Ru,
    PuDbm,
    DistanceM,
    Bits,
}

impl SweepVariable {
    pub fn name(self) -> &'static str {
        match self {
            SweepVariable::Ru => "ru",
            SweepVariable::PuDbm => "pu_dbm",
            SweepVariable::DistanceM => "distance_m",
            SweepVariable::Bits => "bits",
        }
    }

    /// Copy of `cfg` with this variable set to `value`.
    pub fn apply(self, cfg: &ScenarioConfig, value: f64) -> Result<ScenarioConfig, SimError> {
        let mut out = cfg.clone();
        match self {
            SweepVariable::Ru => out.ru_bps_hz = value,
            SweepVariable::PuDbm => out.pu_dbm = value,
            SweepVariable::DistanceM => out.uav_bs1_horizontal_distance_m = value,
            SweepVariable::Bits => {
                if !(value >= 0.0 && value.fract() == 0.0 && value <= 32.0) {
                    return Err(SimError::InvalidGrid(format!(
                        "bits must be an integer in 0..=32, got {value}"
                    )));
                }
                out.bits = BitsSetting::Uniform(value as u32);
            }
        }
        out.validate()?;
        Ok(out)
    }
}

impl fmt::Display for SweepVariable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepVariable {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ru" | "ru_bps_hz" => Ok(SweepVariable::Ru),
            "pu" | "pu_dbm" => Ok(SweepVariable::PuDbm),
            "distance" | "distance_m" | "uav_bs1_horizontal_distance_m" => {
                Ok(SweepVariable::DistanceM)
            }
            "bits" => Ok(SweepVariable::Bits),
            other => Err(SimError::UnknownVariable(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub variable: SweepVariable,
    pub value: f64,
    pub scheme: Scheme,
    pub mean_rate: f64,
    pub stderr: f64,
    pub n_trials: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
}

pub const CSV_HEADER: &str = "variable,value,scheme,mean_rate_bpshz,stderr,n_trials,seed";

impl SweepResult {
    pub fn rows_for(&self, scheme: Scheme) -> impl Iterator<Item = &SweepRow> {
        self.rows.iter().filter(move |r| r.scheme == scheme)
    }

    pub fn means(&self, scheme: Scheme) -> Vec<f64> {
        self.rows_for(scheme).map(|r| r.mean_rate).collect()
    }

    /// CSV text; floats use the shortest representation that round-trips.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(64 * (self.rows.len() + 1));
        out.push_str(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                r.variable, r.value, r.scheme, r.mean_rate, r.stderr, r.n_trials, r.seed
            ));
        }
        out
    }
}

pub fn sweep(
    cfg: &ScenarioConfig,
    variable: SweepVariable,
    grid: &[f64],
    exec: Execution,
) -> Result<SweepResult, SimError> {
    if grid.is_empty() {
        return Err(SimError::InvalidGrid("grid is empty".into()));
    }
    let mut rows = Vec::with_capacity(grid.len() * Scheme::ALL.len());
    for &value in grid {
        let point = variable.apply(cfg, value)?;
        let summary = run_trials_with(&point, exec)?;
        for s in Scheme::ALL {
            let e = summary.rate(s);
            rows.push(SweepRow {
                variable,
                value,
                scheme: s,
                mean_rate: e.mean,
                stderr: e.stderr,
                n_trials: e.n,
                seed: point.seed,
            });
        }
    }
    Ok(SweepResult { rows })
}

/// `steps` evenly spaced values from `from` to `to` inclusive.
pub fn linear_grid(from: f64, to: f64, steps: usize) -> Result<Vec<f64>, SimError> {
    if steps == 0 || !from.is_finite() || !to.is_finite() {
        return Err(SimError::InvalidGrid(format!(
            "from {from} to {to} in {steps} steps"
        )));
    }
    if steps == 1 {
        return Ok(vec![from]);
    }
    let step = (to - from) / (steps - 1) as f64;
    Ok((0..steps)
        .map(|k| {
            if k == steps - 1 {
                to
            } else {
                from + step * k as f64
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cic::sinr_baseline;

    fn small_cfg() -> ScenarioConfig {
        ScenarioConfig {
            n_trials: 40,
            ..ScenarioConfig::default()
        }
    }

    #[test]
    fn zero_bits_give_infinite_q() {
        let cfg = ScenarioConfig {
            bits: BitsSetting::Uniform(0),
            ..small_cfg()
        };
        let r = build_realization(&cfg, &mut trial_rng(1, 0)).unwrap();
        assert_eq!(r.q[0], 0.0);
        assert!(r.q[1..].iter().all(|q| q.is_infinite()));
        assert_eq!(r.f.len(), 7);
    }

    #[test]
    fn equal_seed_equal_realization() {
        let cfg = small_cfg();
        let a = build_realization(&cfg, &mut trial_rng(9, 3)).unwrap();
        let b = build_realization(&cfg, &mut trial_rng(9, 3)).unwrap();
        let c = build_realization(&cfg, &mut trial_rng(9, 4)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn uav_gains_fall_with_distance() {
        // With the UAV at least 1.5 km out every BS sees it on the sidelobe
        // floor, so only pathloss changes.
        for trial in 0..20 {
            let mut prev: Option<Vec<f64>> = None;
            for d in [1500.0, 2000.0, 3000.0, 4500.0, 6000.0] {
                let cfg = ScenarioConfig {
                    uav_bs1_horizontal_distance_m: d,
                    ..small_cfg()
                };
                let r = build_realization(&cfg, &mut trial_rng(5, trial)).unwrap();
                let gains: Vec<f64> = r.f.iter().map(|f| f.norm_sqr()).collect();
                if let Some(p) = &prev {
                    for (now, before) in gains.iter().zip(p) {
                        assert!(now <= before);
                    }
                }
                prev = Some(gains);
            }
        }
    }

    #[test]
    fn single_trial_has_zero_stderr() {
        let cfg = ScenarioConfig {
            n_trials: 1,
            ..small_cfg()
        };
        let trials = simulate(&cfg, Execution::Sequential).unwrap();
        let s = summarize(&trials);
        for scheme in Scheme::ALL {
            assert_eq!(s.rate(scheme).mean, trials[0].outcome(scheme).ue1_rate);
            assert_eq!(s.rate(scheme).stderr, 0.0);
        }
    }

    #[test]
    fn vanishing_uav_power_is_interference_free() {
        let cfg = ScenarioConfig {
            pu_dbm: -200.0,
            ..small_cfg()
        };
        let s = run_trials(&cfg).unwrap();
        for scheme in Scheme::ALL {
            assert!((s.rate(scheme).mean / s.interference_free.mean - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn cic_rates_take_endpoint_values() {
        let cfg = small_cfg();
        for t in simulate(&cfg, Execution::Sequential).unwrap() {
            let base = t.outcome(Scheme::Baseline).ue1_rate;
            let free = t.interference_free_rate;
            for s in [Scheme::Df, Scheme::Qf1] {
                let r = t.outcome(s).ue1_rate;
                assert!(r == base || r == free);
            }
            let q = t.outcome(Scheme::Qf2).ue1_rate;
            assert!(base < q && q < free);
        }
    }

    #[test]
    fn parallel_matches_sequential() {
        let cfg = small_cfg();
        assert_eq!(
            simulate(&cfg, Execution::Sequential).unwrap(),
            simulate(&cfg, Execution::Parallel).unwrap()
        );
    }

    #[test]
    fn sweep_variable_names() {
        assert_eq!("ru".parse::<SweepVariable>().unwrap(), SweepVariable::Ru);
        assert_eq!(
            "pu_dbm".parse::<SweepVariable>().unwrap(),
            SweepVariable::PuDbm
        );
        assert!(matches!(
            "speed".parse::<SweepVariable>(),
            Err(SimError::UnknownVariable(_))
        ));
        assert!(SweepVariable::Bits.apply(&small_cfg(), 2.5).is_err());
        assert!(SweepVariable::Ru.apply(&small_cfg(), -1.0).is_err());
    }

    #[test]
    fn grids() {
        assert_eq!(
            linear_grid(1.0, 10.0, 10).unwrap(),
            (1..=10).map(|k| k as f64).collect::<Vec<_>>()
        );
        assert_eq!(linear_grid(3.0, 3.0, 1).unwrap(), vec![3.0]);
        assert!(linear_grid(0.0, 1.0, 0).is_err());
        assert!(sweep(&small_cfg(), SweepVariable::Ru, &[], Execution::Sequential).is_err());
    }

    #[test]
    fn baseline_matches_direct_evaluation() {
        let cfg = small_cfg();
        let t = evaluate_trial(&cfg, 7).unwrap();
        let r = build_realization(&cfg, &mut trial_rng(cfg.seed, 7)).unwrap();
        assert_eq!(t.outcome(Scheme::Baseline).ue1_sinr, sinr_baseline(&r));
    }
}
