//! Large- and small-scale channel models for terrestrial and aerial links.
//!
//! Terrestrial links follow the 3GPP urban-macro (UMa) model, aerial links
//! its aerial-vehicle extension (UMa-AV). All adopted constants live in this
//! module; they are listed in the README as well.

use crate::geometry::LinkGeom;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

/// Distances are clamped to this before any pathloss evaluation.
pub const MIN_PATHLOSS_DISTANCE_M: f64 = 10.0;
/// Effective environment height of the UMa breakpoint distance.
pub const UMA_ENV_HEIGHT_M: f64 = 1.0;
pub const UMA_LOS_SHADOWING_DB: f64 = 4.0;
pub const UMA_NLOS_SHADOWING_DB: f64 = 6.0;
pub const AERIAL_NLOS_SHADOWING_DB: f64 = 6.0;
/// Above this height aerial links use the UMa-AV formulas.
pub const AERIAL_MODEL_MIN_HEIGHT_M: f64 = 22.5;
/// Above this height (and up to 300 m) aerial links are always LoS.
pub const AERIAL_ALWAYS_LOS_HEIGHT_M: f64 = 100.0;
/// Rician K-factor of LoS aerial links.
pub const AERIAL_LOS_K_DB: f64 = 15.0;

const SPEED_OF_LIGHT: f64 = 3.0e8;

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct AntennaPattern {
    pub downtilt_deg: f64,
    pub theta3db_deg: f64,
    pub sla_db: f64,
    pub gmax_db: f64,
}

impl Default for AntennaPattern {
    fn default() -> Self {
        Self {
            downtilt_deg: 10.0,
            theta3db_deg: 10.0,
            sla_db: 20.0,
            gmax_db: 8.0,
        }
    }
}

/// Which family of models a link is drawn from, with the heights they need.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LinkKind {
    Terrestrial { bs_height: f64, ue_height: f64 },
    Aerial { bs_height: f64, uav_height: f64 },
}

/// One sampled link. The linear power gain is
/// `10^((-pathloss + shadowing + antenna_gain) / 10) * |fading|^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelDraw {
    pub pathloss_db: f64,
    pub shadowing_db: f64,
    pub antenna_gain_db: f64,
    pub fading: Complex64,
    pub los: bool,
}

impl ChannelDraw {
    pub fn large_scale_db(&self) -> f64 {
        -self.pathloss_db + self.shadowing_db + self.antenna_gain_db
    }

    pub fn power_gain(&self) -> f64 {
        db_to_linear(self.large_scale_db()) * self.fading.norm_sqr()
    }

    /// Complex baseband amplitude whose squared magnitude is [`Self::power_gain`].
    pub fn amplitude(&self) -> Complex64 {
        self.fading * db_to_linear(self.large_scale_db()).sqrt()
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// UMa LoS probability for a ground UE (UE height enters only above 13 m).
pub fn los_probability_terrestrial(d2d: f64, ue_height: f64) -> f64 {
    if d2d <= 18.0 {
        return 1.0;
    }
    let base = 18.0 / d2d + (-d2d / 63.0).exp() * (1.0 - 18.0 / d2d);
    let c = if ue_height <= 13.0 {
        0.0
    } else {
        ((ue_height - 13.0) / 10.0).powf(1.5)
    };
    (base * (1.0 + c * 1.25 * (d2d / 100.0).powi(3) * (-d2d / 150.0).exp())).clamp(0.0, 1.0)
}

fn clamped(geom: &LinkGeom) -> (f64, f64) {
    if geom.d2d >= MIN_PATHLOSS_DISTANCE_M {
        return (geom.d2d, geom.d3d);
    }
    let d2d = MIN_PATHLOSS_DISTANCE_M;
    (d2d, d2d.hypot(geom.height_gap()))
}

/// Breakpoint distance of the UMa LoS model, meters.
pub fn uma_breakpoint(fc_ghz: f64, bs_height: f64, ue_height: f64) -> f64 {
    let hb = (bs_height - UMA_ENV_HEIGHT_M).max(0.0);
    let hu = (ue_height - UMA_ENV_HEIGHT_M).max(0.0);
    4.0 * hb * hu * fc_ghz * 1e9 / SPEED_OF_LIGHT
}

/// UMa pathloss in dB. The NLoS value is never below the LoS value.
pub fn pathloss_terrestrial(
    geom: &LinkGeom,
    fc_ghz: f64,
    bs_height: f64,
    ue_height: f64,
    los: bool,
) -> f64 {
    let (d2d, d3d) = clamped(geom);
    let fc_term = 20.0 * fc_ghz.log10();
    let bp = uma_breakpoint(fc_ghz, bs_height, ue_height);
    let pl_los = if d2d <= bp {
        28.0 + 22.0 * d3d.log10() + fc_term
    } else {
        let dh = bs_height - ue_height;
        28.0 + 40.0 * d3d.log10() + fc_term - 9.0 * (bp * bp + dh * dh).log10()
    };
    if los {
        return pl_los;
    }
    let pl_nlos = 13.54 + 39.08 * d3d.log10() + fc_term - 0.6 * (ue_height - 1.5);
    pl_los.max(pl_nlos)
}

/// UMa-AV LoS probability for a UAV at `uav_height`.
pub fn los_probability_aerial(d2d: f64, uav_height: f64) -> f64 {
    if uav_height <= AERIAL_MODEL_MIN_HEIGHT_M {
        return los_probability_terrestrial(d2d, uav_height);
    }
    if uav_height > AERIAL_ALWAYS_LOS_HEIGHT_M {
        return 1.0;
    }
    let lg = uav_height.log10();
    let d1 = (460.0 * lg - 700.0).max(18.0);
    let p1 = 4300.0 * lg - 3800.0;
    if d2d <= d1 {
        return 1.0;
    }
    (d1 / d2d + (-d2d / p1).exp() * (1.0 - d1 / d2d)).clamp(0.0, 1.0)
}

/// UMa-AV pathloss in dB; below the aerial height range the terrestrial
/// model applies with the UAV as the UE.
pub fn pathloss_aerial(
    geom: &LinkGeom,
    fc_ghz: f64,
    bs_height: f64,
    uav_height: f64,
    los: bool,
) -> f64 {
    if uav_height <= AERIAL_MODEL_MIN_HEIGHT_M {
        return pathloss_terrestrial(geom, fc_ghz, bs_height, uav_height, los);
    }
    let (_, d3d) = clamped(geom);
    let pl_los = 28.0 + 22.0 * d3d.log10() + 20.0 * fc_ghz.log10();
    if los {
        return pl_los;
    }
    let pl_nlos = -17.5
        + (46.0 - 7.0 * uav_height.log10()) * d3d.log10()
        + 20.0 * (40.0 * std::f64::consts::PI * fc_ghz / 3.0).log10();
    pl_los.max(pl_nlos)
}

pub fn shadowing_std_terrestrial(los: bool) -> f64 {
    if los {
        UMA_LOS_SHADOWING_DB
    } else {
        UMA_NLOS_SHADOWING_DB
    }
}

pub fn shadowing_std_aerial(uav_height: f64, los: bool) -> f64 {
    if uav_height <= AERIAL_MODEL_MIN_HEIGHT_M {
        shadowing_std_terrestrial(los)
    } else if los {
        4.64 * (-0.0066 * uav_height).exp()
    } else {
        AERIAL_NLOS_SHADOWING_DB
    }
}

/// Vertical-plane BS pattern; boresight points `downtilt_deg` below the horizon.
pub fn antenna_gain(elevation_deg: f64, pattern: &AntennaPattern) -> f64 {
    let off = (elevation_deg + pattern.downtilt_deg) / pattern.theta3db_deg;
    pattern.gmax_db - (12.0 * off * off).min(pattern.sla_db)
}

pub fn shadowing_sample<R: Rng + ?Sized>(std_db: f64, rng: &mut R) -> f64 {
    let z: f64 = StandardNormal.sample(rng);
    if std_db == 0.0 {
        0.0
    } else {
        z * std_db
    }
}

/// Unit-power circularly symmetric complex Gaussian.
pub fn rayleigh_sample<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let n = Normal::new(0.0, std::f64::consts::FRAC_1_SQRT_2).unwrap();
    Complex64::new(n.sample(rng), n.sample(rng))
}

/// Unit-power Rician fading with a uniformly random specular phase.
pub fn rician_sample<R: Rng + ?Sized>(k_linear: f64, rng: &mut R) -> Complex64 {
    let phase = rng.random::<f64>() * std::f64::consts::TAU;
    let specular = Complex64::from_polar((k_linear / (k_linear + 1.0)).sqrt(), phase);
    specular + rayleigh_sample(rng) * (1.0 / (k_linear + 1.0)).sqrt()
}

/// Samples one link. Every call consumes the same number of random draws
/// regardless of outcome, so runs that differ only in geometry stay aligned.
pub fn draw_link<R: Rng + ?Sized>(
    kind: LinkKind,
    geom: &LinkGeom,
    pattern: &AntennaPattern,
    fc_ghz: f64,
    rng: &mut R,
) -> ChannelDraw {
    let u: f64 = rng.random();
    let (los, pathloss_db, std_db, fading_is_rician) = match kind {
        LinkKind::Terrestrial {
            bs_height,
            ue_height,
        } => {
            let los = u < los_probability_terrestrial(geom.d2d, ue_height);
            let pl = pathloss_terrestrial(geom, fc_ghz, bs_height, ue_height, los);
            (los, pl, shadowing_std_terrestrial(los), false)
        }
        LinkKind::Aerial {
            bs_height,
            uav_height,
        } => {
            let los = u < los_probability_aerial(geom.d2d, uav_height);
            let pl = pathloss_aerial(geom, fc_ghz, bs_height, uav_height, los);
            (los, pl, shadowing_std_aerial(uav_height, los), los)
        }
    };
    let shadowing_db = shadowing_sample(std_db, rng);
    let rician = rician_sample(db_to_linear(AERIAL_LOS_K_DB), rng);
    let rayleigh = rayleigh_sample(rng);
    let fading = if fading_is_rician { rician } else { rayleigh };
    ChannelDraw {
        pathloss_db,
        shadowing_db,
        antenna_gain_db: antenna_gain(geom.elevation_deg, pattern),
        fading,
        los,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{link_geom, Site};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn geom(d2d: f64, dh: f64) -> LinkGeom {
        link_geom(&Site::new(d2d, 0.0, 1.5 + dh), &Site::new(0.0, 0.0, 1.5))
    }

    #[test]
    fn terrestrial_los_probability() {
        assert_eq!(los_probability_terrestrial(10.0, 1.5), 1.0);
        assert_eq!(los_probability_terrestrial(18.0, 1.5), 1.0);
        assert!((los_probability_terrestrial(100.0, 1.5) - 0.347_670_836_844_231_2).abs() < 1e-12);
        assert!(los_probability_terrestrial(1e7, 1.5) < 1e-5);
        let mut prev = 1.0;
        for d in (1..5000).map(|k| k as f64) {
            let p = los_probability_terrestrial(d, 1.5);
            assert!(p <= prev && (0.0..=1.0).contains(&p));
            prev = p;
        }
    }

    #[test]
    fn terrestrial_pathloss_values() {
        // d2d = 100 m is below the 320 m breakpoint.
        let g = link_geom(&Site::new(100.0, 0.0, 1.5), &Site::new(0.0, 0.0, 25.0));
        let los = pathloss_terrestrial(&g, 2.0, 25.0, 1.5, true);
        assert!((los - 78.277_395_703_126_49).abs() < 1e-9);
        assert!(pathloss_terrestrial(&g, 2.0, 25.0, 1.5, false) >= los);
        assert!((uma_breakpoint(2.0, 25.0, 1.5) - 320.0).abs() < 1e-9);

        let g = link_geom(&Site::new(1000.0, 0.0, 1.5), &Site::new(0.0, 0.0, 25.0));
        assert!(
            (pathloss_terrestrial(&g, 2.0, 25.0, 1.5, true) - 108.911_672_789_548_42).abs() < 1e-9
        );
        assert!(
            (pathloss_terrestrial(&g, 2.0, 25.0, 1.5, false) - 136.805_285_076_261_95).abs() < 1e-9
        );
    }

    #[test]
    fn terrestrial_far_field_exponent() {
        // Beyond the breakpoint the LoS distance coefficient is 40 dB/decade.
        let a = pathloss_terrestrial(&geom(1500.0, 0.0), 2.0, 25.0, 1.5, true);
        let b = pathloss_terrestrial(&geom(3000.0, 0.0), 2.0, 25.0, 1.5, true);
        assert!((b - a - 40.0 * 2f64.log10()).abs() < 1e-9);
    }

    #[test]
    fn pathloss_monotone_in_distance() {
        for los in [true, false] {
            let mut prev_t = 0.0;
            let mut prev_a = 0.0;
            for d in (0..600).map(|k| k as f64 * 10.0) {
                let t = pathloss_terrestrial(&geom(d, 23.5), 2.0, 25.0, 1.5, los);
                let a = pathloss_aerial(&geom(d, 175.0), 2.0, 25.0, 200.0, los);
                assert!(t >= prev_t && a >= prev_a);
                prev_t = t;
                prev_a = a;
            }
        }
    }

    #[test]
    fn short_distances_are_clamped() {
        let near = pathloss_terrestrial(&geom(1.0, 0.0), 2.0, 25.0, 1.5, true);
        let at_min = pathloss_terrestrial(&geom(10.0, 0.0), 2.0, 25.0, 1.5, true);
        assert_eq!(near, at_min);
    }

    #[test]
    fn aerial_los_probability() {
        assert_eq!(los_probability_aerial(3000.0, 200.0), 1.0);
        assert_eq!(los_probability_aerial(1e6, 300.0), 1.0);
        assert_eq!(los_probability_aerial(0.0, 50.0), 1.0);
        let far = los_probability_aerial(1e5, 50.0);
        assert!((far - 8.152_620_203_539_599e-4).abs() < 1e-12);
        assert!(far > 0.0);
    }

    #[test]
    fn aerial_pathloss_values() {
        let g = LinkGeom {
            d2d: 3000.0,
            d3d: 3005.0,
            elevation_deg: 3.3,
        };
        let los = pathloss_aerial(&g, 2.0, 25.0, 200.0, true);
        assert!((los - 110.533_178_392_732_31).abs() < 1e-9);
        assert!(pathloss_aerial(&g, 2.0, 25.0, 200.0, false) >= los);
        // 22 dB/decade: about 6.6 dB per doubling.
        let g2 = LinkGeom { d3d: 6010.0, ..g };
        let step = pathloss_aerial(&g2, 2.0, 25.0, 200.0, true) - los;
        assert!((step - 6.0).abs() <= 1.0, "{step}");
    }

    #[test]
    fn antenna_pattern() {
        let p = AntennaPattern::default();
        assert_eq!(antenna_gain(-10.0, &p), 8.0);
        assert!((antenna_gain(-5.0, &p) - 5.0).abs() < 1e-12);
        assert!((antenna_gain(-15.0, &p) - 5.0).abs() < 1e-12);
        assert_eq!(antenna_gain(60.0, &p), -12.0);
        // Attenuation never exceeds the sidelobe level.
        for k in -90..=90 {
            let g = antenna_gain(k as f64, &p);
            assert!(g >= p.gmax_db - p.sla_db && g <= p.gmax_db);
            assert_eq!(g, antenna_gain(-20.0 - k as f64, &p));
        }
    }

    #[test]
    fn shadowing_statistics() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        assert_eq!(shadowing_sample(0.0, &mut rng), 0.0);
        let n = 1_000_000;
        let std = 4.0;
        let xs: Vec<f64> = (0..n).map(|_| shadowing_sample(std, &mut rng)).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let sd = (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt();
        assert!(mean.abs() < 3.0 * std / 1e3);
        assert!((sd / std - 1.0).abs() < 0.01);
    }

    #[test]
    fn rayleigh_statistics() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let n = 1_000_000;
        let (mut p, mut re, mut im) = (0.0, 0.0, 0.0);
        let mut bins = [0usize; 8];
        for _ in 0..n {
            let g = rayleigh_sample(&mut rng);
            p += g.norm_sqr();
            re += g.re;
            im += g.im;
            let a = g.arg().rem_euclid(std::f64::consts::TAU);
            bins[((a / (std::f64::consts::TAU / 8.0)) as usize).min(7)] += 1;
        }
        let nf = n as f64;
        assert!((p / nf - 1.0).abs() < 0.01);
        assert!((re / nf).abs() < 3e-3 && (im / nf).abs() < 3e-3);
        let e = nf / 8.0;
        let chi2: f64 = bins.iter().map(|&c| (c as f64 - e).powi(2) / e).sum();
        // 7 dof, 1% level.
        assert!(chi2 < 18.475, "chi2 = {chi2}");
    }

    #[test]
    fn rician_unit_power() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let n = 200_000;
        let k = db_to_linear(AERIAL_LOS_K_DB);
        let p: f64 = (0..n)
            .map(|_| rician_sample(k, &mut rng).norm_sqr())
            .sum::<f64>()
            / n as f64;
        assert!((p - 1.0).abs() < 0.01);
    }

    #[test]
    fn draw_composition() {
        let d = ChannelDraw {
            pathloss_db: 0.0,
            shadowing_db: 0.0,
            antenna_gain_db: 0.0,
            fading: Complex64::new(1.0, 0.0),
            los: true,
        };
        assert_eq!(d.power_gain(), 1.0);
        let d = ChannelDraw {
            pathloss_db: 100.0,
            ..d
        };
        assert!((d.power_gain() / 1e-10 - 1.0).abs() < 1e-12);

        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let g = geom(500.0, 23.5);
        let kind = LinkKind::Terrestrial {
            bs_height: 25.0,
            ue_height: 1.5,
        };
        for _ in 0..1000 {
            let d = draw_link(kind, &g, &AntennaPattern::default(), 2.0, &mut rng);
            let expected = 10f64.powf((-d.pathloss_db + d.shadowing_db + d.antenna_gain_db) / 10.0)
                * d.fading.norm_sqr();
            assert_eq!(d.power_gain(), expected);
            assert!((d.amplitude().norm_sqr() / expected - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn aerial_links_at_200m_always_los() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let kind = LinkKind::Aerial {
            bs_height: 25.0,
            uav_height: 200.0,
        };
        for d in [100.0, 1000.0, 3000.0, 8000.0] {
            for _ in 0..500 {
                assert!(
                    draw_link(
                        kind,
                        &geom(d, 175.0),
                        &AntennaPattern::default(),
                        2.0,
                        &mut rng
                    )
                    .los
                );
            }
        }
    }
}
