//! Hexagonal cell layout and 3D link geometry.
//!
//! Cells are flat-top hexagons with the base station at the center. Site 0 of a
//! [`Layout`] is the victim base station (BS1); the remaining sites are its
//! helpers, ordered ring by ring and counterclockwise from the +x axis within
//! each ring.

use rand::Rng;
use std::f64::consts::{PI, TAU};

const SQRT_3: f64 = 1.732_050_807_568_877_2;

/// A node position in meters. `height` is above ground.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Site {
    pub x: f64,
    pub y: f64,
    pub height: f64,
}

impl Site {
    pub fn new(x: f64, y: f64, height: f64) -> Self {
        Self { x, y, height }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Layout {
    /// Center-to-vertex radius of every cell.
    pub cell_radius: f64,
    pub tiers: u32,
    /// Index 0 is BS1, indices `1..=helper_count()` are the helping BSs.
    pub sites: Vec<Site>,
}

impl Layout {
    pub fn helper_count(&self) -> usize {
        self.sites.len() - 1
    }

    pub fn victim(&self) -> &Site {
        &self.sites[0]
    }

    pub fn helpers(&self) -> &[Site] {
        &self.sites[1..]
    }

    /// Distance between the centers of two adjacent cells.
    pub fn inter_site_distance(&self) -> f64 {
        SQRT_3 * self.cell_radius
    }
}

/// Planar distance, 3D distance and elevation of one radio link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkGeom {
    pub d2d: f64,
    pub d3d: f64,
    /// Angle at the receiver toward the transmitter above the horizontal plane.
    pub elevation_deg: f64,
}

impl LinkGeom {
    /// Height difference between the two ends, recovered from the distances.
    pub fn height_gap(&self) -> f64 {
        (self.d3d * self.d3d - self.d2d * self.d2d).max(0.0).sqrt()
    }
}

/// Number of sites in a layout with `tiers` rings around the center.
pub fn site_count(tiers: u32) -> usize {
    let m = tiers as usize;
    1 + 3 * m * (m + 1)
}

/// BS1 at the origin plus every cell center within `tiers` rings.
pub fn hex_layout(cell_radius: f64, tiers: u32, bs_height: f64) -> Layout {
    let mut sites = Vec::with_capacity(site_count(tiers));
    sites.push(Site::new(0.0, 0.0, bs_height));

    let t = tiers as i64;
    for ring in 1..=t {
        let mut ring_sites: Vec<(f64, Site)> = Vec::with_capacity(6 * ring as usize);
        // Axial coordinates of a flat-top grid.
        for q in -ring..=ring {
            for r in (-ring).max(-q - ring)..=ring.min(-q + ring) {
                let s = -q - r;
                if q.abs().max(r.abs()).max(s.abs()) != ring {
                    continue;
                }
                let x = cell_radius * 1.5 * q as f64;
                let y = cell_radius * SQRT_3 * (r as f64 + q as f64 / 2.0);
                let mut angle = y.atan2(x);
                if angle < -1e-12 {
                    angle += TAU;
                }
                ring_sites.push((angle.max(0.0), Site::new(x, y, bs_height)));
            }
        }
        ring_sites.sort_by(|a, b| a.0.total_cmp(&b.0));
        sites.extend(ring_sites.into_iter().map(|(_, s)| s));
    }

    Layout {
        cell_radius,
        tiers,
        sites,
    }
}

/// Whether `(x, y)`, relative to a cell center, lies in the flat-top hexagon.
pub fn in_hexagon(x: f64, y: f64, cell_radius: f64) -> bool {
    let (ax, ay) = (x.abs(), y.abs());
    ay <= SQRT_3 / 2.0 * cell_radius && SQRT_3 * ax + ay <= SQRT_3 * cell_radius
}

/// Uniform point inside the hexagon of the given center, by rejection from
/// the bounding box.
pub fn uniform_hex_point<R: Rng + ?Sized>(
    center: (f64, f64),
    cell_radius: f64,
    rng: &mut R,
) -> (f64, f64) {
    let half_height = SQRT_3 / 2.0 * cell_radius;
    loop {
        let x = (2.0 * rng.random::<f64>() - 1.0) * cell_radius;
        let y = (2.0 * rng.random::<f64>() - 1.0) * half_height;
        if in_hexagon(x, y, cell_radius) {
            return (center.0 + x, center.1 + y);
        }
    }
}

/// Uniform point in the hexagon at least `min_distance` (planar) from its
/// center. `min_distance` must be well below the inner radius.
pub fn uniform_hex_point_excluding<R: Rng + ?Sized>(
    center: (f64, f64),
    cell_radius: f64,
    min_distance: f64,
    rng: &mut R,
) -> (f64, f64) {
    debug_assert!(min_distance < SQRT_3 / 2.0 * cell_radius);
    loop {
        let p = uniform_hex_point(center, cell_radius, rng);
        if (p.0 - center.0).hypot(p.1 - center.1) >= min_distance {
            return p;
        }
    }
}

pub fn link_geom(tx: &Site, rx: &Site) -> LinkGeom {
    let d2d = (tx.x - rx.x).hypot(tx.y - rx.y);
    let dh = tx.height - rx.height;
    let d3d = d2d.hypot(dh);
    let elevation_deg = dh.atan2(d2d) * 180.0 / PI;
    LinkGeom {
        d2d,
        d3d,
        elevation_deg,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_tiers_is_single_site() {
        let l = hex_layout(800.0, 0, 25.0);
        assert_eq!(l.sites.len(), 1);
        assert_eq!(l.helper_count(), 0);
        assert_eq!((l.sites[0].x, l.sites[0].y), (0.0, 0.0));
    }

    #[test]
    fn first_ring_at_inter_site_distance() {
        let l = hex_layout(800.0, 1, 25.0);
        assert_eq!(l.sites.len(), 7);
        for s in l.helpers() {
            let d = s.x.hypot(s.y);
            assert!((d - 1_385.640_646_055_102).abs() < 1e-9, "{d}");
        }
    }

    #[test]
    fn ring_counts() {
        assert_eq!(hex_layout(800.0, 2, 25.0).sites.len(), 19);
        assert_eq!(hex_layout(800.0, 3, 25.0).sites.len(), 37);
        for m in 0..6 {
            assert_eq!(hex_layout(500.0, m, 25.0).sites.len(), site_count(m));
        }
    }

    #[test]
    fn ring_order_counterclockwise_from_x_axis() {
        let l = hex_layout(800.0, 2, 25.0);
        let angle = |s: &Site| {
            let a = s.y.atan2(s.x);
            if a < -1e-12 {
                a + TAU
            } else {
                a.max(0.0)
            }
        };
        let first = &l.sites[1..7];
        let second = &l.sites[7..19];
        for ring in [first, second] {
            for w in ring.windows(2) {
                assert!(angle(&w[0]) < angle(&w[1]));
            }
        }
        // Flat-top: the first neighbor sits at 30 degrees.
        assert!((angle(&l.sites[1]) - PI / 6.0).abs() < 1e-12);
        // Second ring starts on the +x axis.
        assert!(angle(&l.sites[7]).abs() < 1e-12);
    }

    #[test]
    fn adjacent_sites_are_sqrt3_radius_apart() {
        let r = 800.0;
        let l = hex_layout(r, 3, 25.0);
        let isd = l.inter_site_distance();
        let mut adjacent = 0;
        for (i, a) in l.sites.iter().enumerate() {
            for b in &l.sites[i + 1..] {
                let d = (a.x - b.x).hypot(a.y - b.y);
                assert!(d > isd * (1.0 - 1e-9), "sites closer than ISD: {d}");
                if (d - isd).abs() <= 1e-9 * isd {
                    adjacent += 1;
                }
            }
        }
        // Edges of a hexagonal patch with 3 rings.
        assert_eq!(adjacent, 90);
    }

    #[test]
    fn hex_points_stay_inside() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20_000 {
            let (x, y) = uniform_hex_point((100.0, -50.0), 800.0, &mut rng);
            assert!(in_hexagon(x - 100.0, y + 50.0, 800.0));
        }
    }

    #[test]
    fn hex_point_mean_is_center() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 1_000_000;
        let (mut sx, mut sy, mut sxx, mut syy) = (0.0, 0.0, 0.0, 0.0);
        for _ in 0..n {
            let (x, y) = uniform_hex_point((0.0, 0.0), 1.0, &mut rng);
            sx += x;
            sy += y;
            sxx += x * x;
            syy += y * y;
        }
        let nf = n as f64;
        let (mx, my) = (sx / nf, sy / nf);
        let (stdx, stdy) = ((sxx / nf - mx * mx).sqrt(), (syy / nf - my * my).sqrt());
        assert!(mx.abs() < 3.0 * stdx / nf.sqrt());
        assert!(my.abs() < 3.0 * stdy / nf.sqrt());
    }

    #[test]
    fn hex_point_scale_invariance() {
        let mut a = ChaCha8Rng::seed_from_u64(5);
        let mut b = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..1000 {
            let (x1, y1) = uniform_hex_point((0.0, 0.0), 1.0, &mut a);
            let (xr, yr) = uniform_hex_point((0.0, 0.0), 1234.5, &mut b);
            assert!((xr / 1234.5 - x1).abs() < 1e-12);
            assert!((yr / 1234.5 - y1).abs() < 1e-12);
        }
    }

    #[test]
    fn hex_points_uniform_over_sectors() {
        // Six 60-degree sectors have equal area; chi-square with 5 dof at 1%.
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let n = 100_000;
        let mut counts = [0usize; 6];
        for _ in 0..n {
            let (x, y) = uniform_hex_point((0.0, 0.0), 800.0, &mut rng);
            let a = y.atan2(x).rem_euclid(TAU);
            counts[((a / (PI / 3.0)) as usize).min(5)] += 1;
        }
        let expected = n as f64 / 6.0;
        let chi2: f64 = counts
            .iter()
            .map(|&c| (c as f64 - expected).powi(2) / expected)
            .sum();
        assert!(chi2 < 15.086, "chi2 = {chi2}");
    }

    #[test]
    fn excluded_disc_respected() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10_000 {
            let (x, y) = uniform_hex_point_excluding((0.0, 0.0), 800.0, 35.0, &mut rng);
            assert!(x.hypot(y) >= 35.0);
        }
    }

    #[test]
    fn vertical_link() {
        let g = link_geom(&Site::new(5.0, 5.0, 200.0), &Site::new(5.0, 5.0, 25.0));
        assert_eq!(g.d2d, 0.0);
        assert_eq!(g.d3d, 175.0);
        assert!((g.elevation_deg - 90.0).abs() < 1e-12);
    }

    #[test]
    fn slanted_link() {
        let g = link_geom(&Site::new(3000.0, 0.0, 200.0), &Site::new(0.0, 0.0, 25.0));
        assert!((g.d3d - 3_005.099_831_952_343).abs() < 1e-9);
        assert!((g.elevation_deg - 3.338_470_543_764_352).abs() < 1e-9);
        assert!((g.height_gap() - 175.0).abs() < 1e-6);
    }

    #[test]
    fn horizontal_link_and_symmetry() {
        let a = Site::new(0.0, 0.0, 25.0);
        let b = Site::new(60.0, 80.0, 25.0);
        let g = link_geom(&a, &b);
        assert_eq!((g.d2d, g.d3d, g.elevation_deg), (100.0, 100.0, 0.0));

        let up = Site::new(-400.0, 300.0, 1.5);
        let ab = link_geom(&up, &a);
        let ba = link_geom(&a, &up);
        assert_eq!(ab.d2d, ba.d2d);
        assert_eq!(ab.d3d, ba.d3d);
        assert_eq!(ab.elevation_deg, -ba.elevation_deg);
    }
}
