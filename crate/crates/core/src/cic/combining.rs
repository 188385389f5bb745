//! MMSE combining against rank-one-plus-diagonal interference.

use super::{CicError, LinkRealization};
use nalgebra::DMatrix;
use num_complex::{Complex, Complex64};
use twofloat::TwoFloat;

/// Per-BS combining weights applied at BS1.
#[derive(Debug, Clone, PartialEq)]
pub struct Weights(pub Vec<Complex64>);

impl Weights {
    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|w| w.norm_sqr() == 0.0)
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        Self(self.0.iter().map(|w| w * c).collect())
    }
}

/// `sum_i conj(a_i) b_i`
fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// `(p_int v v^H + diag(gamma))^{-1} t` through the Sherman-Morrison
/// identity. Infinite `gamma` entries zero the matching weight.
pub fn mmse_weights(
    target: &[Complex64],
    p_int: f64,
    int_vec: &[Complex64],
    gamma_diag: &[f64],
) -> Result<Weights, CicError> {
    let n = target.len();
    if int_vec.len() != n || gamma_diag.len() != n {
        return Err(CicError::LengthMismatch(format!(
            "target {n}, interference {}, diagonal {}",
            int_vec.len(),
            gamma_diag.len()
        )));
    }
    if gamma_diag.iter().all(|g| g.is_infinite()) {
        return Err(CicError::AllInfiniteNoise);
    }
    let inv: Vec<f64> = gamma_diag.iter().map(|g| 1.0 / g).collect();
    let a: Vec<Complex64> = target.iter().zip(&inv).map(|(t, g)| t * g).collect();
    let b: Vec<Complex64> = int_vec.iter().zip(&inv).map(|(v, g)| v * g).collect();
    let vha = inner(int_vec, &a);
    let vhb = inner(int_vec, &b).re;
    let coef = vha * (p_int / (1.0 + p_int * vhb));
    Ok(Weights(
        a.iter().zip(&b).map(|(a, b)| a - b * coef).collect(),
    ))
}

/// `p_sig |w^H s|^2 / (p_int |w^H v|^2 + w^H diag(gamma) w)`.
///
/// A nonzero weight on an infinite-noise coordinate makes the denominator
/// infinite, so the SINR is zero.
pub fn sinr_quadratic(
    w: &Weights,
    p_sig: f64,
    sig_vec: &[Complex64],
    p_int: f64,
    int_vec: &[Complex64],
    gamma_diag: &[f64],
) -> Result<f64, CicError> {
    let n = w.0.len();
    if sig_vec.len() != n || int_vec.len() != n || gamma_diag.len() != n {
        return Err(CicError::LengthMismatch(format!(
            "weights {n}, signal {}, interference {}, diagonal {}",
            sig_vec.len(),
            int_vec.len(),
            gamma_diag.len()
        )));
    }
    if w.is_zero() {
        return Err(CicError::ZeroWeights);
    }
    let mut noise = 0.0;
    for (wi, &g) in w.0.iter().zip(gamma_diag) {
        let m = wi.norm_sqr();
        if m == 0.0 {
            continue;
        }
        if g.is_infinite() {
            return Ok(0.0);
        }
        noise += m * g;
    }
    let num = p_sig * inner(&w.0, sig_vec).norm_sqr();
    let den = p_int * inner(&w.0, int_vec).norm_sqr() + noise;
    Ok(num / den)
}

/// `(diag(gamma) + p f f^H)^{-1}` via the matrix inversion lemma.
pub fn rank_one_update_inverse(gamma_diag: &[f64], f: &[Complex64], p: f64) -> DMatrix<Complex64> {
    let n = gamma_diag.len();
    assert_eq!(f.len(), n, "gamma and f lengths differ");
    let g: Vec<Complex64> = f.iter().zip(gamma_diag).map(|(f, g)| f / g).collect();
    let fhg: f64 = f
        .iter()
        .zip(gamma_diag)
        .map(|(f, g)| f.norm_sqr() / g)
        .sum();
    let scale = p / (1.0 + p * fhg);
    DMatrix::from_fn(n, n, |i, j| {
        let diag = if i == j {
            Complex64::new(1.0 / gamma_diag[i], 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        };
        diag - g[i] * g[j].conj() * scale
    })
}

type Dd = Complex<TwoFloat>;

fn dd(x: f64) -> TwoFloat {
    TwoFloat::from(x)
}

fn dd_c(z: Complex64) -> Dd {
    Dd::new(dd(z.re), dd(z.im))
}

fn dd_norm_sqr(z: &Dd) -> TwoFloat {
    z.re * z.re + z.im * z.im
}

// twofloat's own division forms its reciprocal residual in plain f64 and so
// only carries about 53 bits; long division with exact residuals keeps ~104.
fn dd_div(a: TwoFloat, b: TwoFloat) -> TwoFloat {
    let q1 = a.hi() / b.hi();
    let r = a - b * q1;
    let q2 = r.hi() / b.hi();
    let r = r - b * q2;
    let q3 = r.hi() / b.hi();
    TwoFloat::from(q1) + (TwoFloat::from(q2) + q3)
}

fn dd_c_div(a: Dd, b: Dd) -> Dd {
    let den = dd_norm_sqr(&b);
    let num = a * b.conj();
    Dd::new(dd_div(num.re, den), dd_div(num.im, den))
}

/// UE1's SINR under linear MMSE suppression, by solving
/// `(pu f f^H + Gamma) x = e_1` directly and taking `p1 |h1|^2 x_1`.
///
/// Coordinates with infinite quantization noise are dropped first. The
/// system is assembled and eliminated (partial pivoting) in double-double
/// arithmetic, since at large UAV-to-noise ratios the f64 matrix entries
/// alone no longer determine the result to f64 accuracy.
pub fn sinr_ue1_qf2_direct(r: &LinkRealization) -> Result<f64, CicError> {
    let keep: Vec<usize> = (0..r.f.len()).filter(|&i| r.q[i].is_finite()).collect();
    let n = keep.len();
    let pu = dd(r.pu);
    let zero = Dd::new(dd(0.0), dd(0.0));

    let mut a: Vec<Vec<Dd>> = keep
        .iter()
        .enumerate()
        .map(|(row, &i)| {
            let fi = dd_c(r.f[i]);
            keep.iter()
                .enumerate()
                .map(|(col, &j)| {
                    let mut e = fi * dd_c(r.f[j]).conj() * Dd::new(pu, dd(0.0));
                    if row == col {
                        e.re += dd(r.sigma2[i]) + dd(r.q[i]);
                    }
                    e
                })
                .collect()
        })
        .collect();
    let mut rhs = vec![zero; n];
    // keep[0] == 0: BS1 never carries quantization noise.
    rhs[0] = Dd::new(dd(1.0), dd(0.0));

    for k in 0..n {
        let pivot = (k..n)
            .max_by(|&x, &y| {
                dd_norm_sqr(&a[x][k])
                    .partial_cmp(&dd_norm_sqr(&a[y][k]))
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .unwrap();
        if dd_norm_sqr(&a[pivot][k]) == dd(0.0) {
            return Err(CicError::Singular);
        }
        a.swap(k, pivot);
        rhs.swap(k, pivot);
        for row in k + 1..n {
            let factor = dd_c_div(a[row][k], a[k][k]);
            if dd_norm_sqr(&factor) == dd(0.0) {
                continue;
            }
            let (upper, lower) = a.split_at_mut(row);
            for (dst, &src) in lower[0][k..].iter_mut().zip(&upper[k][k..]) {
                *dst -= src * factor;
            }
            let t = rhs[k] * factor;
            rhs[row] -= t;
        }
    }
    let mut x = vec![zero; n];
    for k in (0..n).rev() {
        let mut acc = rhs[k];
        for (&akc, &xc) in a[k][k + 1..].iter().zip(&x[k + 1..]) {
            acc -= akc * xc;
        }
        x[k] = dd_c_div(acc, a[k][k]);
    }
    let x0 = x[0].re;
    let val = dd(r.p1) * dd(r.h1.norm_sqr()) * x0;
    Ok(val.hi() + val.lo())
}
