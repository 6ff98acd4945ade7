use crate::dd::Real;
use crate::error::{invalid, Error, Result};
use std::f64::consts::{FRAC_1_PI, FRAC_PI_2, SQRT_2};

/// Gaussian tail probability.
pub fn q_function(x: f64) -> f64 {
    0.5 * libm::erfc(x / SQRT_2)
}

/// `sqrt(a / (1 + a))` and `1 - sqrt(a / (1 + a))`, the latter without
/// cancellation for large `a`.
#[inline]
fn root<T: Real>(a: T) -> (T, T) {
    let one = T::from(1.0);
    let u = (a / (one + a)).sqrt();
    (u, one / ((one + u) * (one + a)))
}

fn check(args: &[f64]) -> Result<()> {
    match args.iter().find(|x| !(**x >= 0.0) || x.is_infinite()) {
        Some(x) => invalid(format!("integral parameter {x} must be finite and >= 0")),
        None => Ok(()),
    }
}

/// `(1/pi) int_0^{pi/2} prod_i sin^2/(sin^2 + a_i) dtheta` for one, two or
/// three parameters. Zero parameters contribute a factor 1.
pub(crate) fn product_integral<T: Real>(args: &[T]) -> T {
    let half = T::from(0.5);
    let two = T::from(2.0);
    let mut nz = [T::from(0.0); 3];
    let mut n = 0;
    for &a in args {
        if a.is_positive() {
            nz[n] = a;
            n += 1;
        }
    }
    match n {
        0 => half,
        1 => half * root(nz[0]).1,
        2 => {
            let (u, cu) = root(nz[0]);
            let (v, cv) = root(nz[1]);
            half * cu * cv * (u * v + u + v) / (u + v)
        }
        _ => {
            let (u, cu) = root(nz[0]);
            let (v, cv) = root(nz[1]);
            let (w, cw) = root(nz[2]);
            let (uu, vv, ww) = (u * u, v * v, w * w);
            let p = uu * vv * w
                + uu * v * ww
                + u * vv * ww
                + uu * vv
                + uu * ww
                + vv * ww
                + two * (uu * v * w + u * vv * w + u * v * ww)
                + uu * v
                + uu * w
                + u * vv
                + u * ww
                + vv * w
                + v * ww
                + two * u * v * w;
            half * cu * cv * cw * p / ((u + v) * (u + w) * (v + w))
        }
    }
}

/// `(1/pi) int_0^{pi/2} sin^2/(sin^2 + a) dtheta = (1 - sqrt(a/(1+a)))/2`,
/// the fading-averaged error probability of one Rayleigh block.
pub fn i0(a: f64) -> Result<f64> {
    check(&[a])?;
    Ok(product_integral(&[a]))
}

/// Two independently faded Rayleigh blocks:
/// `(1/pi) int_0^{pi/2} sin^4/((sin^2 + a)(sin^2 + b)) dtheta`.
///
/// Evaluated in a form that is exact at `a = b` and has no cancellation.
pub fn i1(a: f64, b: f64) -> Result<f64> {
    check(&[a, b])?;
    Ok(product_integral(&[a, b]))
}

/// Three independently faded blocks, the three-factor analogue of [`i1`].
pub fn i2(a: f64, b: f64, c: f64) -> Result<f64> {
    check(&[a, b, c])?;
    Ok(product_integral(&[a, b, c]))
}

/// One Rayleigh block of `weight` symbols with mean SNR `mean`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MgfFactor {
    pub weight: f64,
    pub mean: f64,
}

/// A block of `weight` symbols over the best of several relays, each an
/// exponential channel with the given rate (inverse mean).
#[derive(Debug, Clone, PartialEq)]
pub struct SelectedFactor {
    pub weight: f64,
    pub rates: Vec<f64>,
}

/// MGF of the maximum of independent exponentials, `E{exp(-s X)}`.
///
/// Computed from the order in which the exponentials expire: while the set
/// `A` is alive the next expiry takes `Exp(R_A)` time, and member `k` is the
/// one to expire with probability `r_k / R_A`. Every term is positive, so no
/// cancellation occurs. Cost is `O(n 2^n)`.
pub fn max_exponential_mgf(rates: &[f64], s: f64) -> f64 {
    let n = rates.len();
    let full = (1usize << n) - 1;
    let mut v = vec![0.0; full + 1];
    v[0] = 1.0;
    for mask in 1..=full {
        let total: f64 = (0..n).filter(|k| mask >> k & 1 == 1).map(|k| rates[k]).sum();
        let mut acc = 0.0;
        for k in (0..n).filter(|k| mask >> k & 1 == 1) {
            acc += rates[k] * v[mask & !(1 << k)];
        }
        v[mask] = acc / (total + s);
    }
    v[full]
}

const GK_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const GK_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728_8,
];
const GAUSS_WEIGHTS: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// 15-point Kronrod estimate and its difference to the embedded 7-point
/// Gauss rule.
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * GK_WEIGHTS[7];
    let mut g = fc * GAUSS_WEIGHTS[3];
    for i in 0..7 {
        let x = h * GK_NODES[i];
        let s = f(c - x) + f(c + x);
        k += GK_WEIGHTS[i] * s;
        if i % 2 == 1 {
            g += GAUSS_WEIGHTS[i / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Globally adaptive Gauss-Kronrod quadrature on `[a, b]`. Stops when the
/// summed error estimate is below `rel_tol * |I|` or `abs_tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64, abs_tol: f64) -> Result<f64> {
    const MAX_INTERVALS: usize = 4000;
    let (v, e) = gk15(&f, a, b);
    let mut parts = vec![(a, b, v, e)];
    loop {
        let total: f64 = parts.iter().map(|p| p.2).sum();
        let err: f64 = parts.iter().map(|p| p.3).sum();
        if err <= (rel_tol * total.abs()).max(abs_tol) {
            return Ok(total);
        }
        if parts.len() >= MAX_INTERVALS {
            return Err(Error::Numerical(format!(
                "quadrature did not converge: estimate {total:e}, error {err:e} after {MAX_INTERVALS} intervals"
            )));
        }
        let worst = parts
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .map(|(i, _)| i)
            .expect("non-empty");
        let (lo, hi, _, _) = parts.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        for (x, y) in [(lo, mid), (mid, hi)] {
            let (v, e) = gk15(&f, x, y);
            parts.push((x, y, v, e));
        }
    }
}

/// Relative tolerance of [`mgf_quadrature_oracle`].
pub const ORACLE_REL_TOL: f64 = 1e-13;

/// Pairwise error probability of a codeword spread over independently faded
/// blocks, from the MGF form
/// `(1/pi) int_0^{pi/2} prod_i M_i(1/sin^2) dtheta`, by adaptive quadrature.
///
/// Independent of the closed forms; meant as their check.
pub fn mgf_quadrature_oracle(factors: &[MgfFactor], selected: Option<&SelectedFactor>) -> Result<f64> {
    for f in factors {
        check(&[f.weight, f.mean])?;
    }
    if let Some(sel) = selected {
        check(&[sel.weight])?;
        if sel.rates.is_empty() || sel.rates.iter().any(|r| !(*r > 0.0) || r.is_infinite()) {
            return invalid("selected-channel rates must be positive and finite");
        }
    }
    let integrand = |theta: f64| {
        let s2 = theta.sin().powi(2);
        if s2 == 0.0 {
            return 0.0;
        }
        let mut p = FRAC_1_PI;
        for f in factors {
            p *= s2 / (s2 + f.weight * f.mean);
        }
        if let Some(sel) = selected {
            p *= max_exponential_mgf(&sel.rates, sel.weight / s2);
        }
        p
    };
    integrate(integrand, 0.0, FRAC_PI_2, ORACLE_REL_TOL, 1e-300)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn direct_quad(args: &[f64]) -> f64 {
        let factors: Vec<MgfFactor> = args.iter().map(|&a| MgfFactor { weight: 1.0, mean: a }).collect();
        mgf_quadrature_oracle(&factors, None).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs()
    }

    #[test]
    fn q_values() {
        assert_eq!(q_function(0.0), 0.5);
        assert!((q_function(-1.7) - (1.0 - q_function(1.7))).abs() < 1e-15);
        assert!((q_function(3.0) - 1.349_898_031_630_094_6e-3).abs() < 1e-15);
    }

    #[test]
    fn single_block_reduction() {
        let a = 5.0;
        assert!((i1(a, 0.0).unwrap() - 0.5 * (1.0 - (a / (1.0 + a)).sqrt())).abs() < 1e-16);
        assert_eq!(i1(0.0, 0.0).unwrap(), 0.5);
        assert_eq!(i2(2.0, 7.0, 0.0).unwrap(), i1(2.0, 7.0).unwrap());
    }

    #[test]
    fn symmetric_in_arguments() {
        assert_eq!(i1(2.0, 7.0).unwrap(), i1(7.0, 2.0).unwrap());
        let base = i2(1.0, 2.0, 5.0).unwrap();
        for p in [[1.0, 5.0, 2.0], [2.0, 1.0, 5.0], [2.0, 5.0, 1.0], [5.0, 1.0, 2.0], [5.0, 2.0, 1.0]] {
            assert!(close(i2(p[0], p[1], p[2]).unwrap(), base, 1e-15));
        }
    }

    #[test]
    fn matches_quadrature() {
        assert!(close(i1(3.0, 4.0).unwrap(), direct_quad(&[3.0, 4.0]), 1e-12));
        assert!(close(i2(1.0, 2.0, 5.0).unwrap(), direct_quad(&[1.0, 2.0, 5.0]), 1e-12));
        assert!(close(i1(4.0, 4.0).unwrap(), direct_quad(&[4.0, 4.0]), 1e-12));
        assert!(close(i2(9.0, 9.0, 9.0).unwrap(), direct_quad(&[9.0, 9.0, 9.0]), 1e-12));
        assert!(close(i1(1e6, 3e5).unwrap(), direct_quad(&[1e6, 3e5]), 1e-11));
    }

    #[test]
    fn negative_arguments_are_rejected() {
        assert!(i1(-1.0, 1.0).is_err());
        assert!(i2(1.0, 1.0, -0.5).is_err());
        assert!(i0(f64::NAN).is_err());
    }

    #[test]
    fn max_mgf_matches_inclusion_exclusion() {
        let rates = [0.3, 1.1, 2.0];
        let s = 0.7;
        let mut ie = 0.0;
        for mask in 1u32..8 {
            let r: f64 = (0..3).filter(|k| mask >> k & 1 == 1).map(|k| rates[k]).sum();
            let sign = if mask.count_ones() % 2 == 1 { 1.0 } else { -1.0 };
            ie += sign * r / (r + s);
        }
        assert!(close(max_exponential_mgf(&rates, s), ie, 1e-14));
        assert_eq!(max_exponential_mgf(&rates, 0.0), 1.0);
    }
}
