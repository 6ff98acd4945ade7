//! Jacobian-logarithm variants and the per-row recursions shared by the
//! single and compound BCJR decoders.
//!
//! All trellises here are shift-register trellises: from state `s` input `b`
//! leads to `(s >> 1) + b * S/2`. A row of metrics over states can therefore
//! be updated without index lookups. Rows are kept either in natural state
//! order or in split order (even states, then odd states) so that every
//! inner loop walks contiguous slices and vectorizes.

pub(crate) trait MaxStar {
    fn max_star(a: f64, b: f64) -> f64;
}

pub(crate) struct Exact;
pub(crate) struct MaxLog;
pub(crate) struct Linear;

/// `ln(1 + e^-d)` for `d >= 0`, branch-free, absolute error below 1e-10.
#[inline(always)]
pub(crate) fn log1p_exp_neg(d: f64) -> f64 {
    const SHIFT: f64 = 6_755_399_441_055_744.0; // 1.5 * 2^52
    // 1/k! for k = 9 down to 0.
    const EXP: [f64; 10] = [
        1.0 / 362_880.0,
        1.0 / 40_320.0,
        1.0 / 5_040.0,
        1.0 / 720.0,
        1.0 / 120.0,
        1.0 / 24.0,
        1.0 / 6.0,
        0.5,
        1.0,
        1.0,
    ];
    // 1/(2k + 1) for k = 9 down to 0.
    const ATANH: [f64; 10] = [
        1.0 / 19.0,
        1.0 / 17.0,
        1.0 / 15.0,
        1.0 / 13.0,
        1.0 / 11.0,
        1.0 / 9.0,
        1.0 / 7.0,
        1.0 / 5.0,
        1.0 / 3.0,
        1.0,
    ];
    // e^-d = 2^y; y = n + f with n integer and |f| <= 1/2.
    let y = -d.min(700.0) * std::f64::consts::LOG2_E;
    let shifted = y + SHIFT;
    let n = shifted - SHIFT;
    let f = (y - n) * std::f64::consts::LN_2;
    let mut p = EXP[0];
    for c in &EXP[1..] {
        p = p.mul_add(f, *c);
    }
    let n_bits = shifted.to_bits().wrapping_sub(SHIFT.to_bits()) as i64;
    let t = p * f64::from_bits(((n_bits + 1023) as u64) << 52);
    // ln(1 + t) = 2 atanh(z), z = t / (2 + t) in [0, 1/3].
    let z = t / (2.0 + t);
    let z2 = z * z;
    let mut s = ATANH[0];
    for c in &ATANH[1..] {
        s = s.mul_add(z2, *c);
    }
    2.0 * z * s
}

impl MaxStar for Exact {
    #[inline(always)]
    fn max_star(a: f64, b: f64) -> f64 {
        // NaN from (-inf) - (-inf) is clamped to 700 by `min`.
        a.max(b) + log1p_exp_neg((a - b).abs())
    }
}

impl MaxStar for MaxLog {
    #[inline(always)]
    fn max_star(a: f64, b: f64) -> f64 {
        a.max(b)
    }
}

impl MaxStar for Linear {
    #[inline(always)]
    fn max_star(a: f64, b: f64) -> f64 {
        // Valenti & Sun constants for the linear fit of ln(1 + e^-x).
        const SLOPE: f64 = 0.249_04;
        const KNEE: f64 = 2.506_8;
        let d = (a - b).abs();
        let c = SLOPE * (KNEE - d);
        a.max(b) + if c > 0.0 { c } else { 0.0 }
    }
}

/// Backward step for one row. `next` is the next-section row in natural
/// state order; `g0`/`g1` (metrics of inputs 0 and 1 leaving each state)
/// and `out` are in split order. State `s` goes to `s >> 1` on input 0 and
/// to `(s >> 1) + S/2` on input 1.
#[inline(always)]
pub(crate) fn backward_row<M: MaxStar>(next: &[f64], g0: &[f64], g1: &[f64], out: &mut [f64]) {
    let h = next.len() / 2;
    let (lo, hi) = next.split_at(h);
    for ((out, g0), g1) in out.chunks_exact_mut(h).zip(g0.chunks_exact(h)).zip(g1.chunks_exact(h)) {
        for ((((o, &l), &u), &a), &b) in out.iter_mut().zip(lo).zip(hi).zip(g0).zip(g1) {
            *o = M::max_star(l + a, u + b);
        }
    }
}

/// Like [`backward_row`], combined into `out` with max*.
#[inline(always)]
pub(crate) fn backward_row_acc<M: MaxStar>(next: &[f64], g0: &[f64], g1: &[f64], out: &mut [f64]) {
    let h = next.len() / 2;
    let (lo, hi) = next.split_at(h);
    for ((out, g0), g1) in out.chunks_exact_mut(h).zip(g0.chunks_exact(h)).zip(g1.chunks_exact(h)) {
        for ((((o, &l), &u), &a), &b) in out.iter_mut().zip(lo).zip(hi).zip(g0).zip(g1) {
            *o = M::max_star(*o, M::max_star(l + a, u + b));
        }
    }
}

/// Forward step for one row. `cur`, `g0` and `g1` are in split order, `out`
/// in natural order: states `2q` and `2q + 1` both feed `q` (input 0) and
/// `q + S/2` (input 1).
#[inline(always)]
pub(crate) fn forward_row<M: MaxStar>(cur: &[f64], g0: &[f64], g1: &[f64], out: &mut [f64]) {
    let h = cur.len() / 2;
    let (ce, co) = cur.split_at(h);
    for (out, g) in out.chunks_exact_mut(h).zip([g0, g1]) {
        let (ge, go) = g.split_at(h);
        for ((((o, &ae), &ao), &xe), &xo) in out.iter_mut().zip(ce).zip(co).zip(ge).zip(go) {
            *o = M::max_star(ae + xe, ao + xo);
        }
    }
}

/// Like [`forward_row`], combined into `out` with max*.
#[inline(always)]
pub(crate) fn forward_row_acc<M: MaxStar>(cur: &[f64], g0: &[f64], g1: &[f64], out: &mut [f64]) {
    let h = cur.len() / 2;
    let (ce, co) = cur.split_at(h);
    for (out, g) in out.chunks_exact_mut(h).zip([g0, g1]) {
        let (ge, go) = g.split_at(h);
        for ((((o, &ae), &ao), &xe), &xo) in out.iter_mut().zip(ce).zip(co).zip(ge).zip(go) {
            *o = M::max_star(*o, M::max_star(ae + xe, ao + xo));
        }
    }
}

/// Natural order to split order: even states first, then odd states.
#[inline(always)]
pub(crate) fn to_split(natural: &[f64], split: &mut [f64]) {
    let (e, o) = split.split_at_mut(natural.len() / 2);
    for ((pair, e), o) in natural.chunks_exact(2).zip(e).zip(o) {
        *e = pair[0];
        *o = pair[1];
    }
}

/// Inverse of [`to_split`].
#[inline(always)]
pub(crate) fn to_natural(split: &[f64], natural: &mut [f64]) {
    let (e, o) = split.split_at(split.len() / 2);
    for ((pair, &e), &o) in natural.chunks_exact_mut(2).zip(e).zip(o) {
        pair[0] = e;
        pair[1] = o;
    }
}

const LANES: usize = 8;

/// max* over `i` of `a[i] + b[i]`.
#[inline(always)]
pub(crate) fn joint_metric<M: MaxStar>(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [f64::NEG_INFINITY; LANES];
    let mut ca = a.chunks_exact(LANES);
    let mut cb = b.chunks_exact(LANES);
    for (x, y) in (&mut ca).zip(&mut cb) {
        for i in 0..LANES {
            acc[i] = M::max_star(acc[i], x[i] + y[i]);
        }
    }
    for (x, y) in ca.remainder().iter().zip(cb.remainder()) {
        acc[0] = M::max_star(acc[0], x + y);
    }
    acc.into_iter().fold(f64::NEG_INFINITY, M::max_star)
}

/// Subtracts the maximum so metrics stay bounded.
pub(crate) fn normalize(v: &mut [f64]) {
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m.is_finite() {
        v.iter_mut().for_each(|x| *x -= m);
    }
}
