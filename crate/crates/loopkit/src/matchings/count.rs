//! Exact counts of height-restricted Dyck paths and allowed matchings.

use std::f64::consts::PI;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{LoopError, Result};
use crate::lattice::Dims;

use super::flow::{is_allowed, is_allowed_in, CutOrientation};
use super::for_each_matching;

/// Catalan number `C_n`.
pub fn catalan(n: usize) -> BigUint {
    binomial(2 * n, n) / BigUint::from(n + 1)
}

fn binomial(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    acc
}

/// `C(n, k)` with `k` possibly negative or larger than `n` (then zero).
fn binomial_signed(n: usize, k: i64) -> BigInt {
    if k < 0 || k as usize > n {
        BigInt::zero()
    } else {
        BigInt::from(binomial(n, k as usize))
    }
}

/// Dyck paths of half-length `n` never exceeding height `hmax`:
/// `(M^{2n})_{00}` for the tridiagonal 0/1 matrix of size `hmax + 1`.
pub fn dyck_height_count_transfer(n: usize, hmax: usize) -> BigUint {
    let size = hmax + 1;
    let mut m = vec![vec![BigUint::zero(); size]; size];
    for i in 0..size {
        if i + 1 < size {
            m[i][i + 1] = BigUint::one();
            m[i + 1][i] = BigUint::one();
        }
    }
    let mut result: Vec<Vec<BigUint>> = (0..size)
        .map(|i| (0..size).map(|j| if i == j { BigUint::one() } else { BigUint::zero() }).collect())
        .collect();
    let mut e = 2 * n;
    let mut base = m;
    while e > 0 {
        if e & 1 == 1 {
            result = matmul(&result, &base);
        }
        base = matmul(&base, &base);
        e >>= 1;
    }
    result[0][0].clone()
}

fn matmul(a: &[Vec<BigUint>], b: &[Vec<BigUint>]) -> Vec<Vec<BigUint>> {
    let n = a.len();
    let mut out = vec![vec![BigUint::zero(); n]; n];
    for i in 0..n {
        for k in 0..n {
            if a[i][k].is_zero() {
                continue;
            }
            for j in 0..n {
                if !b[k][j].is_zero() {
                    out[i][j] += &a[i][k] * &b[k][j];
                }
            }
        }
    }
    out
}

/// Same count by the reflection principle for walks confined to `[0, hmax]`:
/// `sum_k C(2n, n + k(h+2)) - C(2n, n + k(h+2) - 1)` over all integers `k`.
pub fn dyck_height_count_binomial(n: usize, hmax: usize) -> BigUint {
    let period = hmax as i64 + 2;
    let n_i = n as i64;
    let kmax = n_i / period + 1;
    let mut total = BigInt::zero();
    for k in -kmax..=kmax {
        total += binomial_signed(2 * n, n_i + k * period) - binomial_signed(2 * n, n_i + k * period - 1);
    }
    total.to_biguint().expect("count is nonnegative")
}

/// Power series with `BigInt` coefficients truncated at degree `deg`.
fn series_inverse_one_minus(t: &[BigInt], deg: usize) -> Vec<BigInt> {
    // 1 / (1 - t) with t(0) = 0: s = 1 + t s.
    let mut s = vec![BigInt::zero(); deg + 1];
    s[0] = BigInt::one();
    for d in 1..=deg {
        let mut acc = BigInt::zero();
        for i in 1..=d {
            if !t[i].is_zero() {
                acc += &t[i] * &s[d - i];
            }
        }
        s[d] = acc;
    }
    s
}

/// Series coefficients of the depth-`depth` continued fraction
/// `D_h = 1 / (1 - z^2 D_{h-1})`, `D_0 = 1`, up to degree `deg`.
fn continued_fraction_series(depth: usize, deg: usize) -> Vec<BigInt> {
    let mut d = vec![BigInt::zero(); deg + 1];
    d[0] = BigInt::one();
    for _ in 0..depth {
        let mut t = vec![BigInt::zero(); deg + 1];
        for i in 0..=deg.saturating_sub(2) {
            if i + 2 <= deg {
                t[i + 2] = d[i].clone();
            }
        }
        d = series_inverse_one_minus(&t, deg);
    }
    d
}

/// Same count as the `z^{2n}` coefficient of the continued fraction of depth `hmax`.
pub fn dyck_height_count_fraction(n: usize, hmax: usize) -> BigUint {
    let s = continued_fraction_series(hmax, 2 * n);
    s[2 * n].to_biguint().expect("coefficient is nonnegative")
}

/// Dyck paths of half-length `n` with maximum height at most `hmax`.
pub fn dyck_height_count(n: usize, hmax: usize) -> BigUint {
    dyck_height_count_transfer(n, hmax)
}

/// Counting route for [`count_allowed`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Brute,
    Dp,
    PaperClosedForms,
}

impl Strategy {
    pub fn name(self) -> &'static str {
        match self {
            Strategy::Brute => "brute",
            Strategy::Dp => "dp",
            Strategy::PaperClosedForms => "paper_closed_forms",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "brute" => Ok(Strategy::Brute),
            "dp" => Ok(Strategy::Dp),
            "paper_closed_forms" | "paper-closed-forms" | "paper" => Ok(Strategy::PaperClosedForms),
            other => Err(LoopError::Malformed(format!("unknown strategy {:?}", other))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CountResult {
    pub n_h: usize,
    pub n_v: usize,
    pub strategy: Strategy,
    #[serde(serialize_with = "ser_big")]
    pub value: BigUint,
}

fn ser_big<S: serde::Serializer>(v: &BigUint, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

/// Largest half-length accepted by the brute-force counter.
pub const BRUTE_MAX_HALF_LENGTH: usize = 14;

/// Number of allowed matchings on an `n_h x n_v` patch.
pub fn count_allowed(dims: Dims, strategy: Strategy) -> Result<CountResult> {
    let n = dims.half_perimeter();
    let value = match strategy {
        Strategy::Brute => {
            if n > BRUTE_MAX_HALF_LENGTH {
                return Err(LoopError::Guard { what: "brute-force count (half-length)", needed: n, cap: BRUTE_MAX_HALF_LENGTH });
            }
            let mut count = 0u64;
            let mut err = None;
            for_each_matching(n, |p| match is_allowed(p, dims) {
                Ok(true) => count += 1,
                Ok(false) => {}
                Err(e) => err = Some(e),
            })?;
            if let Some(e) = err {
                return Err(e);
            }
            BigUint::from(count)
        }
        Strategy::Dp => {
            let (fh, fv) = per_direction_dp(dims);
            fh + fv - catalan(n)
        }
        Strategy::PaperClosedForms => {
            let f1 = dyck_height_count_fraction(n, dims.n_h);
            let f2 = dyck_height_count_fraction(n, dims.n_v);
            f1 + f2 - catalan(n)
        }
    };
    Ok(CountResult { n_h: dims.n_h, n_v: dims.n_v, strategy, value })
}

/// Dyck paths of half-length `n` whose height is at most `limit` after each
/// of the steps `first_cut + 2i` (`i = 0..cuts`), unconstrained elsewhere.
fn cut_restricted(n: usize, first_cut: usize, cuts: usize, limit: usize) -> BigUint {
    let len = 2 * n;
    let mut v = vec![BigUint::zero(); len + 2];
    v[0] = BigUint::one();
    for step in 1..=len {
        let mut w = vec![BigUint::zero(); len + 2];
        for h in 0..=len {
            if v[h].is_zero() {
                continue;
            }
            w[h + 1] += &v[h];
            if h > 0 {
                w[h - 1] += &v[h];
            }
        }
        let is_cut = step >= first_cut && (step - first_cut) % 2 == 0 && (step - first_cut) / 2 < cuts;
        if is_cut {
            for x in w.iter_mut().skip(limit + 1) {
                *x = BigUint::zero();
            }
        }
        v = w;
    }
    v[0].clone()
}

/// Matchings allowed through all vertical cuts, and through all horizontal cuts.
fn per_direction_dp(dims: Dims) -> (BigUint, BigUint) {
    let n = dims.half_perimeter();
    let (h, v) = (dims.n_h, dims.n_v);
    let fh = cut_restricted(n, v + 2, h.saturating_sub(1), v);
    let fv = cut_restricted(n, h + 2, v.saturating_sub(1), h);
    (fh, fv)
}

/// Evaluations of the printed closed forms next to the exact counts.
#[derive(Debug, Clone, Serialize)]
pub struct ClosedFormReport {
    pub n_h: usize,
    pub n_v: usize,
    /// Trigonometric line with `sin` to the first power, as printed.
    pub trig_printed: f64,
    /// Trigonometric line with `sin^2`, the spectral-decomposition value.
    pub trig_squared: f64,
    /// Binomial line as printed.
    pub binomial_printed: String,
    /// `z^{2N}` coefficient of the continued fraction with `n_h` levels.
    pub fraction_coefficient: String,
    /// The printed derivative, i.e. `(2N)!` times the coefficient.
    pub fraction_derivative: String,
    /// Dyck paths with global height at most `n_h`.
    pub global_height: String,
    /// Matchings allowed through every vertical cut (cut-step truncation).
    pub cut_criterion_vertical: String,
    /// Matchings allowed through every horizontal cut.
    pub cut_criterion_horizontal: String,
    pub catalan: String,
    /// Total implied by the global-height reading.
    pub total_global_height: String,
    /// Total from the cut criterion.
    pub total_dp: String,
    /// Brute-force total where affordable.
    pub total_brute: Option<String>,
}

fn to_f64(x: &BigUint) -> f64 {
    x.to_f64().unwrap_or(f64::INFINITY)
}

/// Evaluates every printed line for `f(n_h, n_v)` and tabulates it against
/// the exact counts.
pub fn paper_closed_forms(dims: Dims) -> Result<ClosedFormReport> {
    let n = dims.half_perimeter();
    let h = dims.n_h;
    let hp2 = (h + 2) as f64;
    let pref = 4f64.powi(n as i32) / (1.0 + h as f64 / 2.0);
    let mut s1 = 0.0;
    let mut s2 = 0.0;
    for j in 1..=h + 2 {
        let a = PI * j as f64 / hp2;
        let c = a.cos().powi(2 * n as i32);
        s1 += a.sin() * c;
        s2 += a.sin().powi(2) * c;
    }
    let period = h as i64 + 2;
    let n_i = n as i64;
    let mut binom = BigInt::zero();
    let mut k = 1i64;
    while n_i - k * period + 1 >= 0 {
        let base = n_i - k * period;
        binom += binomial_signed(2 * n, base - 1) - BigInt::from(2) * binomial_signed(2 * n, base)
            + binomial_signed(2 * n, base + 1);
        k += 1;
    }
    let coef = dyck_height_count_fraction(n, h);
    let fact: BigUint = (1..=2 * n).map(BigUint::from).product();
    let global_h = dyck_height_count(n, h);
    let global_v = dyck_height_count(n, dims.n_v);
    let cat = catalan(n);
    let (fh, fv) = per_direction_dp(dims);
    let total_brute = if n <= 10 {
        Some(count_allowed(dims, Strategy::Brute)?.value.to_string())
    } else {
        None
    };
    Ok(ClosedFormReport {
        n_h: dims.n_h,
        n_v: dims.n_v,
        trig_printed: pref * s1,
        trig_squared: pref * s2,
        binomial_printed: binom.to_string(),
        fraction_coefficient: coef.to_string(),
        fraction_derivative: (&coef * fact).to_string(),
        global_height: global_h.to_string(),
        cut_criterion_vertical: fh.to_string(),
        cut_criterion_horizontal: fv.to_string(),
        catalan: cat.to_string(),
        total_global_height: (BigInt::from(global_h) + BigInt::from(global_v) - BigInt::from(cat.clone())).to_string(),
        total_dp: (fh + fv - cat).to_string(),
        total_brute,
    })
}

/// `sqrt(pi)/2 + sqrt(pi)/2 (alpha-1)^{3/2} - 1/sqrt(pi)`.
pub fn k_paper(alpha: f64) -> f64 {
    let sp = PI.sqrt();
    sp / 2.0 + sp / 2.0 * (alpha - 1.0).powf(1.5) - 1.0 / sp
}

#[derive(Debug, Clone, Serialize)]
pub struct AsymptoticRow {
    pub n: usize,
    pub n_h: usize,
    pub n_v: usize,
    /// `N(n_h, n_v) N^{3/2} / 4^N`.
    pub ratio: f64,
    /// Same normalisation applied to the Catalan number.
    pub catalan_ratio: f64,
}

/// log2 of a big integer, accurate to double precision.
pub fn log2_big(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 1000 {
        return to_f64(x).log2();
    }
    let shift = bits - 64;
    let top = (x >> shift).to_f64().expect("fits");
    top.log2() + shift as f64
}

/// Ratios `N N^{3/2}/4^N` from dp counts with `n_h = N / alpha`.
pub fn asymptotic_ratio(alpha: f64, n_list: &[usize]) -> Result<Vec<AsymptoticRow>> {
    let mut rows = Vec::new();
    for &n in n_list {
        let nh = n as f64 / alpha;
        if (nh - nh.round()).abs() > 1e-9 || nh.round() < 1.0 || nh.round() as usize >= n {
            return Err(LoopError::Precondition(format!("N = {} is not a multiple of alpha = {}", n, alpha)));
        }
        let n_h = nh.round() as usize;
        let dims = Dims::open(n_h, n - n_h)?;
        let value = count_allowed(dims, Strategy::Dp)?.value;
        let scale = 1.5 * (n as f64).log2() - 2.0 * n as f64;
        rows.push(AsymptoticRow {
            n,
            n_h,
            n_v: n - n_h,
            ratio: (log2_big(&value) + scale).exp2(),
            catalan_ratio: (log2_big(&catalan(n)) + scale).exp2(),
        });
    }
    Ok(rows)
}

/// One square patch in [`entropy_scaling`].
#[derive(Debug, Clone, Serialize)]
pub struct EntropyRow {
    pub side: usize,
    /// Perimeter `L = 4 side`.
    pub perimeter: usize,
    pub log2_count: f64,
    /// `log2 N(side, side) - L + (3/2) log2(L/2)`.
    pub corrected: f64,
    /// `corrected(side) - corrected(side - 1)`; zero for the first row.
    pub increment: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct EntropyScaling {
    pub rows: Vec<EntropyRow>,
    /// Increments shrink in magnitude from `fit_from` on.
    pub increments_shrinking: bool,
    pub final_increment: f64,
    /// Fit of `log2 N - L = b - a log2(L/2) + c / (L/2)` over `side >= fit_from`.
    pub fit_from: usize,
    pub exponent: f64,
    pub offset: f64,
    pub correction: f64,
}

/// Boundary entropy of square patches from the exact dp counts.
pub fn entropy_scaling(max_side: usize, fit_from: usize) -> Result<EntropyScaling> {
    if max_side < 2 || fit_from < 1 || fit_from + 2 > max_side {
        return Err(LoopError::Precondition(format!(
            "need 1 <= fit_from <= max_side - 2, got fit_from {} and max_side {}",
            fit_from, max_side
        )));
    }
    let mut rows: Vec<EntropyRow> = Vec::with_capacity(max_side);
    for side in 1..=max_side {
        let value = count_allowed(Dims::open(side, side)?, Strategy::Dp)?.value;
        let l = 4 * side;
        let log2_count = log2_big(&value);
        let corrected = log2_count - l as f64 + 1.5 * (l as f64 / 2.0).log2();
        let increment = rows.last().map_or(0.0, |r| corrected - r.corrected);
        rows.push(EntropyRow { side, perimeter: l, log2_count, corrected, increment });
    }
    let tail: Vec<&EntropyRow> = rows.iter().filter(|r| r.side >= fit_from.max(2)).collect();
    let increments_shrinking = tail.windows(2).all(|w| w[1].increment.abs() <= w[0].increment.abs());
    let fit: Vec<&EntropyRow> = rows.iter().filter(|r| r.side >= fit_from).collect();
    let a = nalgebra::DMatrix::<f64>::from_fn(fit.len(), 3, |i, j| {
        let n = fit[i].perimeter as f64 / 2.0;
        match j {
            0 => 1.0,
            1 => -n.log2(),
            _ => 1.0 / n,
        }
    });
    let y = nalgebra::DVector::<f64>::from_iterator(fit.len(), fit.iter().map(|r| r.log2_count - r.perimeter as f64));
    let sol = a
        .svd(true, true)
        .solve(&y, 1e-14)
        .map_err(|e| LoopError::Construction(format!("least squares failed: {}", e)))?;
    Ok(EntropyScaling {
        final_increment: rows.last().map_or(0.0, |r| r.increment),
        rows,
        increments_shrinking,
        fit_from,
        exponent: sol[1],
        offset: sol[0],
        correction: sol[2],
    })
}

/// Per-direction allowed counts by brute force (vertical cuts, horizontal cuts).
pub fn per_direction_brute(dims: Dims) -> Result<(u64, u64)> {
    let mut a = 0u64;
    let mut b = 0u64;
    for_each_matching(dims.half_perimeter(), |p| {
        if is_allowed_in(p, dims, CutOrientation::Vertical).unwrap_or(false) {
            a += 1;
        }
        if is_allowed_in(p, dims, CutOrientation::Horizontal).unwrap_or(false) {
            b += 1;
        }
    })?;
    Ok((a, b))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn height_counts() {
        assert_eq!(dyck_height_count(2, 1), BigUint::from(1u32));
        assert_eq!(dyck_height_count(4, 2), BigUint::from(8u32));
        assert_eq!(dyck_height_count(4, 4), BigUint::from(14u32));
        for n in 0..8 {
            for h in 0..6 {
                let t = dyck_height_count_transfer(n, h);
                assert_eq!(t, dyck_height_count_binomial(n, h), "n={} h={}", n, h);
                assert_eq!(t, dyck_height_count_fraction(n, h), "n={} h={}", n, h);
            }
        }
    }

    #[test]
    fn small_allowed_counts() {
        let d = Dims::open(2, 2).unwrap();
        assert_eq!(count_allowed(d, Strategy::Brute).unwrap().value, BigUint::from(12u32));
        assert_eq!(count_allowed(d, Strategy::Dp).unwrap().value, BigUint::from(12u32));
        let d11 = Dims::open(1, 1).unwrap();
        assert_eq!(count_allowed(d11, Strategy::Brute).unwrap().value, BigUint::from(2u32));
        assert_eq!(per_direction_brute(d).unwrap(), (13, 13));
    }

    #[test]
    fn closed_form_report_two_by_two() {
        let r = paper_closed_forms(Dims::open(2, 2).unwrap()).unwrap();
        assert_eq!(r.global_height, "8");
        assert_eq!(r.cut_criterion_vertical, "13");
        assert_eq!(r.binomial_printed, "6");
        assert!((r.trig_squared - 8.0).abs() < 1e-9);
    }

    #[test]
    fn k_at_two() {
        let k = k_paper(2.0);
        assert!((k - (PI.sqrt() - 1.0 / PI.sqrt())).abs() < 1e-15);
    }
}
