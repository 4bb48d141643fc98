//! Tail bounds, special functions and closed-form detection thresholds.
//!
//! All logarithms are natural.

use std::f64::consts::E;

use serde::{Deserialize, Serialize};

use crate::combinatorics::binomial_f64;
use crate::error::{Error, Result};
use crate::lambert::{lambert_w, Branch};

/// Qualifiers attached to an evaluated quantity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Flag {
    /// A threshold on ρ² or s² at or above 1: no admissible parameter
    /// reaches it at this `n`.
    InfeasibleAtN,
    /// The formula has no usable finite-sample meaning here.
    Degenerate,
    /// The quantity is infinite at these inputs.
    Diverges,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub value: f64,
    pub flags: Vec<Flag>,
}

impl Evaluation {
    fn plain(value: f64) -> Self {
        Evaluation {
            value,
            flags: Vec::new(),
        }
    }

    pub fn has(&self, flag: Flag) -> bool {
        self.flags.contains(&flag)
    }
}

/// A tail bound next to the exact tail it is meant to dominate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailBoundReport {
    pub mu: f64,
    pub deviation: f64,
    pub bound: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact: Option<f64>,
}

impl TailBoundReport {
    pub fn dominates(&self) -> bool {
        self.exact.is_none_or(|e| e <= self.bound)
    }
}

/// Detection threshold on ρ² for the Gaussian model, `2n ln n / C(n,m)`.
pub fn gaussian_rho2_threshold(n: usize, m: usize) -> Result<Evaluation> {
    if m < 2 || n <= m {
        return Err(Error::param(format!("need n > m >= 2, got n={n}, m={m}")));
    }
    let nf = n as f64;
    let mut eval = Evaluation::plain(2.0 * nf * nf.ln() / binomial_f64(n, m));
    if eval.value >= 1.0 {
        eval.flags.push(Flag::InfeasibleAtN);
    }
    Ok(eval)
}

/// `α_p = (ln(1/p) − 1 + p)·p`.
pub fn alpha_p(p: f64) -> Result<f64> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::domain(format!("alpha_p needs 0 < p <= 1, got {p}")));
    }
    Ok(((1.0 / p).ln() - 1.0 + p) * p)
}

/// Detection threshold on s² for the Erdős–Rényi model,
/// `n ln n / (C(n,m)·α_p)`.
pub fn er_s2_threshold(n: usize, m: usize, p: f64) -> Result<Evaluation> {
    if m < 2 || n <= m {
        return Err(Error::param(format!("need n > m >= 2, got n={n}, m={m}")));
    }
    let alpha = alpha_p(p)?;
    if alpha <= 0.0 {
        return Ok(Evaluation {
            value: f64::INFINITY,
            flags: vec![Flag::Degenerate, Flag::Diverges, Flag::InfeasibleAtN],
        });
    }
    let nf = n as f64;
    let mut eval = Evaluation::plain(nf * nf.ln() / (binomial_f64(n, m) * alpha));
    if eval.value >= 1.0 {
        eval.flags.push(Flag::InfeasibleAtN);
    }
    Ok(eval)
}

/// Multiplicative Chernoff bound on `P(X >= (1+δ)μ)`:
/// `exp(−μ[(1+δ)ln(1+δ) − δ])`.
pub fn chernoff_upper(mu: f64, delta: f64) -> Result<f64> {
    if !(mu > 0.0 && delta > 0.0) {
        return Err(Error::domain(format!(
            "chernoff_upper needs mu > 0 and delta > 0, got mu={mu}, delta={delta}"
        )));
    }
    let rate = (1.0 + delta) * delta.ln_1p() - delta;
    Ok((-mu * rate).exp())
}

/// Multiplicative Chernoff bound on `P(X <= (1−δ)μ)`: `exp(−δ²μ/2)`.
pub fn chernoff_lower(mu: f64, delta: f64) -> Result<f64> {
    if !(mu > 0.0 && delta > 0.0 && delta <= 1.0) {
        return Err(Error::domain(format!(
            "chernoff_lower needs mu > 0 and 0 < delta <= 1, got mu={mu}, delta={delta}"
        )));
    }
    Ok((-delta * delta * mu / 2.0).exp())
}

/// Upper Chernoff bound for `Bin(trials, p)` next to the exact tail.
pub fn chernoff_upper_report(trials: u64, p: f64, delta: f64) -> Result<TailBoundReport> {
    let mu = trials as f64 * p;
    Ok(TailBoundReport {
        mu,
        deviation: delta,
        bound: chernoff_upper(mu, delta)?,
        exact: Some(binomial_upper_tail(trials, p, (1.0 + delta) * mu)?),
    })
}

/// Lower Chernoff bound for `Bin(trials, p)` next to the exact tail.
pub fn chernoff_lower_report(trials: u64, p: f64, delta: f64) -> Result<TailBoundReport> {
    let mu = trials as f64 * p;
    Ok(TailBoundReport {
        mu,
        deviation: delta,
        bound: chernoff_lower(mu, delta)?,
        exact: Some(binomial_lower_tail(trials, p, (1.0 - delta) * mu)?),
    })
}

/// Level `τ` with `P(X >= τ) <= e^{−t}` for a binomial or Poisson `X` of
/// mean `μ`: `τ = μ·exp(1 + W₀((t − μ)/(eμ)))`.
///
/// Inverts the upper Chernoff exponent: with `x = τ/μ`,
/// `μ(x ln x − x + 1) = t`.
pub fn poissonization_tail_threshold(mu: f64, t: f64) -> Result<f64> {
    if !(mu > 0.0) || !(t >= mu) {
        return Err(Error::domain(format!(
            "poissonization needs t >= mu > 0, got mu={mu}, t={t}"
        )));
    }
    let w = lambert_w((t - mu) / (E * mu), Branch::Principal)?;
    Ok(mu * (1.0 + w).exp())
}

pub fn poissonization_report(mu: f64, t: f64) -> Result<TailBoundReport> {
    let tau = poissonization_tail_threshold(mu, t)?;
    Ok(TailBoundReport {
        mu,
        deviation: tau,
        bound: (-t).exp(),
        exact: Some(poisson_upper_tail(mu, tau)?),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZetaValue {
    pub zeta: f64,
    pub gamma: f64,
    /// Argument handed to `W₀`, `(γ − 1)/e`.
    pub w_arg: f64,
    pub w: f64,
}

/// `ζ(k) = C(k,m)ps²·exp(1 + W₀(k ln(2en/k)/(e·ps²·C(k,m)) − 1/e))`, with
/// `γ = k ln(2en/k)/(C(k,m)ps²)` returned alongside.
pub fn zeta(k: usize, n: usize, m: usize, p: f64, s: f64) -> Result<ZetaValue> {
    if m < 1 || k < m || k > n {
        return Err(Error::param(format!(
            "zeta needs m <= k <= n, got k={k}, n={n}, m={m}"
        )));
    }
    let q = p * s * s;
    if !(p > 0.0 && p <= 1.0 && s > 0.0 && s <= 1.0) || q <= 0.0 {
        return Err(Error::domain(format!(
            "zeta needs 0 < p, s <= 1, got p={p}, s={s}"
        )));
    }
    let mean = binomial_f64(k, m) * q;
    let kf = k as f64;
    let gamma = kf * (2.0 * E * n as f64 / kf).ln() / mean;
    let w_arg = (gamma - 1.0) / E;
    // γ > 0 keeps the argument above -1/e.
    debug_assert!(w_arg > crate::lambert::BRANCH_POINT);
    let w = lambert_w(w_arg, Branch::Principal)?;
    Ok(ZetaValue {
        zeta: mean * (1.0 + w).exp(),
        gamma,
        w_arg,
        w,
    })
}

/// Deviation bound `C·(√(d·ln(1/δ)) + ln(1/δ))` for the inner product of
/// `d` correlated standard normal pairs, holding with probability `1 − 2δ`.
pub fn hanson_wright_bound(d: f64, delta: f64, constant: f64) -> Result<f64> {
    if !(d >= 1.0) || !(delta > 0.0 && delta < 1.0) || !(constant > 0.0) {
        return Err(Error::domain(format!(
            "hanson_wright needs d >= 1, 0 < delta < 1, C > 0; got d={d}, delta={delta}, C={constant}"
        )));
    }
    let l = (1.0 / delta).ln();
    Ok(constant * ((d * l).sqrt() + l))
}

fn ln_factorials(upto: u64) -> Vec<f64> {
    let mut out = Vec::with_capacity(upto as usize + 1);
    out.push(0.0);
    let mut acc = 0.0;
    for k in 1..=upto {
        acc += (k as f64).ln();
        out.push(acc);
    }
    out
}

fn binomial_pmfs(trials: u64, p: f64) -> Result<Vec<f64>> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::domain(format!(
            "binomial p must lie in [0, 1], got {p}"
        )));
    }
    let lf = ln_factorials(trials);
    let n = trials as usize;
    Ok((0..=n)
        .map(|k| {
            let ln_c = lf[n] - lf[k] - lf[n - k];
            let a = if k == 0 { 0.0 } else { k as f64 * p.ln() };
            let b = if k == n {
                0.0
            } else {
                (n - k) as f64 * (-p).ln_1p()
            };
            (ln_c + a + b).exp()
        })
        .collect())
}

/// Exact `P(X >= x)` for `X ~ Bin(trials, p)`, summed term by term.
pub fn binomial_upper_tail(trials: u64, p: f64, x: f64) -> Result<f64> {
    let pmf = binomial_pmfs(trials, p)?;
    let from = x.ceil().max(0.0) as usize;
    Ok(pmf.iter().skip(from).sum())
}

/// Exact `P(X <= x)` for `X ~ Bin(trials, p)`, summed term by term.
pub fn binomial_lower_tail(trials: u64, p: f64, x: f64) -> Result<f64> {
    if x < 0.0 {
        return Ok(0.0);
    }
    let pmf = binomial_pmfs(trials, p)?;
    let upto = (x.floor() as usize).min(pmf.len() - 1);
    Ok(pmf[..=upto].iter().sum())
}

/// `P(Z = k)` for `Z ~ Poisson(mu)`.
pub fn poisson_pmf(mu: f64, k: u64) -> f64 {
    if mu == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    let ln_fact: f64 = (1..=k).map(|i| (i as f64).ln()).sum();
    (-mu + k as f64 * mu.ln() - ln_fact).exp()
}

/// Exact `P(Z >= x)` for `Z ~ Poisson(mu)`, summed upward until the
/// remaining terms are below double precision of the running sum.
pub fn poisson_upper_tail(mu: f64, x: f64) -> Result<f64> {
    if !(mu > 0.0) {
        return Err(Error::domain(format!(
            "poisson mean must be positive, got {mu}"
        )));
    }
    let start = x.ceil().max(0.0) as u64;
    let mut term = poisson_pmf(mu, start);
    let mut sum = 0.0;
    let mut k = start;
    loop {
        sum += term;
        k += 1;
        term *= mu / k as f64;
        // Once k > 2μ the ratio is below 1/2, so the tail is at most 2·term.
        if k as f64 > 2.0 * mu && 2.0 * term <= 1e-17 * sum {
            break;
        }
        if term == 0.0 && k as f64 > mu {
            break;
        }
    }
    Ok(sum)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn gaussian_threshold_values() {
        assert!(close(
            gaussian_rho2_threshold(10, 3).unwrap().value,
            0.383_764_182,
            1e-9
        ));
        assert!(close(
            gaussian_rho2_threshold(8, 4).unwrap().value,
            0.475_300_924,
            1e-9
        ));
        assert!(
            gaussian_rho2_threshold(10, 4).unwrap().value
                < gaussian_rho2_threshold(10, 3).unwrap().value
        );
        assert!(gaussian_rho2_threshold(5, 4)
            .unwrap()
            .has(Flag::InfeasibleAtN));
        assert!(gaussian_rho2_threshold(3, 3).is_err());
    }

    #[test]
    fn alpha_p_values() {
        assert_eq!(alpha_p(1.0).unwrap(), 0.0);
        assert!(close(alpha_p(1.0 / E).unwrap(), (-2.0f64).exp(), 1e-15));
        assert!(close(alpha_p(0.5).unwrap(), 0.096_573_590_3, 1e-9));
        assert!(alpha_p(0.0).is_err());
        assert!(alpha_p(-0.5).is_err());
    }

    #[test]
    fn er_threshold_values() {
        let t = er_s2_threshold(20, 3, 0.5).unwrap();
        assert!(close(t.value, 0.544_214_069, 1e-8));
        assert!(t.flags.is_empty());
        let one = er_s2_threshold(20, 3, 1.0).unwrap();
        assert!(one.value.is_infinite() && one.has(Flag::Diverges));
        let near = er_s2_threshold(20, 3, 1.0 - 1e-6).unwrap();
        assert!(near.has(Flag::InfeasibleAtN));
    }

    #[test]
    fn thresholds_decrease_in_m() {
        for n in [10, 14, 20] {
            for m in 2..n / 2 {
                let g = |m| gaussian_rho2_threshold(n, m).unwrap().value;
                let e = |m| er_s2_threshold(n, m, 0.3).unwrap().value;
                assert!(g(m + 1) < g(m), "n={n} m={m}");
                assert!(e(m + 1) < e(m), "n={n} m={m}");
            }
        }
    }

    #[test]
    fn chernoff_values() {
        assert!(close(
            chernoff_upper(30.0, 0.5).unwrap(),
            0.038_932_346,
            1e-8
        ));
        assert!(chernoff_upper(30.0, 1e-9).unwrap() > 1.0 - 1e-12);
        assert!(close(
            chernoff_lower(10.0, 1.0).unwrap(),
            (-5.0f64).exp(),
            1e-16
        ));
        assert!(close(
            chernoff_lower(30.0, 0.5).unwrap(),
            0.023_517_746,
            1e-8
        ));
        assert!(chernoff_lower(30.0, 1e-9).unwrap() > 1.0 - 1e-12);
        assert!(chernoff_lower(30.0, 1.5).is_err());
        assert!(chernoff_upper(0.0, 0.5).is_err());
    }

    #[test]
    fn chernoff_dominates_exact_binomial() {
        let up = chernoff_upper_report(100, 0.3, 0.5).unwrap();
        assert!(up.dominates());
        let low = chernoff_lower_report(100, 0.3, 0.5).unwrap();
        assert!(low.dominates(), "{low:?}");
        for mu in [10.0, 30.0] {
            for delta in [0.1, 0.5, 1.0] {
                assert!(chernoff_upper_report(100, mu / 100.0, delta)
                    .unwrap()
                    .dominates());
                assert!(chernoff_lower_report(100, mu / 100.0, delta)
                    .unwrap()
                    .dominates());
            }
        }
    }

    #[test]
    fn binomial_tails_sum_to_one() {
        let lo = binomial_lower_tail(100, 0.3, 29.0).unwrap();
        let hi = binomial_upper_tail(100, 0.3, 30.0).unwrap();
        assert!(close(lo + hi, 1.0, 1e-12));
        assert!(close(
            binomial_lower_tail(100, 0.3, 0.0).unwrap(),
            0.7f64.powi(100),
            1e-25
        ));
    }

    #[test]
    fn poissonization_values() {
        assert!(close(
            poissonization_tail_threshold(1.0, 1.0).unwrap(),
            E,
            1e-14
        ));
        assert!(close(
            poissonization_tail_threshold(4.0, 4.0).unwrap(),
            4.0 * E,
            1e-13
        ));
        let tau = poissonization_tail_threshold(10.0, 20.0).unwrap();
        assert!(close(tau, 35.911_214_767, 1e-8));
        assert!(poissonization_tail_threshold(5.0, 4.0).is_err());

        let r = poissonization_report(1.0, 1.0).unwrap();
        assert!(close(r.exact.unwrap(), 0.080_301_397, 1e-9));
        assert!(close(r.bound, 0.367_879_441, 1e-9));
        for (mu, t) in [(1.0, 1.0), (5.0, 10.0), (10.0, 20.0)] {
            let r = poissonization_report(mu, t).unwrap();
            assert!(r.dominates(), "{r:?}");
            let tau = r.deviation;
            let bin = binomial_upper_tail(1000, mu / 1000.0, tau).unwrap();
            assert!(bin <= r.bound, "binomial tail {bin} vs {}", r.bound);
        }
    }

    #[test]
    fn zeta_reference_point() {
        let z = zeta(100, 100, 3, 0.1, 0.1).unwrap();
        assert!(close(z.gamma, 1.047_091_639, 1e-8));
        assert!(close(z.w_arg, 0.017_324_046, 1e-8));
        assert!(close(z.w, 0.017_031_490, 1e-8));
        assert!(close(z.zeta, 447.096_411, 1e-5));
        assert!(zeta(2, 10, 3, 0.5, 0.5).is_err());
        assert!(zeta(3, 10, 3, 0.5, 0.0).is_err());
    }

    #[test]
    fn zeta_small_gamma_regime() {
        // Pick s so that γ = 1e-4 at k = n = 1000, m = 3, p = 0.5.
        let (n, m, p) = (1000usize, 3usize, 0.5);
        let target = 1e-4;
        let kf = n as f64;
        let q = kf * (2.0 * E).ln() / (binomial_f64(n, m) * target);
        let s = (q / p).sqrt();
        let z = zeta(n, n, m, p, s).unwrap();
        assert!(close(z.gamma, target, 1e-12));
        let ratio = z.zeta / (binomial_f64(n, m) * p * s * s);
        assert!(
            (ratio - 1.0).abs() <= 3.0 * (2.0 * target).sqrt(),
            "ratio {ratio}"
        );
    }

    #[test]
    fn zeta_at_smallest_k() {
        let z = zeta(3, 50, 3, 0.4, 0.7).unwrap();
        assert!(z.zeta.is_finite() && z.zeta > 0.0);
    }

    #[test]
    fn hanson_wright_values() {
        assert!(close(
            hanson_wright_bound(100.0, 0.01, 1.0).unwrap(),
            26.064_830_449,
            1e-8
        ));
        assert!(hanson_wright_bound(100.0, 1.0 - 1e-12, 1.0).unwrap() < 1e-4);
        let l = (1.0f64 / 0.05).ln();
        let a = hanson_wright_bound(50.0, 0.05, 1.0).unwrap() - l;
        let b = hanson_wright_bound(100.0, 0.05, 1.0).unwrap() - l;
        assert!(close(b / a, 2f64.sqrt(), 1e-12));
        assert!(close(
            hanson_wright_bound(100.0, 0.01, 2.0).unwrap(),
            2.0 * 26.064_830_449,
            1e-7
        ));
        assert!(hanson_wright_bound(0.5, 0.01, 1.0).is_err());
    }
}
