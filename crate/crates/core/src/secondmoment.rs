//! Exact second moments of the likelihood ratio under H₀, by enumeration
//! over `S_n`, and the Poisson comparison for cycle counts of a uniform
//! random permutation.
//!
//! The integrands depend on the pair `(π, π̃)` only through
//! `σ = π⁻¹∘π̃`, which is uniform on `S_n`, so one average over `σ`
//! replaces the double average over pairs.

use serde::{Deserialize, Serialize};

use crate::combinatorics::{
    binomial, factorial, next_permutation, CycleType, HyperedgeSpace, OrbitProfile, Permutation,
};
use crate::error::{Error, Result};

/// Largest `n` enumerated unless told otherwise.
pub const DEFAULT_ENUMERATION_CAP: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MomentModel {
    Gaussian,
    Er,
}

/// How `S_n` is walked.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Enumeration {
    /// One representative per conjugacy class, weighted by class size.
    CycleType,
    /// Every permutation, orbit profile by traversal.
    Traversal,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SecondMomentResult {
    pub model: MomentModel,
    pub n: usize,
    pub m: usize,
    pub rho: f64,
    pub value: f64,
    pub method: Enumeration,
    /// Permutations covered by the average, `n!` for either method.
    pub permutations_enumerated: u64,
}

fn check_shape(n: usize, m: usize, cap: usize) -> Result<()> {
    if m < 1 || m > n {
        return Err(Error::param(format!("need 1 <= m <= n, got n={n}, m={m}")));
    }
    if n > cap {
        return Err(Error::Refused(format!(
            "exact enumeration of S_{n} exceeds the cap n <= {cap}"
        )));
    }
    Ok(())
}

/// `(1/n!)·Σ_σ exp(f(N(σ)))`, with `f` the log of the integrand.
///
/// Terms are shifted by their maximum before exponentiating and class
/// weights are summed as integers, so a zero log-integrand yields exactly 1.
fn average<F>(n: usize, m: usize, method: Enumeration, log_term: F) -> Result<f64>
where
    F: Fn(&OrbitProfile) -> f64,
{
    let space = HyperedgeSpace::shared(n, m)?;
    let mut terms: Vec<(f64, f64)> = Vec::new();
    match method {
        Enumeration::CycleType => {
            for ct in CycleType::all(n) {
                let profile = space.orbit_profile(&ct.representative());
                terms.push((ct.class_size() as f64, log_term(&profile)));
            }
        }
        Enumeration::Traversal => {
            let mut image: Vec<usize> = (0..n).collect();
            loop {
                let perm = Permutation::from_image(image.clone())?;
                terms.push((1.0, log_term(&space.orbit_profile(&perm))));
                if !next_permutation(&mut image) {
                    break;
                }
            }
        }
    }
    let shift = terms.iter().map(|t| t.1).fold(f64::NEG_INFINITY, f64::max);
    if shift == f64::INFINITY {
        return Ok(f64::INFINITY);
    }
    let sum: f64 = terms.iter().map(|&(w, l)| w * (l - shift).exp()).sum();
    Ok(sum / factorial(n) as f64 * shift.exp())
}

fn log_factor_sum(profile: &OrbitProfile, per_orbit: impl Fn(usize) -> f64) -> f64 {
    profile
        .iter()
        .map(|(k, count)| count as f64 * per_orbit(k))
        .sum()
}

/// Second moment with an explicit enumeration method and cap.
pub fn second_moment(
    model: MomentModel,
    n: usize,
    m: usize,
    rho: f64,
    method: Enumeration,
    cap: usize,
) -> Result<SecondMomentResult> {
    check_shape(n, m, cap)?;
    let value = match model {
        MomentModel::Gaussian => {
            if !(0.0..1.0).contains(&rho) {
                return Err(Error::domain(format!(
                    "gaussian second moment needs 0 <= rho < 1, got {rho}"
                )));
            }
            average(n, m, method, |p| {
                log_factor_sum(p, |k| -(-rho.powi(2 * k as i32)).ln_1p())
            })?
        }
        MomentModel::Er => {
            if !(0.0..=1.0).contains(&rho) {
                return Err(Error::domain(format!(
                    "er second moment needs 0 <= rho <= 1, got {rho}"
                )));
            }
            average(n, m, method, |p| {
                log_factor_sum(p, |k| rho.powi(2 * k as i32).ln_1p())
            })?
        }
    };
    Ok(SecondMomentResult {
        model,
        n,
        m,
        rho,
        value,
        method,
        permutations_enumerated: factorial(n),
    })
}

/// `E_σ Π_k (1 − ρ^{2k})^{−N_k(σ)}`.
pub fn second_moment_gaussian(n: usize, m: usize, rho: f64) -> Result<SecondMomentResult> {
    second_moment(
        MomentModel::Gaussian,
        n,
        m,
        rho,
        Enumeration::CycleType,
        DEFAULT_ENUMERATION_CAP,
    )
}

/// `E_σ Π_k (1 + ρ^{2k})^{N_k(σ)}`.
pub fn second_moment_er(n: usize, m: usize, rho: f64) -> Result<SecondMomentResult> {
    second_moment(
        MomentModel::Er,
        n,
        m,
        rho,
        Enumeration::CycleType,
        DEFAULT_ENUMERATION_CAP,
    )
}

/// `E_σ exp(N₁(σ)·ρ²/(1 − ρ²))`.
pub fn fixed_orbit_exponential_moment(n: usize, m: usize, rho: f64) -> Result<f64> {
    fixed_orbit_moment_with(n, m, rho, Enumeration::CycleType, DEFAULT_ENUMERATION_CAP)
}

pub fn fixed_orbit_moment_with(
    n: usize,
    m: usize,
    rho: f64,
    method: Enumeration,
    cap: usize,
) -> Result<f64> {
    check_shape(n, m, cap)?;
    if !(0.0..1.0).contains(&rho) {
        return Err(Error::domain(format!("needs 0 <= rho < 1, got {rho}")));
    }
    let x = rho * rho / (1.0 - rho * rho);
    average(n, m, method, |p| p.fixed() as f64 * x)
}

/// A nonnegative function of the cycle counts `(c₁, …, c_L)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CycleFunction {
    /// `g ≡ 1`.
    Constant,
    /// `g = 1{c₁ = count}`.
    IndicatorFixedPoints { count: usize },
    /// `g = exp(a·C(c₁, m) + b·c₂·C(c₁, m − 2))`.
    ///
    /// With `truncate`, `g` is multiplied by `Π_{t≤L} 1{c_t ≤ ⌊n/t⌋}`,
    /// which is 1 on every permutation of `S_n` and makes the Poisson side
    /// a finite sum.
    ExpPolynomial {
        m: usize,
        a: f64,
        b: f64,
        truncate: bool,
    },
}

impl CycleFunction {
    fn eval(&self, counts: &[usize]) -> f64 {
        match *self {
            CycleFunction::Constant => 1.0,
            CycleFunction::IndicatorFixedPoints { count } => {
                f64::from(u8::from(counts[0] == count))
            }
            CycleFunction::ExpPolynomial { m, a, b, .. } => {
                let c1 = counts[0];
                let c2 = counts.get(1).copied().unwrap_or(0);
                let mut exponent = a * binomial(c1, m) as f64;
                if b != 0.0 && m >= 2 {
                    exponent += b * c2 as f64 * binomial(c1, m - 2) as f64;
                }
                exponent.exp()
            }
        }
    }

    fn validate(&self, n: usize, cycle_len: usize) -> Result<()> {
        if let CycleFunction::ExpPolynomial { m, a, b, truncate } = *self {
            if m < 1 || !(a >= 0.0 && a.is_finite()) || !(b >= 0.0 && b.is_finite()) {
                return Err(Error::param(format!(
                    "need m >= 1 and finite a, b >= 0; got m={m}, a={a}, b={b}"
                )));
            }
            if b > 0.0 && m >= 2 && cycle_len < 2 {
                return Err(Error::param(
                    "g reads the 2-cycle count, so L must be at least 2 when b > 0",
                ));
            }
            if !truncate {
                if a > 0.0 && m >= 2 {
                    return Err(Error::Refused(format!(
                        "E[exp(a·C(Z₁,{m}))] diverges for Poisson Z₁ when a > 0; set truncate"
                    )));
                }
                if b > 0.0 && m >= 3 {
                    return Err(Error::Refused(
                        "E[exp(b·Z₂·C(Z₁,m−2))] diverges for independent Poisson Z₁, Z₂ when b > 0; set truncate".into(),
                    ));
                }
            }
        }
        if let CycleFunction::IndicatorFixedPoints { count } = *self {
            if count > n {
                return Err(Error::param(format!(
                    "fixed-point count {count} exceeds n = {n}"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoissonComparison {
    /// `E g(C₁, …, C_L)` over uniform `S_n`.
    pub lhs: f64,
    /// `e^{H_L}·E g(Z₁, …, Z_L)`, `Z_t ~ Poisson(1/t)` independent.
    pub rhs: f64,
    pub holds: bool,
}

const SERIES_TOLERANCE: f64 = 1e-12;

fn log_poisson_pmf(lambda: f64, k: usize) -> f64 {
    let mut log_fact = 0.0;
    for i in 2..=k {
        log_fact += (i as f64).ln();
    }
    -lambda + k as f64 * lambda.ln() - log_fact
}

/// `Σ_z P(Z = z)·e^{c z}` for `Z ~ Poisson(λ)`, stopped once the
/// geometric bound on the remaining tail drops below the tolerance.
fn tilted_poisson_series(lambda: f64, c: f64) -> Result<f64> {
    let mut sum = 0.0;
    let mut term = (-lambda).exp();
    let growth = lambda * c.exp();
    for z in 0..100_000usize {
        sum += term;
        let ratio = growth / (z + 1) as f64;
        if ratio < 1.0 {
            let next = term * ratio;
            let tail = next / (1.0 - ratio);
            if tail < SERIES_TOLERANCE * sum.max(f64::MIN_POSITIVE) {
                return Ok(sum);
            }
        }
        term *= ratio;
    }
    Err(Error::Refused(format!(
        "Poisson series with λ={lambda}, tilt {c} did not converge"
    )))
}

/// Compares the exact cycle-count expectation over `S_n` with the
/// Poissonized bound `e^{1 + 1/2 + … + 1/L}·E g(Z₁, …, Z_L)`.
pub fn poisson_cycle_comparison(
    n: usize,
    cycle_len: usize,
    g: &CycleFunction,
) -> Result<PoissonComparison> {
    if cycle_len < 1 || cycle_len > n {
        return Err(Error::param(format!(
            "need 1 <= L <= n, got L={cycle_len}, n={n}"
        )));
    }
    if n > DEFAULT_ENUMERATION_CAP {
        return Err(Error::Refused(format!(
            "exact enumeration of S_{n} exceeds the cap n <= {DEFAULT_ENUMERATION_CAP}"
        )));
    }
    g.validate(n, cycle_len)?;

    let mut image: Vec<usize> = (0..n).collect();
    let mut counts = vec![0usize; cycle_len];
    let mut seen = vec![false; n];
    let mut lhs_sum = 0.0;
    loop {
        counts.iter_mut().for_each(|c| *c = 0);
        seen.iter_mut().for_each(|s| *s = false);
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut len = 0;
            let mut v = start;
            while !seen[v] {
                seen[v] = true;
                v = image[v];
                len += 1;
            }
            if len <= cycle_len {
                counts[len - 1] += 1;
            }
        }
        lhs_sum += g.eval(&counts);
        if !next_permutation(&mut image) {
            break;
        }
    }
    let lhs = lhs_sum / factorial(n) as f64;

    let harmonic: f64 = (1..=cycle_len).map(|t| 1.0 / t as f64).sum();
    let expectation = match *g {
        CycleFunction::Constant => 1.0,
        CycleFunction::IndicatorFixedPoints { count } => log_poisson_pmf(1.0, count).exp(),
        CycleFunction::ExpPolynomial { truncate: true, .. } => box_expectation(n, cycle_len, g),
        CycleFunction::ExpPolynomial {
            m,
            a,
            b,
            truncate: false,
        } => {
            // Only the separable cases survive validation.
            let mut product = 1.0;
            if m == 1 {
                product *= tilted_poisson_series(1.0, a)?;
            }
            if m == 2 && b > 0.0 {
                product *= tilted_poisson_series(0.5, b)?;
            }
            product
        }
    };
    let rhs = harmonic.exp() * expectation;
    Ok(PoissonComparison {
        lhs,
        rhs,
        holds: lhs <= rhs * (1.0 + 1e-9),
    })
}

/// `E g(Z)` over the box `0 <= z_t <= ⌊n/t⌋`, outside of which the
/// truncated `g` vanishes.
fn box_expectation(n: usize, cycle_len: usize, g: &CycleFunction) -> f64 {
    let limits: Vec<usize> = (1..=cycle_len).map(|t| n / t).collect();
    let log_pmfs: Vec<Vec<f64>> = (1..=cycle_len)
        .map(|t| {
            (0..=limits[t - 1])
                .map(|z| log_poisson_pmf(1.0 / t as f64, z))
                .collect()
        })
        .collect();
    let mut z = vec![0usize; cycle_len];
    let mut sum = 0.0;
    loop {
        let log_weight: f64 = z.iter().enumerate().map(|(i, &zi)| log_pmfs[i][zi]).sum();
        sum += log_weight.exp() * g.eval(&z);
        let mut i = 0;
        loop {
            if i == cycle_len {
                return sum;
            }
            if z[i] < limits[i] {
                z[i] += 1;
                break;
            }
            z[i] = 0;
            i += 1;
        }
    }
}
