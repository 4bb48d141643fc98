//! The overlap statistic `T(π) = Σ_e A₁[e]·A₂[π(e)]`, its maximum over
//! vertex permutations, and the thresholds it is compared against.
//!
//! Every evaluation of `T(π)` sums products in hyperedge rank order, so the
//! exact maximizer, the local search and [`t_of_pi`] produce bit-identical
//! values for the same permutation.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::combinatorics::{binomial_f64, next_permutation, HyperedgeSpace, Permutation};
use crate::error::{Error, Result};
use crate::models::{sample, AdjacencyTensor, Hypothesis, ModelSpec, SamplePair};
use crate::rng::{stream, Domain, StreamKey};

/// Largest `n` the exact maximizer accepts unless told otherwise.
pub const DEFAULT_EXACT_LIMIT: usize = 9;

/// How the maximum over permutations was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Exact,
    Heuristic,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Exact => "exact",
            Method::Heuristic => "heuristic",
        })
    }
}

/// Statistic configuration shared by the harness and the CLI.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum StatisticMethod {
    Exact {
        #[serde(default = "default_limit")]
        limit: usize,
    },
    Heuristic {
        restarts: usize,
    },
}

fn default_limit() -> usize {
    DEFAULT_EXACT_LIMIT
}

impl StatisticMethod {
    pub fn exact() -> Self {
        StatisticMethod::Exact {
            limit: DEFAULT_EXACT_LIMIT,
        }
    }
}

/// Where a threshold came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ThresholdKind {
    Asymptotic,
    Calibrated,
    Fixed,
}

impl fmt::Display for ThresholdKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ThresholdKind::Asymptotic => "asymptotic",
            ThresholdKind::Calibrated => "calibrated",
            ThresholdKind::Fixed => "fixed",
        })
    }
}

/// Best value of `T(π)` found and the permutation attaining it.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Maximum {
    pub value: f64,
    pub argmax: Permutation,
    pub method: Method,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TestOutcome {
    pub statistic: f64,
    pub threshold: f64,
    pub threshold_kind: ThresholdKind,
    pub reject_h0: bool,
    pub argmax: Permutation,
    pub method: Method,
}

impl TestOutcome {
    pub fn new(max: Maximum, threshold: f64, threshold_kind: ThresholdKind) -> Self {
        TestOutcome {
            statistic: max.value,
            threshold,
            threshold_kind,
            reject_h0: max.value >= threshold,
            argmax: max.argmax,
            method: max.method,
        }
    }
}

#[inline]
fn image_mask(image: &[usize], mask: u64) -> u64 {
    let mut out = 0;
    let mut rest = mask;
    while rest != 0 {
        out |= 1 << image[rest.trailing_zeros() as usize];
        rest &= rest - 1;
    }
    out
}

/// Shared state for evaluating `T(π)` on one tensor pair.
struct Overlap<'a> {
    space: std::sync::Arc<HyperedgeSpace>,
    a1: &'a [f64],
    a2: &'a [f64],
    /// Ranks with `A₁[e] != 0`; zero products cannot change a sum.
    support: Vec<usize>,
}

impl<'a> Overlap<'a> {
    fn new(a1: &'a AdjacencyTensor, a2: &'a AdjacencyTensor) -> Result<Self> {
        if !a1.same_shape(a2) {
            return Err(Error::param(format!(
                "tensor shapes differ: (n={}, m={}) vs (n={}, m={})",
                a1.n(),
                a1.m(),
                a2.n(),
                a2.m()
            )));
        }
        let space = HyperedgeSpace::shared(a1.n(), a1.m())?;
        let support = a1
            .values()
            .iter()
            .enumerate()
            .filter(|(_, &v)| v != 0.0)
            .map(|(r, _)| r)
            .collect();
        Ok(Overlap {
            space,
            a1: a1.values(),
            a2: a2.values(),
            support,
        })
    }

    #[inline]
    fn value(&self, image: &[usize]) -> f64 {
        let masks = self.space.masks();
        let mut sum = 0.0;
        for &r in &self.support {
            let target = self.space.rank_mask(image_mask(image, masks[r]));
            sum += self.a1[r] * self.a2[target];
        }
        sum
    }
}

/// `T(π) = Σ_e A₁[e]·A₂[π(e)]` over all hyperedges.
pub fn t_of_pi(a1: &AdjacencyTensor, a2: &AdjacencyTensor, perm: &Permutation) -> Result<f64> {
    let overlap = Overlap::new(a1, a2)?;
    if perm.len() != a1.n() {
        return Err(Error::param(format!(
            "permutation of size {} applied to tensors with n={}",
            perm.len(),
            a1.n()
        )));
    }
    Ok(overlap.value(perm.image()))
}

/// Exact `max_π T(π)` by enumerating all `n!` permutations in
/// lexicographic order of their image arrays. Among tied maximizers the
/// lexicographically smallest image wins.
pub fn max_statistic_exact(
    a1: &AdjacencyTensor,
    a2: &AdjacencyTensor,
    limit: usize,
) -> Result<Maximum> {
    let n = a1.n();
    if n > limit {
        return Err(Error::Refused(format!(
            "exact maximization over {n}! permutations exceeds the limit n <= {limit}; use the heuristic"
        )));
    }
    let overlap = Overlap::new(a1, a2)?;
    let mut image: Vec<usize> = (0..n).collect();
    let mut best_value = overlap.value(&image);
    let mut best_image = image.clone();
    while next_permutation(&mut image) {
        let v = overlap.value(&image);
        if v > best_value {
            best_value = v;
            best_image.copy_from_slice(&image);
        }
    }
    Ok(Maximum {
        value: best_value,
        argmax: Permutation::from_image(best_image)?,
        method: Method::Exact,
    })
}

/// Restarted best-improvement hill climbing over transpositions
/// `π_i ↔ π_j`, started from the identity and from `restarts` uniform
/// random permutations. The reported value is `T` of the returned
/// permutation, so it never exceeds the exact maximum.
pub fn max_statistic_heuristic<R: Rng + ?Sized>(
    a1: &AdjacencyTensor,
    a2: &AdjacencyTensor,
    restarts: usize,
    rng: &mut R,
) -> Result<Maximum> {
    let overlap = Overlap::new(a1, a2)?;
    let n = a1.n();
    let masks = overlap.space.masks();
    let mut incident: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (r, &mask) in masks.iter().enumerate() {
        if overlap.a1[r] == 0.0 {
            continue;
        }
        let mut rest = mask;
        while rest != 0 {
            incident[rest.trailing_zeros() as usize].push(r);
            rest &= rest - 1;
        }
    }

    let mut best: Option<(f64, Vec<usize>)> = None;
    for start in 0..=restarts {
        let mut image: Vec<usize> = if start == 0 {
            (0..n).collect()
        } else {
            Permutation::random(n, rng).image().to_vec()
        };
        climb(&overlap, &incident, &mut image);
        let value = overlap.value(&image);
        if best.as_ref().is_none_or(|(b, _)| value > *b) {
            best = Some((value, image));
        }
    }
    let (value, image) = best.expect("at least the identity start runs");
    Ok(Maximum {
        value,
        argmax: Permutation::from_image(image)?,
        method: Method::Heuristic,
    })
}

fn climb(overlap: &Overlap<'_>, incident: &[Vec<usize>], image: &mut [usize]) {
    let n = image.len();
    let masks = overlap.space.masks();
    let mut current: Vec<u64> = masks.iter().map(|&m| image_mask(image, m)).collect();
    let mut value = overlap.value(image);
    loop {
        let tolerance = 1e-12 * (1.0 + value.abs());
        let mut best: Option<(f64, usize, usize)> = None;
        for i in 0..n {
            for j in i + 1..n {
                let flip = (1u64 << image[i]) | (1u64 << image[j]);
                let mut delta = 0.0;
                for (own, other) in [(i, j), (j, i)] {
                    for &r in &incident[own] {
                        if masks[r] >> other & 1 == 1 {
                            continue;
                        }
                        let before = overlap.space.rank_mask(current[r]);
                        let after = overlap.space.rank_mask(current[r] ^ flip);
                        delta += overlap.a1[r] * (overlap.a2[after] - overlap.a2[before]);
                    }
                }
                if delta > tolerance && best.is_none_or(|(d, _, _)| delta > d) {
                    best = Some((delta, i, j));
                }
            }
        }
        let Some((delta, i, j)) = best else { break };
        let flip = (1u64 << image[i]) | (1u64 << image[j]);
        for (own, other) in [(i, j), (j, i)] {
            for &r in &incident[own] {
                if masks[r] >> other & 1 == 0 {
                    current[r] ^= flip;
                }
            }
        }
        image.swap(i, j);
        value += delta;
    }
}

/// Maximizes `T` on a sample pair with the configured method.
pub fn compute_statistic<R: Rng + ?Sized>(
    pair: &SamplePair,
    method: StatisticMethod,
    rng: &mut R,
) -> Result<Maximum> {
    match method {
        StatisticMethod::Exact { limit } => max_statistic_exact(&pair.a1, &pair.a2, limit),
        StatisticMethod::Heuristic { restarts } => {
            max_statistic_heuristic(&pair.a1, &pair.a2, restarts, rng)
        }
    }
}

/// An asymptotic rejection threshold `t_n`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Threshold {
    pub value: f64,
    /// Set when the formula carries no finite-sample meaning at these
    /// inputs (non-positive `t_n`, or `τ_n >= 1`).
    pub degenerate: bool,
    /// Unclamped `τ_n` for the Erdős–Rényi threshold.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
}

/// `t_n = ρ·C(n,m) − √C(n,m)·n^{1/4}`.
pub fn gaussian_threshold(n: usize, m: usize, rho: f64) -> Result<Threshold> {
    if m < 1 || m > n {
        return Err(Error::param(format!("need 1 <= m <= n, got n={n}, m={m}")));
    }
    if !(0.0..1.0).contains(&rho) {
        return Err(Error::param(format!("rho must lie in [0, 1), got {rho}")));
    }
    let edges = binomial_f64(n, m);
    let value = rho * edges - edges.sqrt() * (n as f64).powf(0.25);
    Ok(Threshold {
        value,
        degenerate: value <= 0.0,
        tau: None,
    })
}

/// `t_n = μ(1 − τ_n)` with `μ = C(n,m)ps²` and `τ_n = ln n / √μ`; when
/// `τ_n >= 1` the threshold is clamped to 0 and flagged degenerate.
pub fn er_threshold(n: usize, m: usize, p: f64, s: f64) -> Result<Threshold> {
    if m < 1 || m > n {
        return Err(Error::param(format!("need 1 <= m <= n, got n={n}, m={m}")));
    }
    if !(p > 0.0 && p < 1.0) || !(0.0..=1.0).contains(&s) {
        return Err(Error::param(format!(
            "need 0 < p < 1 and 0 <= s <= 1, got p={p}, s={s}"
        )));
    }
    let mu = binomial_f64(n, m) * p * s * s;
    if mu <= 0.0 {
        return Ok(Threshold {
            value: 0.0,
            degenerate: true,
            tau: Some(f64::INFINITY),
        });
    }
    let tau = (n as f64).ln() / mu.sqrt();
    if tau >= 1.0 {
        return Ok(Threshold {
            value: 0.0,
            degenerate: true,
            tau: Some(tau),
        });
    }
    Ok(Threshold {
        value: mu * (1.0 - tau),
        degenerate: false,
        tau: Some(tau),
    })
}

pub fn asymptotic_threshold(model: &ModelSpec) -> Result<Threshold> {
    match model {
        ModelSpec::Gaussian(g) => gaussian_threshold(g.n, g.m, g.rho),
        ModelSpec::Er(e) => er_threshold(e.n, e.m, e.p, e.s),
    }
}

/// Empirical `(1 − level)` quantile: the smallest sample value `x` with at
/// least a `1 − level` fraction of the sample `<= x`.
pub fn upper_quantile(values: &[f64], level: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::param("quantile of an empty sample"));
    }
    if !(level > 0.0 && level <= 1.0) {
        return Err(Error::param(format!(
            "level must lie in (0, 1], got {level}"
        )));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let k = (((1.0 - level) * n as f64) - 1e-9)
        .ceil()
        .clamp(1.0, n as f64) as usize;
    Ok(sorted[k - 1])
}

/// Minimum number of null draws for a calibrated threshold.
pub const MIN_CALIBRATION_TRIALS: usize = 20;

/// Null statistics on the calibration streams `(seed, Calibration, grid, t)`.
pub fn null_statistics(
    model: &ModelSpec,
    trials: usize,
    method: StatisticMethod,
    seed: u64,
    grid: u64,
) -> Result<Vec<f64>> {
    (0..trials as u64)
        .map(|t| null_statistic(model, method, seed, grid, t))
        .collect()
}

/// One calibration draw: sample H₀ on its own stream, then maximize.
pub fn null_statistic(
    model: &ModelSpec,
    method: StatisticMethod,
    seed: u64,
    grid: u64,
    trial: u64,
) -> Result<f64> {
    let mut rng = stream(seed, StreamKey::new(Domain::Calibration, grid, trial));
    let pair = sample(model, Hypothesis::H0, &mut rng)?;
    Ok(compute_statistic(&pair, method, &mut rng)?.value)
}

/// Empirical `(1 − level)` quantile of the statistic over `trials` fresh
/// H₀ draws. Deterministic in `seed`.
pub fn calibrated_threshold(
    model: &ModelSpec,
    level: f64,
    trials: usize,
    method: StatisticMethod,
    seed: u64,
) -> Result<f64> {
    if trials < MIN_CALIBRATION_TRIALS {
        return Err(Error::param(format!(
            "calibration needs at least {MIN_CALIBRATION_TRIALS} trials, got {trials}"
        )));
    }
    let stats = null_statistics(model, trials, method, seed, 0)?;
    upper_quantile(&stats, level)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{ErSpec, GaussianSpec};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn gaussian_pair(n: usize, m: usize, rho: f64, hyp: Hypothesis, seed: u64) -> SamplePair {
        let model = ModelSpec::Gaussian(GaussianSpec::new(n, m, rho).unwrap());
        sample(&model, hyp, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap()
    }

    fn all_perms(n: usize) -> Vec<Permutation> {
        let mut image: Vec<usize> = (0..n).collect();
        let mut out = vec![Permutation::from_image(image.clone()).unwrap()];
        while next_permutation(&mut image) {
            out.push(Permutation::from_image(image.clone()).unwrap());
        }
        out
    }

    #[test]
    fn t_of_pi_examples() {
        let ones = AdjacencyTensor::from_values(6, 3, vec![1.0; 20]).unwrap();
        let zeros = AdjacencyTensor::zeros(6, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = Permutation::random(6, &mut rng);
        assert_eq!(t_of_pi(&ones, &ones, &p).unwrap(), 20.0);
        assert_eq!(t_of_pi(&ones, &zeros, &p).unwrap(), 0.0);

        let single = AdjacencyTensor::indicator(4, 3, &[0]).unwrap();
        let swap = Permutation::parse_cycles(4, "(1 2)").unwrap();
        assert_eq!(t_of_pi(&single, &single, &swap).unwrap(), 1.0);
        let moving = Permutation::parse_cycles(4, "(1 4)").unwrap();
        assert_eq!(t_of_pi(&single, &single, &moving).unwrap(), 0.0);

        let other = AdjacencyTensor::zeros(5, 3).unwrap();
        assert!(matches!(
            t_of_pi(&ones, &other, &p),
            Err(Error::Parameter(_))
        ));
        assert!(t_of_pi(&ones, &ones, &Permutation::identity(5)).is_err());
    }

    #[test]
    fn t_of_pi_transpose_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..20 {
            let pair = gaussian_pair(7, 3, 0.0, Hypothesis::H0, rng.random());
            let p = Permutation::random(7, &mut rng);
            let a = t_of_pi(&pair.a1, &pair.a2, &p).unwrap();
            let b = t_of_pi(&pair.a2, &pair.a1, &p.inverse()).unwrap();
            assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
        }
    }

    #[test]
    fn exact_recovers_self_match() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..5 {
            let a1 = gaussian_pair(6, 3, 0.0, Hypothesis::H0, rng.random()).a1;
            let tau = Permutation::random(6, &mut rng);
            let a2 = a1.relabel(&tau).unwrap();
            let max = max_statistic_exact(&a1, &a2, DEFAULT_EXACT_LIMIT).unwrap();
            let energy: f64 = a1.values().iter().map(|v| v * v).sum();
            assert!((max.value - energy).abs() <= 1e-12 * energy);
            // Self-match is unique up to permutations acting trivially on
            // hyperedges, which for 3 <= m < n is only the identity.
            assert_eq!(max.argmax, tau);
        }
    }

    #[test]
    fn exact_tie_break_is_lexicographic() {
        let ones = AdjacencyTensor::from_values(4, 3, vec![1.0; 4]).unwrap();
        let max = max_statistic_exact(&ones, &ones, DEFAULT_EXACT_LIMIT).unwrap();
        assert_eq!(max.value, 4.0);
        assert!(max.argmax.is_identity());
        assert_eq!(max.method, Method::Exact);
    }

    #[test]
    fn exact_refuses_over_limit() {
        let t = AdjacencyTensor::zeros(10, 3).unwrap();
        assert!(matches!(
            max_statistic_exact(&t, &t, 9),
            Err(Error::Refused(_))
        ));
    }

    #[test]
    fn exact_dominates_sampled_permutations() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..50 {
            let pair = gaussian_pair(6, 3, 0.0, Hypothesis::H0, rng.random());
            let max = max_statistic_exact(&pair.a1, &pair.a2, 9).unwrap();
            assert_eq!(t_of_pi(&pair.a1, &pair.a2, &max.argmax).unwrap(), max.value);
            for _ in 0..100 {
                let p = Permutation::random(6, &mut rng);
                assert!(t_of_pi(&pair.a1, &pair.a2, &p).unwrap() <= max.value);
            }
        }
    }

    #[test]
    fn exact_is_invariant_under_relabeling() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let pair = gaussian_pair(4, 2, 0.0, Hypothesis::H0, 11);
        let base = max_statistic_exact(&pair.a1, &pair.a2, 9).unwrap();
        for t1 in all_perms(4) {
            for t2 in all_perms(4) {
                let b1 = pair.a1.relabel(&t1).unwrap();
                let b2 = pair.a2.relabel(&t2).unwrap();
                let max = max_statistic_exact(&b1, &b2, 9).unwrap();
                assert!((max.value - base.value).abs() <= 1e-12 * (1.0 + base.value.abs()));
                // Optimal alignments map by conjugation: τ₂ ∘ π* ∘ τ₁⁻¹.
                let mapped = t2.compose(&base.argmax).compose(&t1.inverse());
                let v = t_of_pi(&b1, &b2, &mapped).unwrap();
                assert!((v - base.value).abs() <= 1e-12 * (1.0 + base.value.abs()));
            }
        }
        let pair = gaussian_pair(5, 3, 0.0, Hypothesis::H0, 12);
        let base = max_statistic_exact(&pair.a1, &pair.a2, 9).unwrap().value;
        for t2 in all_perms(5) {
            let t1 = Permutation::random(5, &mut rng);
            let max = max_statistic_exact(
                &pair.a1.relabel(&t1).unwrap(),
                &pair.a2.relabel(&t2).unwrap(),
                9,
            )
            .unwrap();
            assert!((max.value - base).abs() <= 1e-12 * (1.0 + base.abs()));
        }
    }

    #[test]
    fn heuristic_on_all_ones_starts_optimal() {
        let ones = AdjacencyTensor::from_values(7, 3, vec![1.0; 35]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let max = max_statistic_heuristic(&ones, &ones, 0, &mut rng).unwrap();
        assert_eq!(max.value, 35.0);
        assert!(max.argmax.is_identity());
        assert_eq!(max.method, Method::Heuristic);
    }

    #[test]
    fn heuristic_is_sound_and_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for trial in 0..30 {
            let pair = if trial % 2 == 0 {
                gaussian_pair(7, 3, 0.5, Hypothesis::H1, rng.random())
            } else {
                let model = ModelSpec::Er(ErSpec::new(7, 3, 0.5, 0.7).unwrap());
                sample(&model, Hypothesis::H1, &mut rng).unwrap()
            };
            let exact = max_statistic_exact(&pair.a1, &pair.a2, 9).unwrap();
            let seed = rng.random();
            let h = max_statistic_heuristic(
                &pair.a1,
                &pair.a2,
                3,
                &mut ChaCha8Rng::seed_from_u64(seed),
            )
            .unwrap();
            let again = max_statistic_heuristic(
                &pair.a1,
                &pair.a2,
                3,
                &mut ChaCha8Rng::seed_from_u64(seed),
            )
            .unwrap();
            assert!(h.value <= exact.value);
            assert_eq!(h, again);
            assert_eq!(t_of_pi(&pair.a1, &pair.a2, &h.argmax).unwrap(), h.value);
        }
    }

    #[test]
    fn heuristic_finds_planted_signal() {
        // Regression statistic: fraction of planted n=8 instances where the
        // local search reaches 80% of the planted overlap.
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mut hits = 0;
        for _ in 0..100 {
            let pair = gaussian_pair(8, 3, 0.95, Hypothesis::H1, rng.random());
            let planted = t_of_pi(&pair.a1, &pair.a2, pair.planted.as_ref().unwrap()).unwrap();
            let h = max_statistic_heuristic(&pair.a1, &pair.a2, 20, &mut rng).unwrap();
            if h.value >= 0.8 * planted {
                hits += 1;
            }
        }
        assert!(hits >= 90, "hits = {hits}");
    }

    #[test]
    fn gaussian_threshold_values() {
        let t = gaussian_threshold(16, 3, 0.5).unwrap();
        assert!((t.value - 232.671_361_735).abs() < 1e-8);
        assert!(!t.degenerate);
        let rho = crate::bounds::gaussian_rho2_threshold(10, 3)
            .unwrap()
            .value
            .sqrt();
        let t = gaussian_threshold(10, 3, rho).unwrap();
        assert!((t.value - 54.858_368_848).abs() < 1e-8);
        let zero = gaussian_threshold(10, 3, 0.0).unwrap();
        assert!((zero.value + 120f64.sqrt() * 10f64.powf(0.25)).abs() < 1e-12);
        assert!(zero.degenerate);
        assert!(gaussian_threshold(10, 3, 1.0).is_err());
    }

    #[test]
    fn er_threshold_values() {
        let t = er_threshold(20, 3, 0.5, 0.5).unwrap();
        assert!((t.tau.unwrap() - 0.250_954_834).abs() < 1e-8);
        assert!((t.value - 106.738_936_127).abs() < 1e-8);
        assert!(!t.degenerate);
        let none = er_threshold(20, 3, 0.5, 0.0).unwrap();
        assert!(none.degenerate && none.value == 0.0);
        let small = er_threshold(6, 3, 0.3, 0.5).unwrap();
        assert!(small.degenerate && small.tau.unwrap() >= 1.0);
        // τ_n → 0 as the mean grows: t_n / μ → 1.
        let big = er_threshold(60, 5, 0.5, 0.9).unwrap();
        let mu = binomial_f64(60, 5) * 0.5 * 0.81;
        assert!((big.value / mu - 1.0).abs() < 0.01);
    }

    #[test]
    fn quantile_edges() {
        let xs = [3.0, 1.0, 2.0, 5.0, 4.0];
        assert_eq!(upper_quantile(&xs, 1.0).unwrap(), 1.0);
        assert_eq!(upper_quantile(&xs, 0.2).unwrap(), 4.0);
        assert_eq!(upper_quantile(&xs, 0.01).unwrap(), 5.0);
        let ys: Vec<f64> = (1..=400).map(f64::from).collect();
        assert_eq!(upper_quantile(&ys, 0.05).unwrap(), 380.0);
        assert!(upper_quantile(&[], 0.5).is_err());
        assert!(upper_quantile(&xs, 0.0).is_err());
    }

    #[test]
    fn calibrated_threshold_behaviour() {
        let dead = ModelSpec::Er(ErSpec::new(6, 3, 0.5, 0.0).unwrap());
        assert_eq!(
            calibrated_threshold(&dead, 0.05, 20, StatisticMethod::exact(), 1).unwrap(),
            0.0
        );

        let model = ModelSpec::Gaussian(GaussianSpec::new(6, 3, 0.0).unwrap());
        let a = calibrated_threshold(&model, 0.05, 400, StatisticMethod::exact(), 9).unwrap();
        let b = calibrated_threshold(&model, 0.05, 400, StatisticMethod::exact(), 9).unwrap();
        assert!(a.is_finite() && a > 0.0);
        assert_eq!(a.to_bits(), b.to_bits());

        let stats = null_statistics(&model, 30, StatisticMethod::exact(), 9, 0).unwrap();
        let min = stats.iter().cloned().fold(f64::INFINITY, f64::min);
        assert_eq!(
            calibrated_threshold(&model, 1.0, 30, StatisticMethod::exact(), 9).unwrap(),
            min
        );
        assert!(calibrated_threshold(&model, 0.05, 19, StatisticMethod::exact(), 9).is_err());
    }

    #[test]
    fn outcome_decision_rule() {
        let max = Maximum {
            value: 2.0,
            argmax: Permutation::identity(3),
            method: Method::Exact,
        };
        assert!(TestOutcome::new(max.clone(), 2.0, ThresholdKind::Fixed).reject_h0);
        assert!(!TestOutcome::new(max, 2.5, ThresholdKind::Fixed).reject_h0);
    }
}
