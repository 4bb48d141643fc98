//! Correlated hypergraph pair samplers.
//!
//! Under H₀ the two tensors are independent. Under H₁ a vertex permutation
//! `π` is drawn uniformly and each pair `(A₁[e], A₂[π(e)])` is correlated.
//!
//! Stream discipline: under H₁ the permutation is drawn first, then every
//! entry of A₁ in rank order, then every entry of A₂ in rank order. Each
//! entry consumes exactly one variate.

use std::fmt;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::combinatorics::{HyperedgeSpace, Permutation};
use crate::error::{Error, Result};

/// One value per hyperedge of the complete `m`-uniform hypergraph,
/// indexed by lexicographic hyperedge rank.
#[derive(Clone, Debug, PartialEq)]
pub struct AdjacencyTensor {
    n: usize,
    m: usize,
    values: Vec<f64>,
}

impl AdjacencyTensor {
    pub fn zeros(n: usize, m: usize) -> Result<Self> {
        let len = HyperedgeSpace::shared(n, m)?.len();
        Ok(AdjacencyTensor {
            n,
            m,
            values: vec![0.0; len],
        })
    }

    pub fn from_values(n: usize, m: usize, values: Vec<f64>) -> Result<Self> {
        let len = HyperedgeSpace::shared(n, m)?.len();
        if values.len() != len {
            return Err(Error::param(format!(
                "tensor for n={n}, m={m} needs {len} values, got {}",
                values.len()
            )));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::param(format!("tensor value {bad} is not finite")));
        }
        Ok(AdjacencyTensor { n, m, values })
    }

    /// Indicator tensor of a set of hyperedge ranks.
    pub fn indicator(n: usize, m: usize, ranks: &[usize]) -> Result<Self> {
        let mut t = Self::zeros(n, m)?;
        for &r in ranks {
            *t.values
                .get_mut(r)
                .ok_or_else(|| Error::param(format!("rank {r} out of range")))? = 1.0;
        }
        Ok(t)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_binary(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0 || v == 1.0)
    }

    pub fn same_shape(&self, other: &AdjacencyTensor) -> bool {
        self.n == other.n && self.m == other.m
    }

    /// The tensor of the hypergraph with vertex `v` renamed `τ(v)`:
    /// `out[τ(e)] = self[e]`.
    pub fn relabel(&self, tau: &Permutation) -> Result<AdjacencyTensor> {
        if tau.len() != self.n {
            return Err(Error::param(format!(
                "relabeling permutation has size {}, tensor has n={}",
                tau.len(),
                self.n
            )));
        }
        let space = HyperedgeSpace::shared(self.n, self.m)?;
        let image = space.image_ranks(tau);
        let mut values = vec![0.0; self.values.len()];
        for (r, &v) in self.values.iter().enumerate() {
            values[image[r]] = v;
        }
        Ok(AdjacencyTensor {
            n: self.n,
            m: self.m,
            values,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Hypothesis {
    H0,
    H1,
}

impl fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Hypothesis::H0 => "h0",
            Hypothesis::H1 => "h1",
        })
    }
}

fn check_shape(n: usize, m: usize) -> Result<()> {
    if m < 1 || m > n {
        return Err(Error::param(format!("need 1 <= m <= n, got n={n}, m={m}")));
    }
    Ok(())
}

/// Gaussian-Wigner pair: standard normal weights, correlation `rho` under H₁.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianSpec {
    pub n: usize,
    pub m: usize,
    pub rho: f64,
}

impl GaussianSpec {
    pub fn new(n: usize, m: usize, rho: f64) -> Result<Self> {
        let spec = GaussianSpec { n, m, rho };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        check_shape(self.n, self.m)?;
        // ρ = 1 makes the likelihood ratio degenerate.
        if !(0.0..1.0).contains(&self.rho) {
            return Err(Error::param(format!(
                "rho must lie in [0, 1), got {}",
                self.rho
            )));
        }
        Ok(())
    }
}

/// Subsampled Erdős–Rényi pair: parent edge probability `p`, keep
/// probability `s`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErSpec {
    pub n: usize,
    pub m: usize,
    pub p: f64,
    pub s: f64,
}

impl ErSpec {
    pub fn new(n: usize, m: usize, p: f64, s: f64) -> Result<Self> {
        let spec = ErSpec { n, m, p, s };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        check_shape(self.n, self.m)?;
        if !(self.p > 0.0 && self.p < 1.0) {
            return Err(Error::param(format!(
                "p must lie in (0, 1), got {}",
                self.p
            )));
        }
        if !(0.0..=1.0).contains(&self.s) {
            return Err(Error::param(format!(
                "s must lie in [0, 1], got {}",
                self.s
            )));
        }
        Ok(())
    }

    /// Marginal edge probability of each observed hypergraph, `p·s`.
    pub fn edge_probability(&self) -> f64 {
        self.p * self.s
    }

    /// `P(A₂[π(e)] = 1 | A₁[e] = 0) = ps(1−s)/(1−ps)`.
    pub fn conditional_absent(&self) -> f64 {
        let ps = self.p * self.s;
        ps * (1.0 - self.s) / (1.0 - ps)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ModelSpec {
    Gaussian(GaussianSpec),
    Er(ErSpec),
}

impl ModelSpec {
    pub fn n(&self) -> usize {
        match self {
            ModelSpec::Gaussian(g) => g.n,
            ModelSpec::Er(e) => e.n,
        }
    }

    pub fn m(&self) -> usize {
        match self {
            ModelSpec::Gaussian(g) => g.m,
            ModelSpec::Er(e) => e.m,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ModelSpec::Gaussian(_) => "gaussian",
            ModelSpec::Er(_) => "er",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ModelSpec::Gaussian(g) => g.validate(),
            ModelSpec::Er(e) => e.validate(),
        }
    }

    /// Pair correlation under H₁.
    pub fn correlation(&self) -> Result<f64> {
        match self {
            ModelSpec::Gaussian(g) => Ok(g.rho),
            ModelSpec::Er(e) => er_correlation(e.p, e.s),
        }
    }
}

/// A sampled pair. `planted` is the hidden alignment under H₁; test
/// statistics only ever see `a1` and `a2`.
#[derive(Clone, Debug, PartialEq)]
pub struct SamplePair {
    pub a1: AdjacencyTensor,
    pub a2: AdjacencyTensor,
    pub planted: Option<Permutation>,
}

impl SamplePair {
    pub fn hypothesis(&self) -> Hypothesis {
        if self.planted.is_some() {
            Hypothesis::H1
        } else {
            Hypothesis::H0
        }
    }
}

/// `(A₁[e], A₂[π(e)])` for every hyperedge `e`, in rank order of `e`.
pub fn aligned_values(
    a1: &AdjacencyTensor,
    a2: &AdjacencyTensor,
    perm: &Permutation,
) -> Result<Vec<(f64, f64)>> {
    if !a1.same_shape(a2) || perm.len() != a1.n {
        return Err(Error::param("tensors and permutation disagree in shape"));
    }
    let space = HyperedgeSpace::shared(a1.n, a1.m)?;
    let image = space.image_ranks(perm);
    Ok(a1
        .values
        .iter()
        .zip(&image)
        .map(|(&x, &r)| (x, a2.values[r]))
        .collect())
}

/// Preimage rank of every rank under the hyperedge action of `perm`.
fn preimage_ranks(space: &HyperedgeSpace, perm: &Permutation) -> Vec<usize> {
    let image = space.image_ranks(perm);
    let mut pre = vec![0; image.len()];
    for (r, &t) in image.iter().enumerate() {
        pre[t] = r;
    }
    pre
}

pub fn sample_gaussian<R: Rng + ?Sized>(
    spec: &GaussianSpec,
    hypothesis: Hypothesis,
    rng: &mut R,
) -> Result<SamplePair> {
    spec.validate()?;
    let space = HyperedgeSpace::shared(spec.n, spec.m)?;
    let len = space.len();
    match hypothesis {
        Hypothesis::H0 => {
            let a1: Vec<f64> = (0..len).map(|_| rng.sample(StandardNormal)).collect();
            let a2: Vec<f64> = (0..len).map(|_| rng.sample(StandardNormal)).collect();
            Ok(SamplePair {
                a1: AdjacencyTensor::from_values(spec.n, spec.m, a1)?,
                a2: AdjacencyTensor::from_values(spec.n, spec.m, a2)?,
                planted: None,
            })
        }
        Hypothesis::H1 => {
            let perm = Permutation::random(spec.n, rng);
            let pre = preimage_ranks(&space, &perm);
            let a1: Vec<f64> = (0..len).map(|_| rng.sample(StandardNormal)).collect();
            let noise = (1.0 - spec.rho * spec.rho).sqrt();
            let a2: Vec<f64> = (0..len)
                .map(|r| {
                    let z: f64 = rng.sample(StandardNormal);
                    spec.rho * a1[pre[r]] + noise * z
                })
                .collect();
            Ok(SamplePair {
                a1: AdjacencyTensor::from_values(spec.n, spec.m, a1)?,
                a2: AdjacencyTensor::from_values(spec.n, spec.m, a2)?,
                planted: Some(perm),
            })
        }
    }
}

#[inline]
fn bernoulli<R: Rng + ?Sized>(rng: &mut R, p: f64) -> f64 {
    if rng.random::<f64>() < p {
        1.0
    } else {
        0.0
    }
}

/// Samples the subsampled Erdős–Rényi pair from its conditional form:
/// `A₁[e] ~ Bern(ps)` and, given `A₁[e]`, `A₂[π(e)] ~ Bern(s)` when the
/// edge is present and `Bern(ps(1−s)/(1−ps))` when it is absent.
pub fn sample_er<R: Rng + ?Sized>(
    spec: &ErSpec,
    hypothesis: Hypothesis,
    rng: &mut R,
) -> Result<SamplePair> {
    spec.validate()?;
    let space = HyperedgeSpace::shared(spec.n, spec.m)?;
    let len = space.len();
    let q = spec.edge_probability();
    match hypothesis {
        Hypothesis::H0 => {
            let a1: Vec<f64> = (0..len).map(|_| bernoulli(rng, q)).collect();
            let a2: Vec<f64> = (0..len).map(|_| bernoulli(rng, q)).collect();
            Ok(SamplePair {
                a1: AdjacencyTensor::from_values(spec.n, spec.m, a1)?,
                a2: AdjacencyTensor::from_values(spec.n, spec.m, a2)?,
                planted: None,
            })
        }
        Hypothesis::H1 => {
            let perm = Permutation::random(spec.n, rng);
            let pre = preimage_ranks(&space, &perm);
            let absent = spec.conditional_absent();
            let a1: Vec<f64> = (0..len).map(|_| bernoulli(rng, q)).collect();
            let a2: Vec<f64> = (0..len)
                .map(|r| {
                    let p = if a1[pre[r]] == 1.0 { spec.s } else { absent };
                    bernoulli(rng, p)
                })
                .collect();
            Ok(SamplePair {
                a1: AdjacencyTensor::from_values(spec.n, spec.m, a1)?,
                a2: AdjacencyTensor::from_values(spec.n, spec.m, a2)?,
                planted: Some(perm),
            })
        }
    }
}

pub fn sample<R: Rng + ?Sized>(
    model: &ModelSpec,
    hypothesis: Hypothesis,
    rng: &mut R,
) -> Result<SamplePair> {
    match model {
        ModelSpec::Gaussian(g) => sample_gaussian(g, hypothesis, rng),
        ModelSpec::Er(e) => sample_er(e, hypothesis, rng),
    }
}

/// Pair correlation of the subsampled Erdős–Rényi model, `s(1−p)/(1−ps)`.
pub fn er_correlation(p: f64, s: f64) -> Result<f64> {
    if !(p > 0.0 && p <= 1.0) || !(0.0..=1.0).contains(&s) {
        return Err(Error::domain(format!(
            "er_correlation needs 0 < p <= 1 and 0 <= s <= 1, got p={p}, s={s}"
        )));
    }
    let denom = 1.0 - p * s;
    if denom <= 0.0 {
        return Err(Error::domain("er_correlation undefined at p·s = 1"));
    }
    Ok(s * (1.0 - p) / denom)
}
