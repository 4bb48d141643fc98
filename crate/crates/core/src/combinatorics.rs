//! Hyperedge indexing, permutation algebra and hyperedge orbits.
//!
//! Vertices are `0..n` internally. Everything that crosses an I/O boundary
//! (serialization, `Display`, cycle-notation parsing) uses labels `1..=n`.
//!
//! A hyperedge is a sorted `m`-subset of the vertices. The complete
//! `m`-uniform hypergraph on `n` vertices is indexed densely by the
//! lexicographic rank of its hyperedges, and tensors store one value per
//! rank. A vertex permutation acts on hyperedges by relabeling and
//! re-sorting; the cycles of that induced action are the hyperedge orbits.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, Mutex, OnceLock};

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Vertex sets are stored as `u64` bitmasks, which caps the vertex count.
pub const MAX_VERTICES: usize = 64;

/// Largest number of hyperedges a [`HyperedgeSpace`] will materialize.
pub const MAX_EDGES: usize = 1 << 26;

/// Vertex counts up to this size get a dense mask → rank lookup table.
const DENSE_LOOKUP_MAX_N: usize = 20;

/// Exact binomial coefficient; `None` on `u64` overflow.
pub fn checked_binomial(n: usize, k: usize) -> Option<u64> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return None;
        }
    }
    Some(acc as u64)
}

/// Exact binomial coefficient.
///
/// Panics on `u64` overflow, which cannot happen for `n <= 64`.
pub fn binomial(n: usize, k: usize) -> u64 {
    checked_binomial(n, k).expect("binomial coefficient overflows u64")
}

/// Binomial coefficient as a float, for arguments far beyond the vertex cap.
pub fn binomial_f64(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

pub fn factorial(n: usize) -> u64 {
    (1..=n as u64).product()
}

/// A hyperedge: strictly increasing 0-based vertex labels.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HyperedgeIndex {
    vertices: Vec<usize>,
}

impl HyperedgeIndex {
    /// Builds a hyperedge from 0-based labels, sorting them.
    pub fn new(mut vertices: Vec<usize>, n: usize) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::param("a hyperedge needs at least one vertex"));
        }
        vertices.sort_unstable();
        if vertices.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::param(format!(
                "repeated vertex in hyperedge {vertices:?}"
            )));
        }
        if let Some(&v) = vertices.last() {
            if v >= n {
                return Err(Error::param(format!("vertex {} outside 1..={n}", v + 1)));
            }
        }
        Ok(HyperedgeIndex { vertices })
    }

    /// Builds a hyperedge from 1-based labels.
    pub fn from_one_based(labels: &[usize], n: usize) -> Result<Self> {
        if labels.contains(&0) {
            return Err(Error::param("vertex labels start at 1"));
        }
        Self::new(labels.iter().map(|&v| v - 1).collect(), n)
    }

    pub fn vertices(&self) -> &[usize] {
        &self.vertices
    }

    pub fn to_one_based(&self) -> Vec<usize> {
        self.vertices.iter().map(|&v| v + 1).collect()
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn mask(&self) -> u64 {
        self.vertices.iter().fold(0, |acc, &v| acc | (1u64 << v))
    }
}

impl fmt::Display for HyperedgeIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, v) in self.vertices.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", v + 1)?;
        }
        write!(f, "}}")
    }
}

type SpaceCache = HashMap<(usize, usize), Arc<HyperedgeSpace>>;

/// All `m`-subsets of `n` vertices in lexicographic order, with rank/unrank.
#[derive(Clone, Debug)]
pub struct HyperedgeSpace {
    n: usize,
    m: usize,
    count: usize,
    /// `binom[a][b] = C(a, b)` for `a <= n`, `b <= m`.
    binom: Vec<Vec<u64>>,
    masks: Vec<u64>,
    lookup: Option<Vec<u32>>,
}

impl HyperedgeSpace {
    pub fn new(n: usize, m: usize) -> Result<Self> {
        if m < 1 || m > n {
            return Err(Error::param(format!(
                "uniformity m={m} must satisfy 1 <= m <= n={n}"
            )));
        }
        if n > MAX_VERTICES {
            return Err(Error::param(format!(
                "n={n} exceeds the supported vertex count {MAX_VERTICES}"
            )));
        }
        let count = checked_binomial(n, m)
            .filter(|&c| c as usize <= MAX_EDGES)
            .ok_or_else(|| {
                Error::Refused(format!(
                    "C({n},{m}) hyperedges exceed the materialization cap {MAX_EDGES}"
                ))
            })? as usize;

        let binom = (0..=n)
            .map(|a| (0..=m).map(|b| binomial(a, b)).collect())
            .collect();

        let mut masks = Vec::with_capacity(count);
        let mut combo: Vec<usize> = (0..m).collect();
        loop {
            masks.push(combo.iter().fold(0u64, |acc, &v| acc | (1 << v)));
            if !next_combination(&mut combo, n) {
                break;
            }
        }
        debug_assert_eq!(masks.len(), count);

        let lookup = (n <= DENSE_LOOKUP_MAX_N).then(|| {
            let mut table = vec![u32::MAX; 1 << n];
            for (rank, &mask) in masks.iter().enumerate() {
                table[mask as usize] = rank as u32;
            }
            table
        });

        Ok(HyperedgeSpace {
            n,
            m,
            count,
            binom,
            masks,
            lookup,
        })
    }

    /// Process-wide cached space for `(n, m)`.
    pub fn shared(n: usize, m: usize) -> Result<Arc<HyperedgeSpace>> {
        static CACHE: OnceLock<Mutex<SpaceCache>> = OnceLock::new();
        let cache = CACHE.get_or_init(Default::default);
        if let Some(space) = cache.lock().expect("space cache poisoned").get(&(n, m)) {
            return Ok(Arc::clone(space));
        }
        let space = Arc::new(HyperedgeSpace::new(n, m)?);
        let mut guard = cache.lock().expect("space cache poisoned");
        Ok(Arc::clone(guard.entry((n, m)).or_insert(space)))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Number of hyperedges, `C(n, m)`.
    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    /// Vertex bitmasks of all hyperedges, in rank order.
    pub fn masks(&self) -> &[u64] {
        &self.masks
    }

    /// Lexicographic rank of a sorted 0-based vertex tuple.
    pub fn rank_vertices(&self, vertices: &[usize]) -> usize {
        debug_assert_eq!(vertices.len(), self.m);
        // Complement of the colexicographic rank of the reflected subset.
        let reflected: u64 = vertices
            .iter()
            .enumerate()
            .map(|(i, &c)| self.binom[self.n - 1 - c][self.m - i])
            .sum();
        self.count - 1 - reflected as usize
    }

    pub fn rank(&self, edge: &HyperedgeIndex) -> Result<usize> {
        if edge.len() != self.m || edge.vertices.last().is_some_and(|&v| v >= self.n) {
            return Err(Error::param(format!(
                "hyperedge {edge} does not belong to the {}-uniform space on {} vertices",
                self.m, self.n
            )));
        }
        Ok(self.rank_vertices(&edge.vertices))
    }

    /// Rank of the hyperedge whose vertex set is `mask`.
    #[inline]
    pub fn rank_mask(&self, mask: u64) -> usize {
        match &self.lookup {
            Some(table) => table[mask as usize] as usize,
            None => {
                let vertices: Vec<usize> = (0..self.n).filter(|&v| mask >> v & 1 == 1).collect();
                self.rank_vertices(&vertices)
            }
        }
    }

    pub fn unrank(&self, rank: usize) -> Result<HyperedgeIndex> {
        if rank >= self.count {
            return Err(Error::param(format!(
                "rank {rank} outside 0..{}",
                self.count
            )));
        }
        let mask = self.masks[rank];
        let vertices = (0..self.n).filter(|&v| mask >> v & 1 == 1).collect();
        Ok(HyperedgeIndex { vertices })
    }

    pub fn edges(&self) -> impl Iterator<Item = HyperedgeIndex> + '_ {
        self.masks.iter().map(move |&mask| HyperedgeIndex {
            vertices: (0..self.n).filter(|&v| mask >> v & 1 == 1).collect(),
        })
    }

    /// Rank of `π(e)` for every rank `e`.
    pub fn image_ranks(&self, perm: &Permutation) -> Vec<usize> {
        debug_assert_eq!(perm.len(), self.n);
        self.masks
            .iter()
            .map(|&mask| self.rank_mask(perm.apply_mask(mask)))
            .collect()
    }

    /// Hyperedge orbit profile of `perm` by explicit traversal.
    pub fn orbit_profile(&self, perm: &Permutation) -> OrbitProfile {
        let image = self.image_ranks(perm);
        let mut visited = vec![0u64; self.count.div_ceil(64)];
        let mut counts = BTreeMap::new();
        for start in 0..self.count {
            if visited[start / 64] >> (start % 64) & 1 == 1 {
                continue;
            }
            let mut len = 0;
            let mut cur = start;
            loop {
                visited[cur / 64] |= 1 << (cur % 64);
                len += 1;
                cur = image[cur];
                if cur == start {
                    break;
                }
            }
            *counts.entry(len).or_insert(0) += 1;
        }
        OrbitProfile { counts }
    }
}

/// Advances a sorted combination of `0..n` in lexicographic order.
fn next_combination(combo: &mut [usize], n: usize) -> bool {
    let m = combo.len();
    let mut i = m;
    while i > 0 {
        i -= 1;
        if combo[i] < n - m + i {
            combo[i] += 1;
            for j in i + 1..m {
                combo[j] = combo[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Rearranges `items` into the next permutation in lexicographic order.
/// Returns `false` (leaving the slice sorted ascending) after the last one.
pub fn next_permutation(items: &mut [usize]) -> bool {
    if items.len() < 2 {
        return false;
    }
    let mut i = items.len() - 1;
    while i > 0 && items[i - 1] >= items[i] {
        i -= 1;
    }
    if i == 0 {
        items.reverse();
        return false;
    }
    let mut j = items.len() - 1;
    while items[j] <= items[i - 1] {
        j -= 1;
    }
    items.swap(i - 1, j);
    items[i..].reverse();
    true
}

/// The ordered list of hyperedges of the complete `m`-uniform hypergraph.
pub fn enumerate_hyperedges(n: usize, m: usize) -> Result<Vec<HyperedgeIndex>> {
    Ok(HyperedgeSpace::new(n, m)?.edges().collect())
}

/// A bijection on `0..n`; position `i` holds the image of `i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation {
    image: Vec<usize>,
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Permutation {
            image: (0..n).collect(),
        }
    }

    /// From a 0-based image array.
    pub fn from_image(image: Vec<usize>) -> Result<Self> {
        let n = image.len();
        let mut seen = vec![false; n];
        for &v in &image {
            if v >= n || std::mem::replace(&mut seen[v], true) {
                return Err(Error::param(format!(
                    "{image:?} is not a permutation of 0..{n}"
                )));
            }
        }
        Ok(Permutation { image })
    }

    /// From a 1-based image array.
    pub fn from_one_based(image: &[usize]) -> Result<Self> {
        if image.contains(&0) {
            return Err(Error::param("permutation labels start at 1"));
        }
        Self::from_image(image.iter().map(|&v| v - 1).collect())
    }

    /// From disjoint cycles written with 1-based labels; omitted vertices
    /// are fixed points.
    pub fn from_cycles(n: usize, cycles: &[Vec<usize>]) -> Result<Self> {
        let mut image: Vec<usize> = (0..n).collect();
        let mut used = vec![false; n];
        for cycle in cycles {
            for &v in cycle {
                if v == 0 || v > n {
                    return Err(Error::param(format!("label {v} outside 1..={n}")));
                }
                if std::mem::replace(&mut used[v - 1], true) {
                    return Err(Error::param(format!("label {v} appears in two cycles")));
                }
            }
            for (i, &v) in cycle.iter().enumerate() {
                image[v - 1] = cycle[(i + 1) % cycle.len()] - 1;
            }
        }
        Ok(Permutation { image })
    }

    /// Parses cycle notation such as `(1 2)(3 4 5)` or `(1,2)(3)`.
    /// The empty string and `()` denote the identity.
    pub fn parse_cycles(n: usize, text: &str) -> Result<Self> {
        let mut cycles = Vec::new();
        let mut rest = text.trim();
        while !rest.is_empty() {
            let body_start = rest
                .strip_prefix('(')
                .ok_or_else(|| Error::param(format!("expected '(' in cycle notation {text:?}")))?;
            let close = body_start
                .find(')')
                .ok_or_else(|| Error::param(format!("unclosed cycle in {text:?}")))?;
            let cycle = body_start[..close]
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|tok| !tok.is_empty())
                .map(|tok| {
                    tok.parse::<usize>()
                        .map_err(|_| Error::param(format!("bad vertex label {tok:?}")))
                })
                .collect::<Result<Vec<_>>>()?;
            if !cycle.is_empty() {
                cycles.push(cycle);
            }
            rest = body_start[close + 1..].trim_start();
        }
        Self::from_cycles(n, &cycles)
    }

    pub fn len(&self) -> usize {
        self.image.len()
    }

    pub fn is_empty(&self) -> bool {
        self.image.is_empty()
    }

    pub fn image(&self) -> &[usize] {
        &self.image
    }

    pub fn to_one_based(&self) -> Vec<usize> {
        self.image.iter().map(|&v| v + 1).collect()
    }

    #[inline]
    pub fn apply(&self, v: usize) -> usize {
        self.image[v]
    }

    #[inline]
    pub fn apply_mask(&self, mask: u64) -> u64 {
        let mut out = 0;
        let mut rest = mask;
        while rest != 0 {
            let v = rest.trailing_zeros() as usize;
            out |= 1 << self.image[v];
            rest &= rest - 1;
        }
        out
    }

    /// Sorted image `{π(i₁), …, π(i_m)}` of a hyperedge.
    pub fn apply_to_edge(&self, edge: &HyperedgeIndex) -> HyperedgeIndex {
        let mut vertices: Vec<usize> = edge.vertices.iter().map(|&v| self.image[v]).collect();
        vertices.sort_unstable();
        HyperedgeIndex { vertices }
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Permutation) -> Permutation {
        assert_eq!(
            self.len(),
            other.len(),
            "composing permutations of different size"
        );
        Permutation {
            image: other.image.iter().map(|&v| self.image[v]).collect(),
        }
    }

    pub fn inverse(&self) -> Permutation {
        let mut image = vec![0; self.len()];
        for (i, &v) in self.image.iter().enumerate() {
            image[v] = i;
        }
        Permutation { image }
    }

    pub fn is_identity(&self) -> bool {
        self.image.iter().enumerate().all(|(i, &v)| i == v)
    }

    /// Disjoint cycles (0-based), each starting at its smallest element,
    /// ordered by that element. Fixed points are included.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.len()];
        let mut cycles = Vec::new();
        for start in 0..self.len() {
            if seen[start] {
                continue;
            }
            let mut cycle = vec![start];
            seen[start] = true;
            let mut cur = self.image[start];
            while cur != start {
                seen[cur] = true;
                cycle.push(cur);
                cur = self.image[cur];
            }
            cycles.push(cycle);
        }
        cycles
    }

    pub fn cycle_type(&self) -> CycleType {
        let mut counts = vec![0; self.len() + 1];
        for cycle in self.cycles() {
            counts[cycle.len()] += 1;
        }
        CycleType { counts }
    }

    /// A permutation drawn uniformly from `S_n` by an unbiased shuffle.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Permutation {
        let mut image: Vec<usize> = (0..n).collect();
        image.shuffle(rng);
        Permutation { image }
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for cycle in self.cycles() {
            write!(f, "(")?;
            for (i, v) in cycle.iter().enumerate() {
                if i > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{}", v + 1)?;
            }
            write!(f, ")")?;
        }
        Ok(())
    }
}

impl Serialize for Permutation {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_one_based().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Permutation {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let labels = Vec::<usize>::deserialize(deserializer)?;
        Permutation::from_one_based(&labels).map_err(serde::de::Error::custom)
    }
}

/// Cycle decomposition together with its cycle type.
pub fn cycle_decomposition(perm: &Permutation) -> (Vec<Vec<usize>>, CycleType) {
    let cycles = perm.cycles();
    let mut counts = vec![0; perm.len() + 1];
    for cycle in &cycles {
        counts[cycle.len()] += 1;
    }
    (cycles, CycleType { counts })
}

pub fn apply_to_edge(perm: &Permutation, edge: &HyperedgeIndex) -> HyperedgeIndex {
    perm.apply_to_edge(edge)
}

pub fn compose(pi: &Permutation, sigma: &Permutation) -> Permutation {
    pi.compose(sigma)
}

pub fn invert(pi: &Permutation) -> Permutation {
    pi.inverse()
}

pub fn uniform_random_permutation<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Permutation {
    Permutation::random(n, rng)
}

/// Cycle-length counts `n_k` of a permutation of `n` points.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CycleType {
    /// `counts[k]` is the number of `k`-cycles; index 0 is unused.
    counts: Vec<usize>,
}

impl CycleType {
    /// Builds a cycle type from `(length, count)` pairs.
    pub fn from_pairs(pairs: &[(usize, usize)]) -> Result<Self> {
        let n: usize = pairs.iter().map(|&(k, c)| k * c).sum();
        let mut counts = vec![0; n + 1];
        for &(k, c) in pairs {
            if k == 0 {
                return Err(Error::param("cycles of length 0 do not exist"));
            }
            counts[k] += c;
        }
        Ok(CycleType { counts })
    }

    /// Number of points, `Σ k·n_k`.
    pub fn n(&self) -> usize {
        self.counts.iter().enumerate().map(|(k, &c)| k * c).sum()
    }

    /// `n_k`, zero when `k` exceeds the point count.
    pub fn get(&self, k: usize) -> usize {
        self.counts.get(k).copied().unwrap_or(0)
    }

    /// Nonzero `(k, n_k)` pairs in increasing `k`.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.counts
            .iter()
            .enumerate()
            .filter(|&(_, &c)| c > 0)
            .map(|(k, &c)| (k, c))
    }

    /// Size of the conjugacy class, `n! / Π_k (k^{n_k} n_k!)`.
    pub fn class_size(&self) -> u64 {
        let mut size = factorial(self.n()) as u128;
        for (k, c) in self.iter() {
            size /= (k as u128).pow(c as u32) * factorial(c) as u128;
        }
        size as u64
    }

    /// A permutation with this cycle type: consecutive blocks, shortest first.
    pub fn representative(&self) -> Permutation {
        let mut image = Vec::with_capacity(self.n());
        let mut next = 0;
        for (k, c) in self.iter() {
            for _ in 0..c {
                for i in 0..k {
                    image.push(next + (i + 1) % k);
                }
                next += k;
            }
        }
        Permutation { image }
    }

    /// Every cycle type of `S_n` (the integer partitions of `n`).
    pub fn all(n: usize) -> Vec<CycleType> {
        fn rec(
            remaining: usize,
            max_part: usize,
            counts: &mut Vec<usize>,
            out: &mut Vec<CycleType>,
        ) {
            if remaining == 0 {
                out.push(CycleType {
                    counts: counts.clone(),
                });
                return;
            }
            for k in (1..=max_part.min(remaining)).rev() {
                counts[k] += 1;
                rec(remaining - k, k, counts, out);
                counts[k] -= 1;
            }
        }
        let mut out = Vec::new();
        let mut counts = vec![0; n + 1];
        rec(n, n, &mut counts, &mut out);
        out
    }
}

impl Serialize for CycleType {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let map: BTreeMap<String, usize> = self.iter().map(|(k, c)| (k.to_string(), c)).collect();
        map.serialize(serializer)
    }
}

/// Counts `N_k` of hyperedge orbits of each length `k`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct OrbitProfile {
    counts: BTreeMap<usize, usize>,
}

impl OrbitProfile {
    /// `N_k`; zero when no orbit has length `k`.
    pub fn get(&self, k: usize) -> usize {
        self.counts.get(&k).copied().unwrap_or(0)
    }

    /// Number of fixed hyperedges, `N_1`.
    pub fn fixed(&self) -> usize {
        self.get(1)
    }

    /// Nonzero `(k, N_k)` pairs in increasing `k`.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.counts.iter().map(|(&k, &c)| (k, c))
    }

    /// `Σ_k k·N_k`, which equals the number of hyperedges.
    pub fn edge_total(&self) -> usize {
        self.counts.iter().map(|(&k, &c)| k * c).sum()
    }

    pub fn orbit_count(&self) -> usize {
        self.counts.values().sum()
    }
}

impl Serialize for OrbitProfile {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let map: BTreeMap<String, usize> = self
            .counts
            .iter()
            .map(|(k, &c)| (k.to_string(), c))
            .collect();
        map.serialize(serializer)
    }
}

/// Orbit profile of the hyperedge permutation induced by `perm` on
/// `m`-subsets, computed by traversal.
pub fn orbit_profile(perm: &Permutation, m: usize) -> Result<OrbitProfile> {
    Ok(HyperedgeSpace::shared(perm.len(), m)?.orbit_profile(perm))
}

/// Number of hyperedges fixed by any permutation of the given cycle type:
/// a fixed `m`-set is a union of whole cycles, so `N_1` is the sum over
/// `(j_1, …, j_m)` with `Σ k·j_k = m` of `Π_k C(n_k, j_k)`.
pub fn fixed_edge_count_closed_form(cycle_type: &CycleType, m: usize) -> u64 {
    fn rec(ct: &CycleType, k: usize, remaining: usize) -> u64 {
        if remaining == 0 {
            return 1;
        }
        if k > remaining {
            return 0;
        }
        let avail = ct.get(k);
        (0..=avail.min(remaining / k))
            .map(|j| binomial(avail, j) * rec(ct, k + 1, remaining - j * k))
            .sum()
    }
    rec(cycle_type, 1, m)
}

impl FromStr for HyperedgeIndex {
    type Err = Error;

    /// Parses `{1,2,3}` or `1,2,3` (1-based). The vertex bound is not
    /// known here, so only the label cap is checked.
    fn from_str(s: &str) -> Result<Self> {
        let body = s.trim().trim_start_matches('{').trim_end_matches('}');
        let labels = body
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .map(|t| {
                t.parse::<usize>()
                    .map_err(|_| Error::param(format!("bad label {t:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        HyperedgeIndex::from_one_based(&labels, MAX_VERTICES)
    }
}
