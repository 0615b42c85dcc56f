//! Lazy preference-list sampling.
//!
//! A student's list is revealed one school at a time, each draw uniform (or
//! weight-proportional) over the schools not yet on the list. Stopping at the
//! first free school yields the same rank law as drawing the whole list up
//! front and scanning it.

use rand::distr::Distribution;
use rand_distr::weighted::WeightedAliasIndex;

use crate::market::config::MarketConfig;
use crate::rng::RandomStream;

/// Consecutive alias-table rejections before switching to an exact scan.
const MAX_REJECTIONS: usize = 32;

#[derive(Clone, Debug)]
pub(crate) enum ListSampler {
    Uniform(UniformLists),
    Weighted(WeightedLists),
}

impl ListSampler {
    pub(crate) fn new(config: &MarketConfig) -> Self {
        if config.dist.is_uniform() {
            ListSampler::Uniform(UniformLists::new(config.n))
        } else {
            ListSampler::Weighted(WeightedLists::new(config.dist.weights(), config.d))
        }
    }

    /// Draws the next school of the current list, or `None` when no school
    /// with positive weight remains off the list.
    #[inline]
    pub(crate) fn next_school(&mut self, rng: &mut RandomStream) -> Option<usize> {
        match self {
            ListSampler::Uniform(s) => s.next_school(rng),
            ListSampler::Weighted(s) => s.next_school(rng),
        }
    }

    /// Forgets the current list so the next draw starts a fresh one.
    #[inline]
    pub(crate) fn end_list(&mut self) {
        match self {
            ListSampler::Uniform(s) => s.end_list(),
            ListSampler::Weighted(s) => s.drawn.clear(),
        }
    }
}

/// Partial Fisher-Yates over a persistent permutation; the swaps of each list
/// are undone afterwards so a list costs O(d) rather than O(n).
#[derive(Clone, Debug)]
pub(crate) struct UniformLists {
    perm: Vec<u32>,
    swaps: Vec<u32>,
}

impl UniformLists {
    fn new(n: usize) -> Self {
        Self {
            perm: (0..n as u32).collect(),
            swaps: Vec::new(),
        }
    }

    #[inline]
    fn next_school(&mut self, rng: &mut RandomStream) -> Option<usize> {
        let r = self.swaps.len();
        if r == self.perm.len() {
            return None;
        }
        let j = rng.index_in(r, self.perm.len());
        self.perm.swap(r, j);
        self.swaps.push(j as u32);
        Some(self.perm[r] as usize)
    }

    #[inline]
    fn end_list(&mut self) {
        while let Some(j) = self.swaps.pop() {
            self.perm.swap(self.swaps.len(), j as usize);
        }
    }
}

/// Successive weighted draws without replacement. Draws come from an alias
/// table and are rejected if already on the list, which is exactly sampling
/// from the renormalized remaining weights.
#[derive(Clone, Debug)]
pub(crate) struct WeightedLists {
    weights: Vec<f64>,
    alias: WeightedAliasIndex<f64>,
    drawn: Vec<usize>,
}

impl WeightedLists {
    fn new(weights: &[f64], d: usize) -> Self {
        Self {
            weights: weights.to_vec(),
            alias: WeightedAliasIndex::new(weights.to_vec())
                .expect("weights validated by MarketConfig"),
            drawn: Vec::with_capacity(d),
        }
    }

    fn next_school(&mut self, rng: &mut RandomStream) -> Option<usize> {
        for _ in 0..MAX_REJECTIONS {
            let s = self.alias.sample(rng);
            if !self.drawn.contains(&s) {
                self.drawn.push(s);
                return Some(s);
            }
        }
        let s = self.scan_remaining(rng)?;
        self.drawn.push(s);
        Some(s)
    }

    fn scan_remaining(&self, rng: &mut RandomStream) -> Option<usize> {
        let free = |j: &usize| !self.drawn.contains(j) && self.weights[*j] > 0.0;
        let total: f64 = (0..self.weights.len())
            .filter(free)
            .map(|j| self.weights[j])
            .sum();
        if total <= 0.0 {
            return None;
        }
        let target = rng.unit() * total;
        let mut acc = 0.0;
        let mut last = None;
        for j in (0..self.weights.len()).filter(free) {
            acc += self.weights[j];
            last = Some(j);
            if target < acc {
                return Some(j);
            }
        }
        last
    }
}
