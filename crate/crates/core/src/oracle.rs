//! Exact match and rank probabilities for the uniform one-seat market.
//!
//! With lists revealed only at a student's turn, the number of full schools
//! `T_i` is a Markov chain: from `k` it moves to `k + 1` with probability
//! [`match_prob_exact`] and stays put otherwise. Propagating its law row by
//! row gives every per-student probability exactly (in rationals) or to
//! rounding (in floats). [`enumerate_market`] is an independent brute-force
//! oracle over whole preference lists for tiny markets.

use std::collections::BTreeMap;

use log::warn;

use crate::error::{Error, Result};
use crate::market::{match_prob_exact, rank_cdf_given_taken, Rank};
use crate::scalar::Scalar;

/// Largest `horizon * (n + 1)` table the DP will fill.
pub const MAX_DP_CELLS: usize = 100_000_000;

/// Largest number of joint list outcomes [`enumerate_market`] will visit.
pub const MAX_ENUMERATION: u128 = 10_000_000;

const RENORMALIZE_TOL: f64 = 1e-9;

/// Law of `T_i` for students `i = 1..=horizon`.
#[derive(Clone, Debug, PartialEq)]
pub struct TakenDistribution<S> {
    pub n: usize,
    pub d: usize,
    /// `pmf_by_student[i - 1][k] = P(T_i = k)`, `k = 0..=n`.
    pub pmf_by_student: Vec<Vec<S>>,
}

impl<S: Scalar> TakenDistribution<S> {
    pub fn horizon(&self) -> usize {
        self.pmf_by_student.len()
    }

    /// Law of `T_i`, one-based.
    pub fn row(&self, i: usize) -> &[S] {
        &self.pmf_by_student[i - 1]
    }

    pub fn expected_taken(&self, i: usize) -> S {
        self.row(i)
            .iter()
            .enumerate()
            .fold(S::zero(), |acc, (k, p)| acc + S::from_count(k) * p.clone())
    }
}

fn check_dims(n: usize, d: usize, horizon: usize) -> Result<()> {
    if d == 0 || d > n {
        return Err(Error::domain(format!("need 1 <= d <= n, got d = {d}, n = {n}")));
    }
    if horizon == 0 {
        return Err(Error::domain("horizon must be at least 1"));
    }
    if horizon.saturating_mul(n + 1) > MAX_DP_CELLS {
        return Err(Error::SizeGuard(format!(
            "horizon {horizon} x {} states exceeds {MAX_DP_CELLS} cells",
            n + 1
        )));
    }
    Ok(())
}

/// Walks the chain, calling `visit(i, row)` with the law of `T_i` for each
/// `i = 1..=horizon`.
fn walk_taken<S, F>(n: usize, d: usize, horizon: usize, mut visit: F) -> Result<()>
where
    S: Scalar,
    F: FnMut(usize, &[S]),
{
    check_dims(n, d, horizon)?;
    let step: Vec<S> = (0..=n)
        .map(|k| match_prob_exact::<S>(n, d, k))
        .collect::<Result<_>>()?;
    let mut row = vec![S::zero(); n + 1];
    row[0] = S::one();
    let mut next = row.clone();
    for i in 1..=horizon {
        visit(i, &row);
        if i == horizon {
            break;
        }
        // Row i is supported on 0..=min(i - 1, n).
        let top = i.min(n);
        next[0] = row[0].clone() * (S::one() - step[0].clone());
        for k in 1..=top {
            next[k] = row[k].clone() * (S::one() - step[k].clone())
                + row[k - 1].clone() * step[k - 1].clone();
        }
        std::mem::swap(&mut row, &mut next);
        renormalize(&mut row[..=top], i + 1);
    }
    Ok(())
}

fn renormalize<S: Scalar>(row: &mut [S], student: usize) {
    let total = row.iter().fold(S::zero(), |a, b| a + b.clone());
    let drift = total.as_f64() - 1.0;
    if drift.abs() > RENORMALIZE_TOL {
        warn!("taken law of student {student} sums to 1{drift:+e}; renormalizing");
        for p in row.iter_mut() {
            *p = p.clone() / total.clone();
        }
    }
}

/// Full table of `P(T_i = k)` for `i = 1..=horizon`.
pub fn taken_distribution<S: Scalar>(
    n: usize,
    d: usize,
    horizon: usize,
) -> Result<TakenDistribution<S>> {
    let mut rows = Vec::with_capacity(horizon);
    walk_taken::<S, _>(n, d, horizon, |_, row| rows.push(row.to_vec()))?;
    Ok(TakenDistribution {
        n,
        d,
        pmf_by_student: rows,
    })
}

fn weighted_sum<S: Scalar>(row: &[S], weights: &[S]) -> S {
    row.iter()
        .zip(weights)
        .fold(S::zero(), |acc, (p, w)| acc + p.clone() * w.clone())
}

/// `P(M_i = 1)` for every `i = 1..=horizon`.
pub fn exact_match_curve<S: Scalar>(n: usize, d: usize, horizon: usize) -> Result<Vec<S>> {
    let step: Vec<S> = (0..=n)
        .map(|k| match_prob_exact::<S>(n, d, k))
        .collect::<Result<_>>()?;
    let mut out = Vec::with_capacity(horizon);
    walk_taken::<S, _>(n, d, horizon, |_, row| out.push(weighted_sum(row, &step)))?;
    Ok(out)
}

/// `E[T_i]` for every `i = 1..=horizon`.
pub fn expected_taken_curve<S: Scalar>(n: usize, d: usize, horizon: usize) -> Result<Vec<S>> {
    let counts: Vec<S> = (0..=n).map(S::from_count).collect();
    let mut out = Vec::with_capacity(horizon);
    walk_taken::<S, _>(n, d, horizon, |_, row| out.push(weighted_sum(row, &counts)))?;
    Ok(out)
}

/// `P(M_i = 1)` for a single student `i`.
pub fn exact_match_prob<S: Scalar>(n: usize, d: usize, i: usize) -> Result<S> {
    Ok(exact_match_curve::<S>(n, d, i)?.pop().expect("horizon >= 1"))
}

/// `P(K_i <= top)` for every `i = 1..=horizon`.
pub fn exact_rank_cdf_curve<S: Scalar>(
    n: usize,
    d: usize,
    horizon: usize,
    top: usize,
) -> Result<Vec<S>> {
    if top == 0 || top > d {
        return Err(Error::domain(format!("rank threshold {top} outside 1..={d}")));
    }
    let step: Vec<S> = (0..=n)
        .map(|t| rank_cdf_given_taken::<S>(n, d, t, top))
        .collect::<Result<_>>()?;
    let mut out = Vec::with_capacity(horizon);
    walk_taken::<S, _>(n, d, horizon, |_, row| out.push(weighted_sum(row, &step)))?;
    Ok(out)
}

/// `P(K_i <= top)`: the chance student `i` gets one of their top `top`
/// listed schools. The threshold is unrelated to the taken count it is
/// averaged over.
pub fn exact_rank_cdf<S: Scalar>(n: usize, d: usize, i: usize, top: usize) -> Result<S> {
    Ok(exact_rank_cdf_curve::<S>(n, d, i, top)?
        .pop()
        .expect("horizon >= 1"))
}

/// Exact joint law of all students' ranks in a small one-seat market.
///
/// In a one-seat market the taken counts are a function of the ranks, so
/// the rank vector is the whole outcome.
#[derive(Clone, Debug, PartialEq)]
pub struct MarketLaw<S> {
    pub n: usize,
    pub d: usize,
    pub m: usize,
    pub outcomes: BTreeMap<Vec<Rank>, S>,
}

impl<S: Scalar> MarketLaw<S> {
    fn sum_where(&self, pred: impl Fn(&[Rank]) -> bool) -> S {
        self.outcomes
            .iter()
            .filter(|(ranks, _)| pred(ranks))
            .fold(S::zero(), |acc, (_, p)| acc + p.clone())
    }

    pub fn total(&self) -> S {
        self.sum_where(|_| true)
    }

    /// `P(M_i = 1)`, one-based.
    pub fn p_matched(&self, i: usize) -> S {
        self.sum_where(|r| r[i - 1].is_matched())
    }

    pub fn rank_cdf(&self, i: usize, top: usize) -> S {
        self.sum_where(|r| r[i - 1].within(top))
    }

    /// Law of `T_i` over `0..=n`.
    pub fn taken_law(&self, i: usize) -> Vec<S> {
        let mut law = vec![S::zero(); self.n + 1];
        for (ranks, p) in &self.outcomes {
            let t = ranks[..i - 1].iter().filter(|r| r.is_matched()).count();
            law[t] = law[t].clone() + p.clone();
        }
        law
    }

    pub fn expected_taken(&self, i: usize) -> S {
        self.taken_law(i)
            .into_iter()
            .enumerate()
            .fold(S::zero(), |acc, (k, p)| acc + S::from_count(k) * p)
    }

    /// Probability of exactly this rank vector.
    pub fn prob(&self, ranks: &[Rank]) -> S {
        self.outcomes.get(ranks).cloned().unwrap_or_else(S::zero)
    }
}

/// Brute-force law of the market over every student's full ordered list.
///
/// `weights = None` is the uniform market; otherwise lists are successive
/// weighted draws without replacement.
pub fn enumerate_market<S: Scalar>(
    n: usize,
    d: usize,
    m: usize,
    weights: Option<&[S]>,
) -> Result<MarketLaw<S>> {
    if d == 0 || d > n || m == 0 {
        return Err(Error::domain(format!("need 1 <= d <= n and m >= 1, got n={n} d={d} m={m}")));
    }
    let lists_per_student: u128 = (0..d).map(|j| (n - j) as u128).product();
    let total = (0..m).try_fold(1u128, |acc, _| acc.checked_mul(lists_per_student));
    if total.is_none_or(|t| t > MAX_ENUMERATION) {
        return Err(Error::SizeGuard(format!(
            "{lists_per_student}^{m} list combinations exceed {MAX_ENUMERATION}"
        )));
    }
    let weights: Vec<S> = match weights {
        Some(w) if w.len() != n => {
            return Err(Error::domain(format!("{} weights for {n} schools", w.len())))
        }
        Some(w) => w.to_vec(),
        None => vec![S::one() / S::from_count(n); n],
    };

    let lists = ordered_lists(d, &weights);
    let mut law = MarketLaw {
        n,
        d,
        m,
        outcomes: BTreeMap::new(),
    };
    let mut taken = vec![false; n];
    let mut ranks = Vec::with_capacity(m);
    enumerate_students(&lists, m, S::one(), &mut taken, &mut ranks, &mut law.outcomes);
    Ok(law)
}

/// Every ordered list of distinct schools with its probability.
fn ordered_lists<S: Scalar>(d: usize, weights: &[S]) -> Vec<(Vec<usize>, S)> {
    fn rec<S: Scalar>(
        d: usize,
        weights: &[S],
        cur: &mut Vec<usize>,
        prob: S,
        remaining: S,
        out: &mut Vec<(Vec<usize>, S)>,
    ) {
        if cur.len() == d {
            out.push((cur.clone(), prob));
            return;
        }
        for s in 0..weights.len() {
            if cur.contains(&s) || weights[s] == S::zero() {
                continue;
            }
            cur.push(s);
            let p = prob.clone() * weights[s].clone() / remaining.clone();
            rec(d, weights, cur, p, remaining.clone() - weights[s].clone(), out);
            cur.pop();
        }
    }
    let mass = weights.iter().fold(S::zero(), |a, b| a + b.clone());
    let mut out = Vec::new();
    rec(d, weights, &mut Vec::with_capacity(d), S::one(), mass, &mut out);
    out
}

fn enumerate_students<S: Scalar>(
    lists: &[(Vec<usize>, S)],
    students_left: usize,
    prob: S,
    taken: &mut [bool],
    ranks: &mut Vec<Rank>,
    out: &mut BTreeMap<Vec<Rank>, S>,
) {
    if students_left == 0 {
        let entry = out.entry(ranks.clone()).or_insert_with(S::zero);
        *entry = entry.clone() + prob;
        return;
    }
    for (list, p) in lists {
        let pick = list.iter().position(|&s| !taken[s]);
        let rank = match pick {
            Some(pos) => {
                taken[list[pos]] = true;
                Rank::Matched(pos as u32 + 1)
            }
            None => Rank::Unmatched,
        };
        ranks.push(rank);
        enumerate_students(lists, students_left - 1, prob.clone() * p.clone(), taken, ranks, out);
        ranks.pop();
        if let Some(pos) = pick {
            taken[list[pos]] = false;
        }
    }
}
