//! Closed-form conditional probabilities for one student's turn in the
//! uniform one-seat market, given the number `k` of schools already taken.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

fn check_list(n: usize, d: usize, k: usize) -> Result<()> {
    if d == 0 || d > n {
        return Err(Error::domain(format!("need 1 <= d <= n, got d = {d}, n = {n}")));
    }
    if k > n {
        return Err(Error::domain(format!("taken count k = {k} exceeds n = {n}")));
    }
    Ok(())
}

/// `C(k, d) / C(n, d)` as the falling-factorial ratio `prod (k-j)/(n-j)`.
fn all_taken<S: Scalar>(n: usize, d: usize, k: usize) -> S {
    if k < d {
        return S::zero();
    }
    (0..d).fold(S::one(), |acc, j| {
        acc * S::from_count(k - j) / S::from_count(n - j)
    })
}

/// Probability that a uniformly random list of `d` distinct schools contains
/// at least one of the `n - k` free schools.
pub fn match_prob_exact<S: Scalar>(n: usize, d: usize, k: usize) -> Result<S> {
    check_list(n, d, k)?;
    Ok(S::one() - all_taken::<S>(n, d, k))
}

/// The with-replacement approximation `1 - (k/n)^d`. Differs from
/// [`match_prob_exact`] by at most `d^2 / n`.
pub fn match_prob_approx<S: Scalar>(n: usize, d: usize, k: usize) -> Result<S> {
    check_list(n, d, k)?;
    let frac = S::from_count(k) / S::from_count(n);
    let power = (0..d).fold(S::one(), |acc, _| acc * frac.clone());
    Ok(S::one() - power)
}

/// Worst-case gap between [`match_prob_approx`] and [`match_prob_exact`].
pub fn match_prob_approx_bound(n: usize, d: usize) -> f64 {
    (d * d) as f64 / n as f64
}

/// `P(K = r | T = k)`: the first `r - 1` draws hit taken schools and draw
/// `r` hits a free one.
pub fn rank_prob_given_taken<S: Scalar>(n: usize, d: usize, k: usize, r: usize) -> Result<S> {
    check_list(n, d, k)?;
    if r == 0 || r > d {
        return Err(Error::domain(format!("rank r = {r} outside 1..={d}")));
    }
    if k < r - 1 {
        return Ok(S::zero());
    }
    let misses = (0..r - 1).fold(S::one(), |acc, j| {
        acc * S::from_count(k - j) / S::from_count(n - j)
    });
    Ok(misses * S::from_count(n - k) / S::from_count(n - (r - 1)))
}

/// `P(K <= top | T = k)`, i.e. the conditional rank CDF.
pub fn rank_cdf_given_taken<S: Scalar>(n: usize, d: usize, k: usize, top: usize) -> Result<S> {
    check_list(n, d, k)?;
    if top == 0 || top > d {
        return Err(Error::domain(format!("rank threshold {top} outside 1..={d}")));
    }
    // Matching within the top ranks is the same as a list of length `top`
    // reaching a free school.
    match_prob_exact(n, top, k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;
    use num_traits::{One, Zero};
    use proptest::prelude::*;

    fn rat(num: i64, den: i64) -> Rational {
        Rational::new(num.into(), den.into())
    }

    /// All ordered tuples of `d` distinct schools out of `n`.
    fn ordered_lists(n: usize, d: usize) -> Vec<Vec<usize>> {
        fn rec(n: usize, d: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            if cur.len() == d {
                out.push(cur.clone());
                return;
            }
            for s in 0..n {
                if !cur.contains(&s) {
                    cur.push(s);
                    rec(n, d, cur, out);
                    cur.pop();
                }
            }
        }
        let mut out = Vec::new();
        rec(n, d, &mut Vec::new(), &mut out);
        out
    }

    /// Brute-force P(K = r | first k schools taken), r = 0 meaning unmatched.
    fn brute_rank_law(n: usize, d: usize, k: usize) -> Vec<Rational> {
        let lists = ordered_lists(n, d);
        let total = Rational::from_count(lists.len());
        let mut counts = vec![0usize; d + 1];
        for list in &lists {
            let r = list.iter().position(|&s| s >= k).map_or(0, |p| p + 1);
            counts[r] += 1;
        }
        counts
            .into_iter()
            .map(|c| Rational::from_count(c) / total.clone())
            .collect()
    }

    #[test]
    fn spec_examples() {
        assert_eq!(match_prob_exact::<f64>(10, 3, 2).unwrap(), 1.0);
        assert_eq!(match_prob_exact::<Rational>(4, 2, 2).unwrap(), rat(5, 6));
        assert_eq!(match_prob_exact::<Rational>(5, 2, 3).unwrap(), rat(7, 10));

        assert_eq!(match_prob_approx::<f64>(1000, 1, 500).unwrap(), 0.5);
        assert_eq!(match_prob_approx::<f64>(4, 2, 2).unwrap(), 0.75);
        let exact = match_prob_exact::<f64>(1000, 2, 500).unwrap();
        assert!((exact - (1.0 - 500.0 * 499.0 / (1000.0 * 999.0))).abs() < 1e-15);
        assert!((exact - 0.75).abs() <= match_prob_approx_bound(1000, 2));

        assert_eq!(rank_prob_given_taken::<f64>(10, 3, 0, 1).unwrap(), 1.0);
        assert_eq!(rank_prob_given_taken::<Rational>(4, 2, 2, 2).unwrap(), rat(1, 3));
        assert_eq!(rank_prob_given_taken::<Rational>(4, 2, 2, 1).unwrap(), rat(1, 2));
    }

    #[test]
    fn matches_brute_force_enumeration() {
        for n in 1..=5 {
            for d in 1..=n {
                for k in 0..=n {
                    let law = brute_rank_law(n, d, k);
                    let matched = Rational::one() - law[0].clone();
                    assert_eq!(match_prob_exact::<Rational>(n, d, k).unwrap(), matched);
                    for r in 1..=d {
                        assert_eq!(
                            rank_prob_given_taken::<Rational>(n, d, k, r).unwrap(),
                            law[r],
                            "n={n} d={d} k={k} r={r}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn domain_errors() {
        assert!(match_prob_exact::<f64>(4, 5, 0).is_err());
        assert!(match_prob_exact::<f64>(4, 2, 5).is_err());
        assert!(match_prob_exact::<f64>(4, 0, 0).is_err());
        assert!(rank_prob_given_taken::<f64>(4, 2, 1, 3).is_err());
        assert!(rank_prob_given_taken::<f64>(4, 2, 1, 0).is_err());
        assert!(match_prob_approx::<f64>(4, 2, 9).is_err());
    }

    #[test]
    fn full_taken_set_never_matches() {
        for n in 1..20 {
            for d in 1..=n {
                assert!(match_prob_exact::<Rational>(n, d, n).unwrap().is_zero());
            }
        }
    }

    proptest! {
        #[test]
        fn rank_probs_sum_to_match_prob(n in 1usize..64, d_seed in 0usize..64, k_seed in 0usize..65) {
            let d = d_seed % n + 1;
            let k = k_seed % (n + 1);
            let sum: Rational = (1..=d)
                .map(|r| rank_prob_given_taken::<Rational>(n, d, k, r).unwrap())
                .fold(Rational::zero(), |a, b| a + b);
            prop_assert_eq!(sum, match_prob_exact::<Rational>(n, d, k).unwrap());

            let fsum: f64 = (1..=d).map(|r| rank_prob_given_taken::<f64>(n, d, k, r).unwrap()).sum();
            prop_assert!((fsum - match_prob_exact::<f64>(n, d, k).unwrap()).abs() <= 1e-12);
        }

        #[test]
        fn monotone_in_k_and_d(n in 1usize..64, d_seed in 0usize..64, k_seed in 0usize..64) {
            let d = d_seed % n + 1;
            let k = k_seed % n;
            let here = match_prob_exact::<Rational>(n, d, k).unwrap();
            prop_assert!(match_prob_exact::<Rational>(n, d, k + 1).unwrap() <= here);
            if d < n {
                prop_assert!(match_prob_exact::<Rational>(n, d + 1, k).unwrap() >= here);
            }
        }

        #[test]
        fn approximation_within_bound(n in 1usize..2000, d_seed in 0usize..40, k_seed in 0usize..2001) {
            let d = d_seed % n.min(40) + 1;
            let k = k_seed % (n + 1);
            let gap = (match_prob_approx::<f64>(n, d, k).unwrap() - match_prob_exact::<f64>(n, d, k).unwrap()).abs();
            prop_assert!(gap <= match_prob_approx_bound(n, d) + 1e-15);
        }

        #[test]
        fn top_rank_cdf_is_sum_of_rank_probs(n in 1usize..40, d_seed in 0usize..40, k_seed in 0usize..41, t_seed in 0usize..40) {
            let d = d_seed % n + 1;
            let k = k_seed % (n + 1);
            let top = t_seed % d + 1;
            let sum: Rational = (1..=top)
                .map(|r| rank_prob_given_taken::<Rational>(n, d, k, r).unwrap())
                .fold(Rational::zero(), |a, b| a + b);
            prop_assert_eq!(sum, rank_cdf_given_taken::<Rational>(n, d, k, top).unwrap());
        }
    }
}
