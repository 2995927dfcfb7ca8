//! Rank and empirical-distribution primitives.
//!
//! Ranks follow the indicator-count convention `R_j = #{i : x_i <= x_j}`, so
//! tied observations share the largest count of their group rather than an
//! averaged rank. For tie-free data this is the usual `1..=n` permutation.

use std::cmp::Ordering;

use crate::error::{check_finite, Error, Result};
use crate::scalar::Scalar;

/// Indicator-count ranks of a sample.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankVector {
    ranks: Vec<usize>,
}

impl RankVector {
    pub fn as_slice(&self) -> &[usize] {
        &self.ranks
    }

    pub fn into_vec(self) -> Vec<usize> {
        self.ranks
    }

    pub fn len(&self) -> usize {
        self.ranks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranks.is_empty()
    }

    pub fn sum_products(&self, other: &RankVector) -> u128 {
        self.ranks
            .iter()
            .zip(&other.ranks)
            .map(|(&r, &q)| r as u128 * q as u128)
            .sum()
    }
}

impl std::ops::Index<usize> for RankVector {
    type Output = usize;

    fn index(&self, i: usize) -> &usize {
        &self.ranks[i]
    }
}

/// Total order on finite values. Inputs are validated before sorting, so the
/// fallback arm is never taken for well-formed data.
#[inline]
pub(crate) fn cmp_finite<T: Scalar>(a: &T, b: &T) -> Ordering {
    a.partial_cmp(b).unwrap_or(Ordering::Equal)
}

/// Indices of `x` in ascending order of value (stable).
pub(crate) fn sort_order<T: Scalar>(x: &[T]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&a, &b| cmp_finite(&x[a], &x[b]));
    idx
}

/// Ranks without the finiteness check; callers validate once up front.
pub(crate) fn ranks_unchecked<T: Scalar>(x: &[T]) -> Vec<usize> {
    let order = sort_order(x);
    let mut ranks = vec![0usize; x.len()];
    let mut start = 0;
    while start < order.len() {
        let v = x[order[start]];
        let mut end = start + 1;
        while end < order.len() && x[order[end]] == v {
            end += 1;
        }
        // every member of the tie group sees `end` values <= itself
        for &i in &order[start..end] {
            ranks[i] = end;
        }
        start = end;
    }
    ranks
}

/// `ranks[j] = #{i : x[i] <= x[j]}`, in `O(n log n)`.
pub fn ranks_indicator<T: Scalar>(x: &[T]) -> Result<RankVector> {
    if x.is_empty() {
        return Err(Error::Empty("rank input"));
    }
    check_finite(x, "rank input")?;
    Ok(RankVector {
        ranks: ranks_unchecked(x),
    })
}

/// Right-continuous piecewise-constant function.
///
/// `eval(x)` returns the value attached to the largest jump point `<= x`, or
/// `left_value` when `x` lies before the first jump.
#[derive(Debug, Clone, PartialEq)]
pub struct StepFunction<T> {
    jump_points: Vec<T>,
    values: Vec<T>,
    left_value: T,
}

impl<T: Scalar> StepFunction<T> {
    pub fn new(jump_points: Vec<T>, values: Vec<T>, left_value: T) -> Result<Self> {
        if jump_points.len() != values.len() {
            return Err(Error::LengthMismatch {
                expected: jump_points.len(),
                found: values.len(),
            });
        }
        check_finite(&jump_points, "jump points")?;
        if jump_points.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter(
                "jump points must be strictly increasing".into(),
            ));
        }
        Ok(Self {
            jump_points,
            values,
            left_value,
        })
    }

    /// Constant function with no jumps.
    pub fn constant(value: T) -> Self {
        Self {
            jump_points: Vec::new(),
            values: Vec::new(),
            left_value: value,
        }
    }

    pub fn jump_points(&self) -> &[T] {
        &self.jump_points
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn left_value(&self) -> T {
        self.left_value
    }

    pub fn eval(&self, x: T) -> T {
        let k = self.jump_points.partition_point(|&p| p <= x);
        if k == 0 {
            self.left_value
        } else {
            self.values[k - 1]
        }
    }

    /// Left limit `f(x-)`: value at the largest jump point strictly below `x`.
    pub fn eval_left(&self, x: T) -> T {
        let k = self.jump_points.partition_point(|&p| p < x);
        if k == 0 {
            self.left_value
        } else {
            self.values[k - 1]
        }
    }

    /// Largest absolute difference to `other` over the union of both jump sets
    /// (exact sup-norm for step functions).
    pub fn sup_distance(&self, other: &StepFunction<T>) -> T {
        let mut d = (self.left_value - other.left_value).abs();
        for &p in self.jump_points.iter().chain(&other.jump_points) {
            d = d.max((self.eval(p) - other.eval(p)).abs());
        }
        d
    }
}

/// Empirical distribution function `F(x) = (1/n) #{i : x_i <= x}`.
pub fn ecdf<T: Scalar>(x: &[T]) -> Result<StepFunction<T>> {
    if x.is_empty() {
        return Err(Error::Empty("ecdf input"));
    }
    check_finite(x, "ecdf input")?;
    let n = T::from_count(x.len());
    let mut sorted = x.to_vec();
    sorted.sort_by(cmp_finite);
    let mut jumps = Vec::new();
    let mut values = Vec::new();
    for (i, &v) in sorted.iter().enumerate() {
        let last_of_group = i + 1 == sorted.len() || sorted[i + 1] != v;
        if last_of_group {
            jumps.push(v);
            values.push(T::from_count(i + 1) / n);
        }
    }
    Ok(StepFunction {
        jump_points: jumps,
        values,
        left_value: T::zero(),
    })
}

/// Closed-form Spearman coefficient from indicator ranks,
/// `12 [ S / (n (n² - 1)) - (n + 1) / (4 (n - 1)) ]` with `S = Σ R_j Q_j`.
///
/// Equals the classical coefficient for tie-free samples.
pub fn spearman_rho<T: Scalar>(x: &[T], y: &[T]) -> Result<T> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            expected: x.len(),
            found: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(Error::TooFewObservations {
            required: 2,
            found: x.len(),
        });
    }
    let r = ranks_indicator(x)?;
    let q = ranks_indicator(y)?;
    Ok(spearman_from_rank_sum(r.sum_products(&q), x.len()))
}

pub(crate) fn spearman_from_rank_sum<T: Scalar>(s: u128, n: usize) -> T {
    // 12 S - 3 n (n + 1)² over n (n² - 1), with a single rounding at the end
    let n = n as i128;
    let num = 12 * s as i128 - 3 * n * (n + 1) * (n + 1);
    let den = n * (n * n - 1);
    T::from_i128(num).unwrap() / T::from_i128(den).unwrap()
}
