//! Subset-sum view of abelian hidden-shift states.
//!
//! After a Fourier transform the `k`-copy averaged state of an abelian group
//! is diagonal, with one eigenvalue per pair `(x, w)` with `x ∈ Gᵏ`, `w ∈ G`,
//! proportional to `η^x_w = |{b ∈ {0,1}ᵏ : b·x = w}|`. Everything here is
//! exact integer or rational arithmetic.

use std::io::Write;

use num_rational::Ratio;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::Group;
use crate::par;

/// Largest `|G|ᵏ·2ᵏ` for which the table is enumerated.
pub const TABLE_WORK_LIMIT: u128 = 100_000_000;

pub type Rational = Ratio<u128>;

fn require_abelian(group: &Group) -> Result<()> {
    if group.is_abelian() {
        Ok(())
    } else {
        Err(Error::domain(format!("{} is not abelian", group.descriptor())))
    }
}

fn table_work(group: &Group, k: usize) -> Option<u128> {
    (group.order() as u128).checked_pow(k as u32)?.checked_mul(1u128.checked_shl(k as u32)?)
}

/// `η^x_w` for every `x ∈ Gᵏ` (row-major, `x₁` most significant) and `w ∈ G`.
#[derive(Clone, Debug)]
pub struct SubsetSumTable {
    group: Group,
    k: usize,
    counts: Vec<u32>,
}

impl SubsetSumTable {
    /// Enumerates every `b ∈ {0,1}ᵏ` for every `x`.
    pub fn new(group: &Group, k: usize) -> Result<Self> {
        require_abelian(group)?;
        if k == 0 {
            return Err(Error::domain("need at least one copy"));
        }
        match table_work(group, k) {
            Some(w) if w <= TABLE_WORK_LIMIT => {}
            _ => {
                return Err(Error::capacity(format!(
                    "subset-sum table for {} with k={k} exceeds {TABLE_WORK_LIMIT} subset evaluations",
                    group.descriptor()
                )))
            }
        }
        let n = group.order();
        let rows = n.pow(k as u32);
        const CHUNK: usize = 4096;
        let chunks = par::map_indexed(rows.div_ceil(CHUNK), |c| {
            let mut out = Vec::new();
            let mut x = vec![0usize; k];
            for row in c * CHUNK..((c + 1) * CHUNK).min(rows) {
                decode_row(row, n, &mut x);
                let mut counts = vec![0u32; n];
                for b in 0..1usize << k {
                    let w = (0..k)
                        .filter(|&i| (b >> (k - 1 - i)) & 1 == 1)
                        .fold(group.identity(), |acc, i| group.mul(acc, x[i]));
                    counts[w] += 1;
                }
                out.extend(counts);
            }
            out
        });
        Ok(SubsetSumTable {
            group: group.clone(),
            k,
            counts: chunks.concat(),
        })
    }

    pub fn group(&self) -> &Group {
        &self.group
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Number of `x` rows, `|G|ᵏ`.
    pub fn rows(&self) -> usize {
        self.counts.len() / self.group.order()
    }

    /// `η^x_w` for row index `x`.
    pub fn get(&self, x: usize, w: usize) -> u32 {
        self.counts[x * self.group.order() + w]
    }

    pub fn row(&self, x: usize) -> &[u32] {
        let n = self.group.order();
        &self.counts[x * n..(x + 1) * n]
    }

    /// Row index of a tuple of element indices.
    pub fn row_index(&self, x: &[usize]) -> Result<usize> {
        let n = self.group.order();
        if x.len() != self.k || x.iter().any(|&g| g >= n) {
            return Err(Error::domain("tuple does not lie in G^k"));
        }
        Ok(x.iter().fold(0, |acc, &g| acc * n + g))
    }

    /// Number of pairs `(x, w)` with `η^x_w > 0`.
    pub fn support_size(&self) -> u64 {
        self.counts.iter().filter(|&&c| c > 0).count() as u64
    }

    pub fn sum(&self) -> u128 {
        self.counts.iter().map(|&c| c as u128).sum()
    }

    pub fn sum_of_squares(&self) -> u128 {
        self.counts.iter().map(|&c| (c as u128) * (c as u128)).sum()
    }
}

fn decode_row(mut row: usize, n: usize, x: &mut [usize]) {
    for slot in x.iter_mut().rev() {
        *slot = row % n;
        row /= n;
    }
}

/// Rank of the averaged `k`-copy state of an abelian group, counted from the table.
pub fn rank_tilde_gamma1(group: &Group, k: usize) -> Result<u64> {
    Ok(SubsetSumTable::new(group, k)?.support_size())
}

/// How the brute-force side of a [`MomentReport`] was counted.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MomentMethod {
    /// Direct sums over the enumerated table.
    Table,
    /// Exact transfer-matrix count over partial sums, for tables too large to enumerate.
    PartialSums,
}

/// First and second moments of `η` under uniform `(x, w)`.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentReport {
    pub mu: Rational,
    pub second: Rational,
    pub variance: Rational,
    pub counted_mu: Rational,
    pub counted_second: Rational,
    pub method: MomentMethod,
}

impl MomentReport {
    pub fn matches(&self) -> bool {
        self.mu == self.counted_mu && self.second == self.counted_second
    }
}

/// `2ᵏ/|G|`.
pub fn mu_formula(order: u128, k: usize) -> Rational {
    Ratio::new(1u128 << k, order)
}

/// `2ᵏ/|G| + 2ᵏ(2ᵏ−1)/|G|²`.
pub fn second_moment_formula(order: u128, k: usize) -> Rational {
    let p = 1u128 << k;
    mu_formula(order, k) + Ratio::new(p * (p - 1), order * order)
}

/// `Σ_{x,w} η` and `Σ_{x,w} η²` by dynamic programming over coordinate
/// prefixes: the state after `i` coordinates is the pair of partial sums
/// `(b·x, c·x)` restricted to those coordinates, and the final count of
/// states with equal sums is the number of triples `(x, b, c)` with
/// `b·x = c·x`, which is `Σ_{x,w} η²`.
pub fn partial_sum_counts(group: &Group, k: usize) -> Result<(u128, u128)> {
    require_abelian(group)?;
    let n = group.order();
    let mut single = vec![0u128; n];
    single[group.identity()] = 1;
    let mut pairs = vec![0u128; n * n];
    pairs[group.identity() * n + group.identity()] = 1;
    for _ in 0..k {
        let mut next_single = vec![0u128; n];
        for (p, &cnt) in single.iter().enumerate() {
            if cnt == 0 {
                continue;
            }
            for x in 0..n {
                next_single[p] += cnt;
                next_single[group.mul(p, x)] += cnt;
            }
        }
        single = next_single;

        let mut next_pairs = vec![0u128; n * n];
        for p in 0..n {
            for q in 0..n {
                let cnt = pairs[p * n + q];
                if cnt == 0 {
                    continue;
                }
                for x in 0..n {
                    let (px, qx) = (group.mul(p, x), group.mul(q, x));
                    next_pairs[p * n + q] += cnt;
                    next_pairs[px * n + q] += cnt;
                    next_pairs[p * n + qx] += cnt;
                    next_pairs[px * n + qx] += cnt;
                }
            }
        }
        pairs = next_pairs;
    }
    let sum = single.iter().sum();
    let squares = (0..n).map(|p| pairs[p * n + p]).sum();
    Ok((sum, squares))
}

/// Closed-form moments beside exact counts. The table is used when it fits
/// under [`TABLE_WORK_LIMIT`], the partial-sum count otherwise.
pub fn moments(group: &Group, k: usize) -> Result<MomentReport> {
    require_abelian(group)?;
    if k == 0 {
        return Err(Error::domain("need at least one copy"));
    }
    let order = group.order() as u128;
    let pairs = order
        .checked_pow(k as u32 + 1)
        .ok_or_else(|| Error::capacity("moment denominator overflows"))?;
    let feasible = table_work(group, k).is_some_and(|w| w <= TABLE_WORK_LIMIT);
    let (sum, squares, method) = if feasible {
        let table = SubsetSumTable::new(group, k)?;
        (table.sum(), table.sum_of_squares(), MomentMethod::Table)
    } else {
        let (s, q) = partial_sum_counts(group, k)?;
        (s, q, MomentMethod::PartialSums)
    };
    let mu = mu_formula(order, k);
    let second = second_moment_formula(order, k);
    Ok(MomentReport {
        variance: second - mu * mu,
        mu,
        second,
        counted_mu: Ratio::new(sum, pairs),
        counted_second: Ratio::new(squares, pairs),
        method,
    })
}

/// `1 − rank/(2(2|G|)ᵏ)`.
pub fn success_from_rank(order: u128, k: usize, rank: u128) -> Rational {
    let dim = (2 * order).pow(k as u32);
    Ratio::from_integer(1) - Ratio::new(rank, 2 * dim)
}

/// `½(1 + |G|/2ᵏ)`.
pub fn success_bound(order: u128, k: usize) -> Rational {
    (Ratio::from_integer(1) + Ratio::new(order, 1u128 << k)) / 2
}

/// `(2|G|)ᵏ/(μ + 1 − 1/|G|)`, the rank lower bound that follows from
/// `Pr(η = 0) ≤ σ²/(μ² + σ²)`.
pub fn rank_lower_bound(order: u128, k: usize) -> Rational {
    let dim = (2 * order).pow(k as u32);
    let denom = mu_formula(order, k) + Ratio::from_integer(1) - Ratio::new(1, order);
    Ratio::from_integer(dim) / denom
}

/// `1 − 1/(2(μ + 1 − 1/|G|))`, the success bound implied by
/// [`rank_lower_bound`].
pub fn second_moment_success_bound(order: u128, k: usize) -> Rational {
    let denom = mu_formula(order, k) + Ratio::from_integer(1) - Ratio::new(1, order);
    Ratio::from_integer(1) - Ratio::from_integer(1) / (denom * 2)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SuccessReport {
    pub rank: u64,
    pub probability: Rational,
    /// `½(1 + |G|/2ᵏ)`.
    pub bound: Rational,
    /// `1 − 1/(2(μ + 1 − 1/|G|))`.
    pub moment_bound: Rational,
}

impl SuccessReport {
    /// Whether `probability ≤ ½(1 + |G|/2ᵏ)`. This fails for several small
    /// groups once `2ᵏ > |G|`; see [`SuccessReport::within_moment_bound`].
    pub fn within_bound(&self) -> bool {
        self.probability <= self.bound
    }

    pub fn within_moment_bound(&self) -> bool {
        self.probability <= self.moment_bound
    }
}

/// Optimal success probability for telling the averaged state from the
/// maximally mixed one.
pub fn success_probability(group: &Group, k: usize) -> Result<SuccessReport> {
    let rank = rank_tilde_gamma1(group, k)?;
    let order = group.order() as u128;
    Ok(SuccessReport {
        rank,
        probability: success_from_rank(order, k, rank as u128),
        bound: success_bound(order, k),
        moment_bound: second_moment_success_bound(order, k),
    })
}

/// One line of the abelian summary export.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AbelianRow {
    pub group: String,
    pub k: usize,
    pub rank: u64,
    pub mu_num: u128,
    pub mu_den: u128,
    pub m2_num: u128,
    pub m2_den: u128,
    pub success_num: u128,
    pub success_den: u128,
}

pub fn abelian_row(group: &Group, k: usize) -> Result<AbelianRow> {
    let m = moments(group, k)?;
    let s = success_probability(group, k)?;
    Ok(AbelianRow {
        group: group.descriptor().to_string(),
        k,
        rank: s.rank,
        mu_num: *m.mu.numer(),
        mu_den: *m.mu.denom(),
        m2_num: *m.second.numer(),
        m2_den: *m.second.denom(),
        success_num: *s.probability.numer(),
        success_den: *s.probability.denom(),
    })
}

pub fn write_abelian_csv<W: Write>(rows: &[AbelianRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r).map_err(|e| Error::Io(std::io::Error::other(e)))?;
    }
    w.flush()?;
    Ok(())
}
