//! Measurements on hidden-shift states: the Helstrom measurement, weak
//! Fourier sampling, rank-one POVM refinement and the single-register
//! statistics of strong Fourier sampling.

use std::io::Write;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::{Group, GroupDescriptor};
use crate::linalg::{eigh, inverse_sqrt, is_psd, vec_norm, CMat, C64};
use crate::par;
use crate::rep::Irrep;
use crate::shift::{averaged_single_block, fixed_single_block, ShiftState, StateForm};

/// Tolerance for trace, Hermiticity and positivity of density matrices.
pub const DENSITY_TOLERANCE: f64 = 1e-10;
/// Eigenvalues of `ρ₁ − ρ₂` with modulus at most this are null.
pub const NULL_TOLERANCE: f64 = 1e-10;
/// Effects passed to [`refine_povm`] must sum to the identity within this.
pub const EFFECT_SUM_TOLERANCE: f64 = 1e-8;
/// Eigenvalues of an effect at or below this are dropped by [`refine_povm`].
pub const REFINE_CUTOFF: f64 = 1e-10;

/// One weighted rank-one outcome `a |ψ⟩⟨ψ|`.
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub weight: f64,
    /// Unit vector.
    pub vector: Vec<C64>,
    /// Index of the effect this outcome was refined from.
    pub source: usize,
}

/// A POVM of weighted rank-one effects.
#[derive(Clone, Debug, PartialEq)]
pub struct Povm {
    dim: usize,
    outcomes: Vec<Outcome>,
}

impl Povm {
    /// Checks unit vectors, positive weights and completeness.
    pub fn new(dim: usize, outcomes: Vec<Outcome>) -> Result<Self> {
        if outcomes.iter().any(|o| o.vector.len() != dim) {
            return Err(Error::domain("outcome vector has the wrong dimension"));
        }
        if outcomes.iter().any(|o| o.weight.is_nan() || o.weight <= 0.0) {
            return Err(Error::domain("outcome weights must be positive"));
        }
        if outcomes.iter().any(|o| (vec_norm(&o.vector) - 1.0).abs() > 1e-12) {
            return Err(Error::domain("outcome vectors must have unit norm"));
        }
        let povm = Povm { dim, outcomes };
        let residual = povm.completeness_residual();
        if residual > 1e-10 {
            return Err(Error::domain(format!("effects sum to the identity only within {residual:.3e}")));
        }
        Ok(povm)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    pub fn outcomes(&self) -> &[Outcome] {
        &self.outcomes
    }

    pub fn weights(&self) -> Vec<f64> {
        self.outcomes.iter().map(|o| o.weight).collect()
    }

    /// `max |Σ_j a_j |ψ_j⟩⟨ψ_j| − I|`.
    pub fn completeness_residual(&self) -> f64 {
        let mut acc = CMat::zeros(self.dim, self.dim);
        for o in &self.outcomes {
            acc += &CMat::outer(&o.vector, o.weight);
        }
        acc.max_abs_diff(&CMat::identity(self.dim))
    }

    /// `p(j) = c·a_j⟨ψ_j|M|ψ_j⟩` for every outcome.
    fn distribution(&self, m: &CMat, c: f64) -> Vec<f64> {
        self.outcomes
            .iter()
            .map(|o| c * o.weight * m.quadratic_form(&o.vector).re)
            .collect()
    }
}

/// The measurement in the standard basis.
pub fn basis_povm(dim: usize) -> Povm {
    let outcomes = (0..dim)
        .map(|i| {
            let mut v = vec![C64::new(0.0, 0.0); dim];
            v[i] = C64::new(1.0, 0.0);
            Outcome {
                weight: 1.0,
                vector: v,
                source: i,
            }
        })
        .collect();
    Povm { dim, outcomes }
}

/// Performs `a` with probability `t` and `b` otherwise, as one POVM.
pub fn mixture_povm(a: &Povm, b: &Povm, t: f64) -> Result<Povm> {
    if a.dim != b.dim {
        return Err(Error::domain("POVMs act on different dimensions"));
    }
    if !(t > 0.0 && t < 1.0) {
        return Err(Error::domain("mixture weight must lie in (0, 1)"));
    }
    fn scaled(p: &Povm, w: f64, offset: usize) -> impl Iterator<Item = Outcome> + '_ {
        p.outcomes.iter().map(move |o| Outcome {
            weight: o.weight * w,
            vector: o.vector.clone(),
            source: o.source + offset,
        })
    }
    let outcomes = scaled(a, t, 0).chain(scaled(b, 1.0 - t, a.len())).collect();
    Povm::new(a.dim, outcomes)
}

/// Splits every effect into weighted rank-one outcomes along its eigenvectors,
/// dropping eigenvalues at or below [`REFINE_CUTOFF`].
pub fn refine_povm(effects: &[CMat]) -> Result<Povm> {
    let dim = effects.first().map(|e| e.rows()).ok_or_else(|| Error::domain("no effects given"))?;
    let mut total = CMat::zeros(dim, dim);
    for e in effects {
        if e.rows() != dim || !e.is_square() {
            return Err(Error::domain("effects differ in shape"));
        }
        if !e.is_hermitian(DENSITY_TOLERANCE) || !is_psd(e, DENSITY_TOLERANCE) {
            return Err(Error::domain("effect is not positive semidefinite"));
        }
        total += e;
    }
    if total.max_abs_diff(&CMat::identity(dim)) > EFFECT_SUM_TOLERANCE {
        return Err(Error::domain("effects do not sum to the identity"));
    }
    let mut outcomes = Vec::new();
    for (source, e) in effects.iter().enumerate() {
        let dec = eigh(e);
        for (j, &w) in dec.values.iter().enumerate() {
            if w > REFINE_CUTOFF {
                outcomes.push(Outcome {
                    weight: w,
                    vector: dec.vectors.column(j),
                    source,
                });
            }
        }
    }
    Ok(Povm { dim, outcomes })
}

/// `W = (GG†)^{-1/2} G` for a complex Gaussian `G` of shape `dim × outcomes`;
/// column `w_j` becomes the outcome `|w_j|² |ŵ_j⟩⟨ŵ_j|`. The generator is
/// ChaCha8 seeded with `seed`, so the result is reproducible bit for bit.
pub fn random_povm(dim: usize, outcomes: usize, seed: u64) -> Result<Povm> {
    if dim == 0 || outcomes < dim {
        return Err(Error::domain("need at least as many outcomes as dimensions"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    let g = CMat::from_fn(dim, outcomes, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re * scale, im * scale)
    });
    let w = inverse_sqrt(&g.matmul(&g.adjoint())).matmul(&g);
    let outcomes = (0..outcomes)
        .map(|j| {
            let col = w.column(j);
            let norm = vec_norm(&col);
            Outcome {
                weight: norm * norm,
                vector: col.into_iter().map(|z| z / norm).collect(),
                source: j,
            }
        })
        .collect();
    Ok(Povm { dim, outcomes })
}

/// Hard cases for the variance bound: the standard basis, a random
/// orthonormal basis, that basis mixed with the standard one so that half the
/// outcomes carry weight `10⁻⁶`, and a two-effect POVM `{E, I − E}` with `E`
/// built from half of a random POVM, split by [`refine_povm`].
pub fn adversarial_povms(dim: usize, seed: u64) -> Result<Vec<(String, Povm)>> {
    let basis = basis_povm(dim);
    // with as many outcomes as dimensions the polar factor is unitary
    let rotated = random_povm(dim, dim, seed)?;
    let skewed = mixture_povm(&rotated, &basis, 1.0 - 1e-6)?;
    let spread = random_povm(dim, 2 * dim, seed.wrapping_add(1))?;
    let mut effect = CMat::zeros(dim, dim);
    for o in &spread.outcomes[..dim] {
        effect += &CMat::outer(&o.vector, o.weight);
    }
    let rest = &CMat::identity(dim) - &effect;
    let refined = refine_povm(&[effect, rest])?;
    Ok(vec![
        ("basis".into(), basis),
        ("rotated-basis".into(), rotated),
        ("near-singular".into(), skewed),
        ("refined".into(), refined),
    ])
}

/// The two-outcome measurement `{E₁, E₂}` that best tells `ρ₁` from `ρ₂`
/// given equal priors.
#[derive(Clone, Debug)]
pub struct HelstromResult {
    /// Projector onto the positive eigenspace of `ρ₁ − ρ₂`.
    pub e1: CMat,
    /// Projector onto the rest; null eigenvectors land here.
    pub e2: CMat,
    /// `½(tr E₁ρ₁ + tr E₂ρ₂)`.
    pub success: f64,
    /// `‖ρ₁ − ρ₂‖_tr`.
    pub trace_norm: f64,
}

fn check_density(m: &CMat, name: &str) -> Result<()> {
    if !m.is_square() {
        return Err(Error::domain(format!("{name} is not square")));
    }
    if !m.is_hermitian(DENSITY_TOLERANCE) {
        return Err(Error::domain(format!("{name} is not Hermitian")));
    }
    if (m.trace().re - 1.0).abs() > DENSITY_TOLERANCE {
        return Err(Error::domain(format!("{name} does not have unit trace")));
    }
    if !is_psd(m, DENSITY_TOLERANCE) {
        return Err(Error::domain(format!("{name} is not positive semidefinite")));
    }
    Ok(())
}

pub fn helstrom(rho1: &CMat, rho2: &CMat) -> Result<HelstromResult> {
    if rho1.rows() != rho2.rows() || rho1.cols() != rho2.cols() {
        return Err(Error::domain("density matrices differ in dimension"));
    }
    check_density(rho1, "first state")?;
    check_density(rho2, "second state")?;
    let n = rho1.rows();
    let dec = eigh(&(rho1 - rho2));
    let mut e1 = CMat::zeros(n, n);
    for (j, &v) in dec.values.iter().enumerate() {
        if v > NULL_TOLERANCE {
            e1 += &CMat::outer(&dec.vectors.column(j), 1.0);
        }
    }
    let e2 = &CMat::identity(n) - &e1;
    let success = 0.5 * (e1.matmul(rho1).trace().re + e2.matmul(rho2).trace().re);
    Ok(HelstromResult {
        e1,
        e2,
        success,
        trace_norm: dec.values.iter().map(|v| v.abs()).sum(),
    })
}

/// Probability of each irrep label under weak Fourier sampling.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LabelDistribution {
    pub labels: Vec<String>,
    pub probabilities: Vec<f64>,
}

/// Label distribution of a one-copy state in block form:
/// `Pr(ρ) = d_ρ · tr B^ρ / (2|G|)`.
pub fn weak_sample_distribution(state: &ShiftState, irreps: &[Irrep]) -> Result<LabelDistribution> {
    if state.k != 1 {
        return Err(Error::domain("weak sampling is defined here for one copy"));
    }
    let StateForm::Blocks(blocks) = &state.form else {
        return Err(Error::domain("weak sampling needs the block form"));
    };
    if blocks.len() != irreps.len() {
        return Err(Error::domain("blocks do not match the irreps"));
    }
    let scale = state.block_scale();
    Ok(LabelDistribution {
        labels: irreps.iter().map(|r| r.label.to_string()).collect(),
        probabilities: blocks
            .iter()
            .map(|b| b.multiplicity as f64 * b.matrix.trace().re * scale)
            .collect(),
    })
}

/// `‖p − q‖₁` and the total variation distance `½‖p − q‖₁`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Distance {
    pub l1: f64,
    pub tv: f64,
}

pub fn tv_distance(p: &[f64], q: &[f64]) -> Result<Distance> {
    if p.len() != q.len() {
        return Err(Error::domain("distributions have different outcome lists"));
    }
    let l1: f64 = p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum();
    Ok(Distance { l1, tv: 0.5 * l1 })
}

/// Outcome distributions of a POVM on the irrep register `ρ`.
#[derive(Clone, Debug)]
pub struct RegisterDistributions {
    /// `P_{1,s}` for every shift `s`.
    pub per_shift: Vec<Vec<f64>>,
    /// Average of `P_{1,s}` over `s`.
    pub p1: Vec<f64>,
    /// `P₁` evaluated on the averaged block directly.
    pub p1_direct: Vec<f64>,
    /// `p₂(j) = a_j / 2d`.
    pub p2: Vec<f64>,
}

/// `p₁(j|s) = (a_j/2d) ⟨ψ_j|B^ρ(s)|ψ_j⟩` and friends.
pub fn single_register_distributions(
    group: &Group,
    irreps: &[Irrep],
    irrep: usize,
    povm: &Povm,
) -> Result<RegisterDistributions> {
    let rho = irreps.get(irrep).ok_or_else(|| Error::domain("irrep index out of range"))?;
    let d2 = 2 * rho.dim;
    if povm.dim() != d2 {
        return Err(Error::domain(format!("POVM acts on dimension {}, block has {d2}", povm.dim())));
    }
    let c = 1.0 / d2 as f64;
    let per_shift: Vec<Vec<f64>> = group
        .elements()
        .map(|s| povm.distribution(&fixed_single_block(group, rho, s), c))
        .collect();
    let mut p1 = vec![0.0; povm.len()];
    for row in &per_shift {
        for (acc, v) in p1.iter_mut().zip(row) {
            *acc += v;
        }
    }
    p1.iter_mut().for_each(|v| *v /= group.order() as f64);
    let p1_direct = povm.distribution(&averaged_single_block(group, irreps, irrep)?, c);
    let p2 = povm.weights().into_iter().map(|a| a * c).collect();
    Ok(RegisterDistributions {
        per_shift,
        p1,
        p1_direct,
        p2,
    })
}

/// Per-outcome variance of `p₁(j|s)` under uniform `s`, two-pass.
pub fn outcome_variances(dists: &RegisterDistributions) -> Vec<f64> {
    let n = dists.per_shift.len() as f64;
    (0..dists.p1.len())
        .map(|j| {
            dists
                .per_shift
                .iter()
                .map(|row| (row[j] - dists.p1[j]).powi(2))
                .sum::<f64>()
                / n
        })
        .collect()
}

/// `Σ_j σ_j² / a_j`, summed exactly over every shift.
pub fn weighted_variance_sum(group: &Group, irreps: &[Irrep], irrep: usize, povm: &Povm) -> Result<f64> {
    let rho = irreps.get(irrep).ok_or_else(|| Error::domain("irrep index out of range"))?;
    if rho.is_trivial() {
        return Err(Error::domain("the weighted variance bound needs a nontrivial irrep"));
    }
    let dists = single_register_distributions(group, irreps, irrep, povm)?;
    Ok(outcome_variances(&dists)
        .iter()
        .zip(povm.outcomes())
        .map(|(v, o)| v / o.weight)
        .sum())
}

/// Thresholds reported in the sweep summary.
pub const SWEEP_THRESHOLDS: [f64; 4] = [0.01, 0.05, 0.1, 0.25];
/// Quantile levels reported in the sweep summary.
pub const SWEEP_QUANTILES: [f64; 7] = [0.0, 0.1, 0.25, 0.5, 0.75, 0.9, 1.0];

/// One trial of the indistinguishability sweep.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub trial: usize,
    pub irrep_label: String,
    pub d_rho: usize,
    pub shift_index: usize,
    /// Total variation between `P_{1,s}` and `P₂`.
    pub tv: f64,
    pub l1: f64,
    pub povm_outcomes: usize,
    pub seed: u64,
    #[serde(skip)]
    pub averaged_tv: f64,
    #[serde(skip)]
    pub trivial: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Quantile {
    pub level: f64,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Exceedance {
    pub threshold: f64,
    pub fraction: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DimensionSummary {
    pub d_rho: usize,
    pub count: usize,
    pub median_tv: f64,
    pub max_tv: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepSummary {
    pub group: String,
    pub trials: usize,
    pub seed: u64,
    pub tv_quantiles: Vec<Quantile>,
    pub tv_exceeding: Vec<Exceedance>,
    pub by_dimension: Vec<DimensionSummary>,
    pub trivial_samples: usize,
    /// Largest `TV(P₁, P₂)` over trials with a nontrivial irrep.
    pub max_averaged_tv_nontrivial: f64,
    /// Largest `TV(P₁, P₂)` over trials with the trivial irrep.
    pub max_averaged_tv_trivial: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
    pub summary: SweepSummary,
}

/// Nearest-rank quantile of sorted data.
fn quantile(sorted: &[f64], level: f64) -> f64 {
    if sorted.is_empty() {
        return 0.0;
    }
    let rank = (level * sorted.len() as f64).ceil() as usize;
    sorted[rank.clamp(1, sorted.len()) - 1]
}

fn sweep_trial(group: &Group, irreps: &[Irrep], trial: usize, seed: u64) -> Result<SweepRow> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Plancherel: an integer uniform on 0..|G| lands in irrep ρ with
    // probability d_ρ²/|G|
    let u = rng.random_range(0..group.order());
    let mut acc = 0;
    let irrep = irreps
        .iter()
        .position(|r| {
            acc += r.dim * r.dim;
            u < acc
        })
        .ok_or_else(|| Error::consistency("irrep dimensions do not sum to the group order"))?;
    let shift = rng.random_range(0..group.order());
    let rho = &irreps[irrep];
    let dim = 2 * rho.dim;
    let outcomes = rng.random_range(dim..=2 * dim);
    let povm = random_povm(dim, outcomes, rng.next_u64())?;
    let dists = single_register_distributions(group, irreps, irrep, &povm)?;
    let shifted = tv_distance(&dists.per_shift[shift], &dists.p2)?;
    let averaged = tv_distance(&dists.p1, &dists.p2)?;
    Ok(SweepRow {
        trial,
        irrep_label: rho.label.to_string(),
        d_rho: rho.dim,
        shift_index: shift,
        tv: shifted.tv,
        l1: shifted.l1,
        povm_outcomes: outcomes,
        seed,
        averaged_tv: averaged.tv,
        trivial: rho.is_trivial(),
    })
}

/// Finite-size statistics of `TV(P_{1,s}, P₂)` for a Plancherel-random irrep,
/// a uniform shift and a random POVM per trial. Trial `t` is driven entirely
/// by seed `seed + t`.
pub fn indistinguishability_sweep(group: &Group, irreps: &[Irrep], trials: usize, seed: u64) -> Result<SweepReport> {
    match group.descriptor() {
        GroupDescriptor::Symmetric(n) if *n <= 5 => {}
        _ => return Err(Error::domain("the sweep runs on S_n with n <= 5")),
    }
    let rows: Vec<SweepRow> = par::map_indexed(trials, |t| sweep_trial(group, irreps, t, seed.wrapping_add(t as u64)))
        .into_iter()
        .collect::<Result<_>>()?;

    let mut tvs: Vec<f64> = rows.iter().map(|r| r.tv).collect();
    tvs.sort_by(f64::total_cmp);
    let mut dims: Vec<usize> = rows.iter().map(|r| r.d_rho).collect();
    dims.sort_unstable();
    dims.dedup();
    let by_dimension = dims
        .into_iter()
        .map(|d| {
            let mut v: Vec<f64> = rows.iter().filter(|r| r.d_rho == d).map(|r| r.tv).collect();
            v.sort_by(f64::total_cmp);
            DimensionSummary {
                d_rho: d,
                count: v.len(),
                median_tv: quantile(&v, 0.5),
                max_tv: v.last().copied().unwrap_or(0.0),
            }
        })
        .collect();
    let max_over = |trivial: bool| {
        rows.iter()
            .filter(|r| r.trivial == trivial)
            .map(|r| r.averaged_tv)
            .fold(0.0, f64::max)
    };
    let summary = SweepSummary {
        group: group.descriptor().to_string(),
        trials,
        seed,
        tv_quantiles: SWEEP_QUANTILES
            .iter()
            .map(|&level| Quantile {
                level,
                value: quantile(&tvs, level),
            })
            .collect(),
        tv_exceeding: SWEEP_THRESHOLDS
            .iter()
            .map(|&threshold| Exceedance {
                threshold,
                fraction: if trials == 0 {
                    0.0
                } else {
                    tvs.iter().filter(|&&v| v > threshold).count() as f64 / trials as f64
                },
            })
            .collect(),
        by_dimension,
        trivial_samples: rows.iter().filter(|r| r.trivial).count(),
        max_averaged_tv_nontrivial: max_over(false),
        max_averaged_tv_trivial: max_over(true),
    };
    Ok(SweepReport { rows, summary })
}

/// Writes sweep rows as CSV with a header row.
pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r).map_err(|e| Error::Io(std::io::Error::other(e)))?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::abelian::{success_probability, Rational};
    use crate::rep::{irreps, plancherel};
    use crate::shift::{gamma1_averaged, gamma1_blocks, gamma2, Form};
    use num_traits::ToPrimitive;

    fn setup(name: &str) -> (Group, Vec<Irrep>) {
        let g = Group::parse(name).unwrap();
        let r = irreps(&g).unwrap();
        (g, r)
    }

    fn to_f64(r: Rational) -> f64 {
        r.numer().to_f64().unwrap() / r.denom().to_f64().unwrap()
    }

    #[test]
    fn helstrom_limits() {
        let rho = CMat::diag(&[0.5, 0.25, 0.25]);
        let same = helstrom(&rho, &rho).unwrap();
        assert!((same.success - 0.5).abs() < 1e-15);
        assert!(same.e1.max_abs() == 0.0);
        let a = CMat::diag(&[1.0, 0.0]);
        let b = CMat::diag(&[0.0, 1.0]);
        assert!((helstrom(&a, &b).unwrap().success - 1.0).abs() < 1e-15);
        assert!(helstrom(&a, &CMat::identity(3).scale(1.0 / 3.0)).is_err());
        assert!(helstrom(&CMat::diag(&[1.5, -0.5]), &b).is_err());
        assert!(helstrom(&CMat::diag(&[0.5, 0.2]), &b).is_err());
    }

    #[test]
    fn helstrom_trace_norm_identity() {
        let (g, r) = setup("S3");
        let r1 = gamma1_averaged(&g, &r, 1, Form::Dense).unwrap();
        let r2 = gamma2(&g, &r, 1, Form::Dense).unwrap();
        let h = helstrom(r1.dense().unwrap(), r2.dense().unwrap()).unwrap();
        assert!((h.success - (0.5 + 0.25 * h.trace_norm)).abs() < 1e-9);
        assert!(h.e1.matmul(&h.e1).max_abs_diff(&h.e1) < 1e-10);
    }

    #[test]
    fn helstrom_matches_abelian_rank_formula() {
        let (g, r) = setup("Z4");
        for k in 1..=2 {
            let r1 = gamma1_averaged(&g, &r, k, Form::Dense).unwrap();
            let r2 = gamma2(&g, &r, k, Form::Dense).unwrap();
            let h = helstrom(r1.dense().unwrap(), r2.dense().unwrap()).unwrap();
            let exact = success_probability(&g, k).unwrap().probability;
            assert!((h.success - to_f64(exact)).abs() < 1e-9, "k={k}");
        }
    }

    #[test]
    fn weak_sampling_is_plancherel() {
        let (g, r) = setup("S3");
        let st = gamma2(&g, &r, 1, Form::Blocks).unwrap();
        let dist = weak_sample_distribution(&st, &r).unwrap();
        let expect = [1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0];
        for (p, e) in dist.probabilities.iter().zip(expect) {
            assert!((p - e).abs() < 1e-15);
        }
        let (g4, r4) = setup("S4");
        let plan: Vec<f64> = plancherel(&g4, &r4).iter().map(|e| e.probability.to_f64().unwrap()).collect();
        let none = weak_sample_distribution(&gamma2(&g4, &r4, 1, Form::Blocks).unwrap(), &r4).unwrap();
        for s in g4.elements() {
            let st = gamma1_blocks(&g4, &r4, s, 1).unwrap();
            let d = weak_sample_distribution(&st, &r4).unwrap();
            assert!(tv_distance(&d.probabilities, &none.probabilities).unwrap().tv <= 1e-12);
            assert!(tv_distance(&d.probabilities, &plan).unwrap().tv <= 1e-12);
        }
        let (gz, rz) = setup("Z2xZ2");
        let d = weak_sample_distribution(&gamma1_blocks(&gz, &rz, 3, 1).unwrap(), &rz).unwrap();
        assert!(d.probabilities.iter().all(|p| (p - 0.25).abs() < 1e-15));
        assert!(weak_sample_distribution(&gamma2(&g, &r, 1, Form::Dense).unwrap(), &r).is_err());
    }

    #[test]
    fn refinement() {
        let p = refine_povm(&[CMat::identity(3)]).unwrap();
        assert_eq!(p.len(), 3);
        assert!(p.weights().iter().all(|&w| (w - 1.0).abs() < 1e-15));

        let proj = CMat::diag(&[1.0, 1.0, 0.0, 0.0]);
        let rest = &CMat::identity(4) - &proj;
        let p = refine_povm(&[proj, rest]).unwrap();
        assert_eq!(p.outcomes().iter().map(|o| o.source).collect::<Vec<_>>(), vec![0, 0, 1, 1]);

        // random two-effect POVM {A, I − A}
        let base = random_povm(4, 6, 3).unwrap();
        let mut a = CMat::zeros(4, 4);
        for o in &base.outcomes()[..3] {
            a += &CMat::outer(&o.vector, o.weight);
        }
        let p = refine_povm(&[a.clone(), &CMat::identity(4) - &a]).unwrap();
        assert!(p.completeness_residual() < 1e-10);
        assert!(Povm::new(4, p.outcomes().to_vec()).is_ok());

        assert!(refine_povm(&[CMat::diag(&[2.0, -1.0])]).is_err());
        assert!(refine_povm(&[CMat::diag(&[0.5, 0.5])]).is_err());
    }

    #[test]
    fn random_povms() {
        let a = random_povm(12, 30, 99).unwrap();
        assert!(a.completeness_residual() < 1e-10);
        let b = random_povm(12, 30, 99).unwrap();
        for (x, y) in a.outcomes().iter().zip(b.outcomes()) {
            assert_eq!(x.weight.to_bits(), y.weight.to_bits());
            assert!(x.vector.iter().zip(&y.vector).all(|(p, q)| p.re.to_bits() == q.re.to_bits()));
        }
        let square = random_povm(5, 5, 1).unwrap();
        assert!(square.weights().iter().all(|w| (w - 1.0).abs() < 1e-10));
        assert!(random_povm(5, 4, 1).is_err());
    }

    #[test]
    fn register_distributions() {
        let (g, r) = setup("S3");
        for irrep in 0..r.len() {
            let povm = random_povm(2 * r[irrep].dim, 2 * r[irrep].dim + 3, irrep as u64).unwrap();
            let d = single_register_distributions(&g, &r, irrep, &povm).unwrap();
            for row in d.per_shift.iter().chain([&d.p1, &d.p2]) {
                assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-10);
                assert!(row.iter().all(|&p| p >= -1e-15));
            }
            assert!(tv_distance(&d.p1, &d.p1_direct).unwrap().l1 < 1e-12);
            let tv = tv_distance(&d.p1, &d.p2).unwrap().tv;
            if r[irrep].is_trivial() {
                assert!(tv <= 0.5);
            } else {
                assert!(tv <= 1e-12);
            }
        }
        // basis measurement at s = e on the trivial block: B(e) = [[1,1],[1,1]]
        let d = single_register_distributions(&g, &r, 0, &basis_povm(2)).unwrap();
        assert_eq!(d.per_shift[0], vec![0.5, 0.5]);
        assert!(single_register_distributions(&g, &r, 1, &basis_povm(2)).is_err());
    }

    #[test]
    fn distances() {
        let p = [0.2, 0.3, 0.5];
        assert_eq!(tv_distance(&p, &p).unwrap().tv, 0.0);
        let d = tv_distance(&[1.0, 0.0], &[0.0, 1.0]).unwrap();
        assert_eq!((d.l1, d.tv), (2.0, 1.0));
        assert!(tv_distance(&[1.0], &[0.5, 0.5]).is_err());
    }

    #[test]
    fn variance_sums() {
        let (g, r) = setup("S3");
        assert!(weighted_variance_sum(&g, &r, 0, &basis_povm(2)).is_err());
        // sign irrep, d = 1
        for seed in 0..10 {
            let povm = random_povm(2, 4, seed).unwrap();
            assert!(weighted_variance_sum(&g, &r, 2, &povm).unwrap() <= 1.0 + 1e-9);
        }
        // two-pass variance equals E[p²] − E[p]²
        let povm = refine_povm(&[CMat::identity(4)]).unwrap();
        let d = single_register_distributions(&g, &r, 1, &povm).unwrap();
        let two_pass = outcome_variances(&d);
        for j in 0..povm.len() {
            let m2 = d.per_shift.iter().map(|row| row[j] * row[j]).sum::<f64>() / 6.0;
            assert!((two_pass[j] - (m2 - d.p1[j] * d.p1[j])).abs() < 1e-14);
        }
        let (g4, r4) = setup("S4");
        let std = r4.iter().position(|x| x.dim == 3).unwrap();
        for seed in 0..10 {
            let povm = random_povm(6, 9, seed).unwrap();
            assert!(weighted_variance_sum(&g4, &r4, std, &povm).unwrap() <= 1.0 / 9.0 + 1e-9);
        }
    }

    #[test]
    fn sweep_is_deterministic_and_consistent() {
        let (g, r) = setup("S4");
        let a = indistinguishability_sweep(&g, &r, 40, 7).unwrap();
        let b = indistinguishability_sweep(&g, &r, 40, 7).unwrap();
        assert_eq!(a, b);
        assert!(a.summary.max_averaged_tv_nontrivial <= 1e-12);
        assert!(a.summary.max_averaged_tv_trivial <= 0.5);
        for (t, row) in a.rows.iter().enumerate() {
            assert_eq!(row.seed, 7 + t as u64);
            assert!(row.povm_outcomes >= 2 * row.d_rho);
        }
        let mut buf = Vec::new();
        write_sweep_csv(&a.rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("trial,irrep_label,d_rho,shift_index,tv,l1,povm_outcomes,seed\n"));
        assert!(indistinguishability_sweep(&Group::symmetric(6).unwrap(), &[], 1, 0).is_err());
    }

    #[test]
    fn quantiles() {
        let v = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile(&v, 0.0), 1.0);
        assert_eq!(quantile(&v, 0.5), 2.0);
        assert_eq!(quantile(&v, 1.0), 4.0);
    }
}
