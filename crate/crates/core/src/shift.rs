//! Hidden-shift density operators, densely and in Fourier block form.
//!
//! One copy of the shifted state is `γ₁(s) = (1/|G|) Σ_g |φ_{s,g}⟩⟨φ_{s,g}|`
//! with `|φ_{s,g}⟩ = (|0,g⟩ + |1,gs⟩)/√2`; `k` copies are `γ₁(s)^{⊗k}`, the
//! averaged state is the mean over `s`, and the unshifted state is maximally
//! mixed.
//!
//! Dense basis for `k` copies: `(x₁, g₁, x₂, g₂, …)` with `x₁` most
//! significant, one copy indexed `x·|G| + g`.
//!
//! After the Fourier transform on every group register the states split into
//! blocks labelled by irrep tuples `(ρ₁, …, ρ_k)`, each repeated `∏ d_{ρ_j}`
//! times and scaled by `1/(2|G|)^k`. Inside a block the basis is
//! `(x₁ … x_k, j₁ … j_k)`: all the bits first (`x₁` most significant), then the
//! irrep indices as a Kronecker index. Entry `((x, a), (y, b))` of the block is
//! `A_{y−x}[a, b]` where `A_z = ⊗_j ρ_j(s^{z_j})` (fixed shift) or its average
//! over `s`.

use std::fmt;

use crate::error::{Error, Result};
use crate::group::{Group, SubgroupEmbedding};
use crate::linalg::{eigvalsh, CMat, C64, ZERO};
use crate::par;
use crate::rep::{average_rep, tensor_rep, trivial_multiplicity, FourierTransform, Irrep};

/// Dense states are refused above this dimension.
pub const DENSE_DIM_LIMIT: usize = 10_000;
/// Individual blocks are refused above this dimension.
pub const BLOCK_DIM_LIMIT: usize = 4096;
/// Eigenvalues above this fraction of the largest one count toward the rank.
pub const RANK_THRESHOLD: f64 = 1e-8;
/// Eigenvalues closer than this are reported as one cluster.
pub const CLUSTER_TOLERANCE: f64 = 1e-8;
/// Inputs to [`spectrum`] may deviate from Hermiticity by at most this much.
pub const HERMITIAN_TOLERANCE: f64 = 1e-10;

/// Which of the hidden-shift states.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Variant {
    /// `γ₁(s)^{⊗k}` for a known shift.
    Fixed(usize),
    /// `γ₁^{(k)}`, the average over all shifts.
    Averaged,
    /// `γ₂^{(k)}`, the maximally mixed state.
    NoShift,
    /// Produced by simulating the oracle procedure; the case is not known.
    Oracle,
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Variant::Fixed(s) => write!(f, "fixed({s})"),
            Variant::Averaged => write!(f, "averaged"),
            Variant::NoShift => write!(f, "no-shift"),
            Variant::Oracle => write!(f, "oracle"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Form {
    Dense,
    Blocks,
}

/// One Fourier block `B^{ρ₁…ρ_k}`, unnormalized.
#[derive(Clone, Debug)]
pub struct Block {
    /// Irrep indices in canonical order.
    pub tuple: Vec<usize>,
    pub matrix: CMat,
    /// `∏ d_{ρ_j}`.
    pub multiplicity: usize,
}

#[derive(Clone, Debug)]
pub enum StateForm {
    Dense(CMat),
    /// All `|Ĝ|^k` blocks in canonical tuple order.
    Blocks(Vec<Block>),
}

#[derive(Clone, Debug)]
pub struct ShiftState {
    pub group: Group,
    pub k: usize,
    pub variant: Variant,
    pub form: StateForm,
}

/// Hermiticity, trace and positivity of a state.
#[derive(Clone, Copy, Debug)]
pub struct DensityDiagnostics {
    pub hermitian_residual: f64,
    pub trace: f64,
    pub min_eigenvalue: f64,
}

impl DensityDiagnostics {
    pub fn is_valid(&self) -> bool {
        self.hermitian_residual <= 1e-12 && (self.trace - 1.0).abs() <= 1e-10 && self.min_eigenvalue >= -1e-10
    }
}

impl ShiftState {
    /// `1/(2|G|)^k`, the scale applied to every block.
    pub fn block_scale(&self) -> f64 {
        (2.0 * self.group.order() as f64).powi(-(self.k as i32))
    }

    pub fn dense(&self) -> Option<&CMat> {
        match &self.form {
            StateForm::Dense(m) => Some(m),
            StateForm::Blocks(_) => None,
        }
    }

    pub fn blocks(&self) -> Option<&[Block]> {
        match &self.form {
            StateForm::Blocks(b) => Some(b),
            StateForm::Dense(_) => None,
        }
    }

    pub fn dimension(&self) -> usize {
        (2 * self.group.order()).pow(self.k as u32)
    }

    /// Spectrum of the normalized state, block multiplicities included.
    pub fn spectrum(&self) -> Result<SpectrumReport> {
        match &self.form {
            StateForm::Dense(m) => spectrum(m),
            StateForm::Blocks(blocks) => {
                let scale = self.block_scale();
                let mut weighted = Vec::new();
                for b in blocks {
                    if b.matrix.hermitian_residual() > HERMITIAN_TOLERANCE {
                        return Err(Error::domain("block is not Hermitian"));
                    }
                    weighted.extend(eigvalsh(&b.matrix).into_iter().map(|v| (v * scale, b.multiplicity)));
                }
                Ok(SpectrumReport::from_weighted(&weighted))
            }
        }
    }

    pub fn diagnostics(&self) -> Result<DensityDiagnostics> {
        let (hermitian_residual, trace) = match &self.form {
            StateForm::Dense(m) => (m.hermitian_residual(), m.trace().re),
            StateForm::Blocks(blocks) => {
                let scale = self.block_scale();
                let herm = blocks.iter().map(|b| b.matrix.hermitian_residual()).fold(0.0, f64::max);
                let tr = blocks.iter().map(|b| b.multiplicity as f64 * b.matrix.trace().re * scale).sum();
                (herm, tr)
            }
        };
        let report = self.spectrum()?;
        let min_eigenvalue = report.clusters.last().map_or(0.0, |c| c.value);
        Ok(DensityDiagnostics {
            hermitian_residual,
            trace,
            min_eigenvalue,
        })
    }
}

/// An eigenvalue and how many times it occurs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EigenCluster {
    pub value: f64,
    pub multiplicity: usize,
}

/// Clustered eigenvalues (descending), rank, and extreme nonzero eigenvalues.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumReport {
    pub clusters: Vec<EigenCluster>,
    pub rank: usize,
    pub max: f64,
    pub min_nonzero: Option<f64>,
}

impl SpectrumReport {
    /// Builds a report from `(eigenvalue, multiplicity)` pairs.
    pub fn from_weighted(values: &[(f64, usize)]) -> Self {
        let mut sorted: Vec<(f64, usize)> = values.iter().copied().filter(|&(_, m)| m > 0).collect();
        sorted.sort_by(|a, b| b.0.total_cmp(&a.0));
        let max = sorted.first().map_or(0.0, |v| v.0);
        let cutoff = RANK_THRESHOLD * max;

        let mut clusters: Vec<EigenCluster> = Vec::new();
        let mut lead = f64::NAN;
        let mut sum = 0.0;
        for &(v, m) in &sorted {
            match clusters.last_mut() {
                Some(c) if (lead - v).abs() <= CLUSTER_TOLERANCE => {
                    c.multiplicity += m;
                    sum += v * m as f64;
                    c.value = sum / c.multiplicity as f64;
                }
                _ => {
                    lead = v;
                    sum = v * m as f64;
                    clusters.push(EigenCluster { value: v, multiplicity: m });
                }
            }
        }
        let rank = sorted.iter().filter(|v| v.0 > cutoff).map(|v| v.1).sum();
        let min_nonzero = sorted.iter().rev().find(|v| v.0 > cutoff).map(|v| v.0);
        SpectrumReport {
            clusters,
            rank,
            max,
            min_nonzero,
        }
    }

    /// Eigenvalues expanded by multiplicity, descending.
    pub fn expanded(&self) -> Vec<f64> {
        self.clusters
            .iter()
            .flat_map(|c| std::iter::repeat_n(c.value, c.multiplicity))
            .collect()
    }

    pub fn multiplicity_of(&self, value: f64, tol: f64) -> usize {
        self.clusters
            .iter()
            .filter(|c| (c.value - value).abs() <= tol)
            .map(|c| c.multiplicity)
            .sum()
    }
}

/// Spectrum of a Hermitian matrix.
pub fn spectrum(m: &CMat) -> Result<SpectrumReport> {
    if !m.is_square() || m.hermitian_residual() > HERMITIAN_TOLERANCE {
        return Err(Error::domain("spectrum needs a Hermitian matrix"));
    }
    let values: Vec<(f64, usize)> = eigvalsh(m).into_iter().map(|v| (v, 1)).collect();
    Ok(SpectrumReport::from_weighted(&values))
}

/// `(|0,g⟩ + |1,gs⟩)/√2` in the `(x, g)` basis of dimension `2|G|`.
pub fn phi_state(group: &Group, s: usize, g: usize) -> Result<Vec<C64>> {
    let gs = group.compose(g, s)?;
    let n = group.order();
    let mut v = vec![ZERO; 2 * n];
    let amp = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    v[g] = amp;
    v[n + gs] = amp;
    Ok(v)
}

fn dense_guard(group: &Group, k: usize) -> Result<usize> {
    if k == 0 {
        return Err(Error::domain("need at least one copy"));
    }
    let dim = (2 * group.order()).checked_pow(k as u32);
    match dim {
        Some(d) if d <= DENSE_DIM_LIMIT => Ok(d),
        _ => Err(Error::capacity(format!(
            "dense state for {} with k={k} exceeds dimension {DENSE_DIM_LIMIT}; use the block form",
            group.descriptor()
        ))),
    }
}

/// `(1/2|G|) [[I, R(s)], [R(s⁻¹), I]]`.
fn gamma1_single(group: &Group, s: usize) -> CMat {
    let n = group.order();
    let w = C64::new(1.0 / (2 * n) as f64, 0.0);
    let mut m = CMat::zeros(2 * n, 2 * n);
    for g in 0..n {
        let gs = group.mul(g, s);
        m[(g, g)] = w;
        m[(n + g, n + g)] = w;
        m[(g, n + gs)] += w;
        m[(n + gs, g)] += w;
    }
    m
}

/// Dense `γ₁(s)^{⊗k}`.
pub fn gamma1_dense(group: &Group, s: usize, k: usize) -> Result<ShiftState> {
    dense_guard(group, k)?;
    group.inverse(s)?;
    Ok(ShiftState {
        group: group.clone(),
        k,
        variant: Variant::Fixed(s),
        form: StateForm::Dense(gamma1_single(group, s).kron_power(k)),
    })
}

fn averaged_dense(group: &Group, k: usize) -> Result<CMat> {
    let dim = dense_guard(group, k)?;
    let mut acc = CMat::zeros(dim, dim);
    for s in group.elements() {
        acc += &gamma1_single(group, s).kron_power(k);
    }
    Ok(acc.scale(1.0 / group.order() as f64))
}

/// `γ₁^{(k)}` in either form.
pub fn gamma1_averaged(group: &Group, irreps: &[Irrep], k: usize, form: Form) -> Result<ShiftState> {
    let form = match form {
        Form::Dense => StateForm::Dense(averaged_dense(group, k)?),
        Form::Blocks => StateForm::Blocks(all_blocks(group, irreps, k, Variant::Averaged)?),
    };
    Ok(ShiftState {
        group: group.clone(),
        k,
        variant: Variant::Averaged,
        form,
    })
}

/// Block form of `γ₁(s)^{⊗k}`.
pub fn gamma1_blocks(group: &Group, irreps: &[Irrep], s: usize, k: usize) -> Result<ShiftState> {
    group.inverse(s)?;
    Ok(ShiftState {
        group: group.clone(),
        k,
        variant: Variant::Fixed(s),
        form: StateForm::Blocks(all_blocks(group, irreps, k, Variant::Fixed(s))?),
    })
}

/// `γ₂^{(k)} = I/(2|G|)^k`.
pub fn gamma2(group: &Group, irreps: &[Irrep], k: usize, form: Form) -> Result<ShiftState> {
    let form = match form {
        Form::Dense => {
            let dim = dense_guard(group, k)?;
            StateForm::Dense(CMat::identity(dim).scale(1.0 / dim as f64))
        }
        Form::Blocks => StateForm::Blocks(all_blocks(group, irreps, k, Variant::NoShift)?),
    };
    Ok(ShiftState {
        group: group.clone(),
        k,
        variant: Variant::NoShift,
        form,
    })
}

/// Decodes tuple number `t` into `k` irrep indices, first index most significant.
pub fn tuple_from_index(t: usize, count: usize, k: usize) -> Vec<usize> {
    let mut out = vec![0; k];
    let mut t = t;
    for slot in out.iter_mut().rev() {
        *slot = t % count;
        t /= count;
    }
    out
}

fn tuple_index(tuple: &[usize], count: usize) -> usize {
    tuple.iter().fold(0, |acc, &x| acc * count + x)
}

/// `A_z = ⊗_j ρ_j(s^{z_j})` for a fixed shift, or its average over `s`.
pub fn block_a(group: &Group, irreps: &[Irrep], tuple: &[usize], z: &[i8], variant: Variant) -> Result<CMat> {
    if tuple.len() != z.len() {
        return Err(Error::domain("irrep tuple and exponent tuple differ in length"));
    }
    if let Some(&bad) = tuple.iter().find(|&&t| t >= irreps.len()) {
        return Err(Error::domain(format!("irrep index {bad} out of range")));
    }
    if z.iter().any(|e| !(-1..=1).contains(e)) {
        return Err(Error::domain("exponents must lie in {-1, 0, 1}"));
    }
    let dim: usize = tuple.iter().map(|&t| irreps[t].dim).product();
    let product_at = |s: usize| {
        tuple.iter().zip(z).fold(CMat::identity(1), |acc, (&t, &e)| {
            acc.kron(&irreps[t].matrices[group.pow_sign(s, e)])
        })
    };
    match variant {
        Variant::Fixed(s) => {
            group.inverse(s)?;
            Ok(product_at(s))
        }
        Variant::Averaged => {
            if z.iter().all(|&e| e == 0) {
                return Ok(CMat::identity(dim));
            }
            let mut acc = CMat::zeros(dim, dim);
            for s in group.elements() {
                acc += &product_at(s);
            }
            Ok(acc.scale(1.0 / group.order() as f64))
        }
        Variant::NoShift => Ok(if z.iter().all(|&e| e == 0) {
            CMat::identity(dim)
        } else {
            CMat::zeros(dim, dim)
        }),
        Variant::Oracle => Err(Error::domain("oracle states have no closed block form")),
    }
}

/// Assembles `B = Σ_{x,y} |x⟩⟨y| ⊗ A_{y−x}` for one irrep tuple.
pub fn block_b(group: &Group, irreps: &[Irrep], tuple: &[usize], variant: Variant) -> Result<Block> {
    let k = tuple.len();
    if k == 0 {
        return Err(Error::domain("need at least one copy"));
    }
    let inner: usize = tuple.iter().map(|&t| irreps.get(t).map_or(0, |r| r.dim)).product();
    let dim = inner.saturating_mul(1 << k);
    if dim > BLOCK_DIM_LIMIT {
        return Err(Error::capacity(format!("block dimension {dim} exceeds {BLOCK_DIM_LIMIT}")));
    }
    // A_z for every z ∈ {-1,0,1}^k, indexed in base 3 by z+1
    let zs = 3usize.pow(k as u32);
    let mut a = Vec::with_capacity(zs);
    for code in 0..zs {
        let z: Vec<i8> = tuple_from_index(code, 3, k).into_iter().map(|d| d as i8 - 1).collect();
        a.push(block_a(group, irreps, tuple, &z, variant)?);
    }
    let mut b = CMat::zeros(dim, dim);
    for x in 0..1usize << k {
        for y in 0..1usize << k {
            let code = (0..k).fold(0, |acc, m| {
                let shift = k - 1 - m;
                let xm = (x >> shift) & 1;
                let ym = (y >> shift) & 1;
                acc * 3 + (ym + 1 - xm)
            });
            let az = &a[code];
            for r in 0..inner {
                for c in 0..inner {
                    b[(x * inner + r, y * inner + c)] = az[(r, c)];
                }
            }
        }
    }
    Ok(Block {
        tuple: tuple.to_vec(),
        matrix: b,
        multiplicity: inner,
    })
}

/// Largest `Σ_tuples dim(B)³ = 8ᵏ (Σ_ρ d_ρ³)ᵏ` a full sweep may cost.
/// `S₄` with three copies needs about 1.3·10⁸.
pub const SWEEP_WORK_LIMIT: f64 = 1e10;

/// Refuses sweeps whose largest block or total eigensolver work is too big,
/// before any block is built.
fn sweep_guard(group: &Group, irreps: &[Irrep], k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::domain("need at least one copy"));
    }
    let max_d = irreps.iter().map(|r| r.dim).max().unwrap_or(1) as f64;
    let largest = 2f64.powi(k as i32) * max_d.powi(k as i32);
    if largest > BLOCK_DIM_LIMIT as f64 {
        return Err(Error::capacity(format!(
            "{} with k={k} has blocks of dimension {largest}, above {BLOCK_DIM_LIMIT}",
            group.descriptor()
        )));
    }
    let cubes: f64 = irreps.iter().map(|r| (r.dim as f64).powi(3)).sum();
    let work = (8.0 * cubes).powi(k as i32);
    if work > SWEEP_WORK_LIMIT {
        return Err(Error::capacity(format!(
            "{} with k={k} needs about {work:.1e} eigensolver operations, above {SWEEP_WORK_LIMIT:.0e}",
            group.descriptor()
        )));
    }
    Ok(())
}

fn all_blocks(group: &Group, irreps: &[Irrep], k: usize, variant: Variant) -> Result<Vec<Block>> {
    sweep_guard(group, irreps, k)?;
    let count = irreps.len();
    let total = count.pow(k as u32);
    par::map_indexed(total, |t| block_b(group, irreps, &tuple_from_index(t, count, k), variant))
        .into_iter()
        .collect()
}

/// Eigenvalues of one block, unnormalized.
#[derive(Clone, Debug)]
pub struct BlockSpectrum {
    pub tuple: Vec<usize>,
    pub multiplicity: usize,
    /// Descending eigenvalues of `B`.
    pub eigenvalues: Vec<f64>,
}

/// Spectra of every block, in canonical tuple order. Blocks are built and
/// diagonalized independently so peak memory stays at one block per worker.
pub fn block_sweep(group: &Group, irreps: &[Irrep], k: usize, variant: Variant) -> Result<Vec<BlockSpectrum>> {
    sweep_guard(group, irreps, k)?;
    let count = irreps.len();
    par::map_indexed(count.pow(k as u32), |t| {
        let block = block_b(group, irreps, &tuple_from_index(t, count, k), variant)?;
        Ok(BlockSpectrum {
            eigenvalues: eigvalsh(&block.matrix),
            tuple: block.tuple,
            multiplicity: block.multiplicity,
        })
    })
    .into_iter()
    .collect()
}

/// Aggregated spectrum of the normalized state from a block sweep.
pub fn sweep_spectrum(group: &Group, k: usize, sweep: &[BlockSpectrum]) -> SpectrumReport {
    let scale = (2.0 * group.order() as f64).powi(-(k as i32));
    let weighted: Vec<(f64, usize)> = sweep
        .iter()
        .flat_map(|b| b.eigenvalues.iter().map(move |&v| (v * scale, b.multiplicity)))
        .collect();
    SpectrumReport::from_weighted(&weighted)
}

/// Closed-form rank of `γ₁^{(k)}` where one is known (`k ∈ {1, 2}`).
pub fn closed_form_rank(group: &Group, irreps: &[Irrep], k: usize) -> Option<u64> {
    let n = group.order() as u64;
    let one_dim = irreps.iter().filter(|r| r.dim == 1).count() as u64;
    match k {
        1 => Some(2 * n - 1),
        2 => Some(4 * n * n + 3 - 5 * n - one_dim),
        _ => None,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RankReport {
    pub numeric: u64,
    pub closed_form: Option<u64>,
}

impl RankReport {
    pub fn matches(&self) -> Option<bool> {
        self.closed_form.map(|c| c == self.numeric)
    }
}

/// Rank of `γ₁^{(k)}` from block spectra (threshold relative to the largest
/// eigenvalue), alongside the closed form when `k ≤ 2`.
pub fn rank_gamma1(group: &Group, irreps: &[Irrep], k: usize) -> Result<RankReport> {
    let sweep = block_sweep(group, irreps, k, Variant::Averaged)?;
    let report = sweep_spectrum(group, k, &sweep);
    Ok(RankReport {
        numeric: report.rank as u64,
        closed_form: closed_form_rank(group, irreps, k),
    })
}

/// Outcome of the search for an eigenvalue strictly inside `(0, 1/(2|G|)^k)`.
#[derive(Clone, Debug, PartialEq)]
pub struct InteriorCheck {
    pub found: bool,
    /// Normalized eigenvalue `λ` of the state.
    pub witness: Option<f64>,
    pub witness_tuple: Option<Vec<usize>>,
}

/// Scans averaged block spectra for an eigenvalue `λ` with
/// `10⁻⁸ < λ·(2|G|)^k < 1 − 10⁻⁸`. When one exists, projecting onto the
/// support of `γ₁^{(k)}` is not a Helstrom measurement against `γ₂^{(k)}`.
/// The first hit in canonical tuple order (largest eigenvalue first) is returned.
pub fn interior_eigenvalue_check(group: &Group, irreps: &[Irrep], k: usize) -> Result<InteriorCheck> {
    let sweep = block_sweep(group, irreps, k, Variant::Averaged)?;
    let scale = (2.0 * group.order() as f64).powi(-(k as i32));
    for b in &sweep {
        if let Some(&v) = b.eigenvalues.iter().find(|&&v| v > 1e-8 && v < 1.0 - 1e-8) {
            return Ok(InteriorCheck {
                found: true,
                witness: Some(v * scale),
                witness_tuple: Some(b.tuple.clone()),
            });
        }
    }
    Ok(InteriorCheck {
        found: false,
        witness: None,
        witness_tuple: None,
    })
}

/// [`interior_eigenvalue_check`] for `S₄` with three copies.
pub fn s4_k3_interior_eigenvalue_check() -> Result<InteriorCheck> {
    let g = Group::symmetric(4)?;
    let reps = crate::rep::irreps(&g)?;
    interior_eigenvalue_check(&g, &reps, 3)
}

/// Predicted spectrum of the averaged block `B^{ρ,ρ}` for a nontrivial irrep
/// of dimension `d`, given whether `ρ⊗ρ` contains the trivial irrep. Returned
/// expanded by multiplicity and sorted descending.
pub fn predicted_square_block_spectrum(d: usize, trivial_in_square: bool) -> Vec<f64> {
    let d2 = d * d;
    let inv = 1.0 / d as f64;
    let mut v = Vec::with_capacity(4 * d2);
    v.extend(std::iter::repeat_n(1.0 + inv, d2));
    v.extend(std::iter::repeat_n(1.0 - inv, d2));
    if trivial_in_square {
        v.push(2.0);
        v.push(0.0);
        v.extend(std::iter::repeat_n(1.0, 2 * d2 - 2));
    } else {
        v.extend(std::iter::repeat_n(1.0, 2 * d2));
    }
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

/// Observed against predicted spectrum of `B^{ρ,ρ}`.
#[derive(Clone, Debug)]
pub struct SquareBlockCheck {
    pub irrep: usize,
    /// Multiplicity of the trivial irrep in `ρ⊗ρ` (0 or 1 for irreducible `ρ`).
    pub trivial_multiplicity: usize,
    pub observed: Vec<f64>,
    pub predicted: Vec<f64>,
    pub max_deviation: f64,
}

impl SquareBlockCheck {
    pub fn matches(&self, tol: f64) -> bool {
        self.observed.len() == self.predicted.len() && self.max_deviation <= tol
    }
}

pub fn square_block_check(group: &Group, irreps: &[Irrep], irrep: usize) -> Result<SquareBlockCheck> {
    let rho = irreps.get(irrep).ok_or_else(|| Error::domain("irrep index out of range"))?;
    if rho.is_trivial() {
        return Err(Error::domain("the square-block prediction needs a nontrivial irrep"));
    }
    let trivial = trivial_multiplicity(&tensor_rep(rho, rho));
    let block = block_b(group, irreps, &[irrep, irrep], Variant::Averaged)?;
    let observed = eigvalsh(&block.matrix);
    let predicted = predicted_square_block_spectrum(rho.dim, trivial == 1);
    let max_deviation = observed
        .iter()
        .zip(&predicted)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok(SquareBlockCheck {
        irrep,
        trivial_multiplicity: trivial,
        observed,
        predicted,
        max_deviation,
    })
}

/// Largest deviation between a dense state conjugated into the Fourier basis
/// by `(I₂ ⊗ F)^{⊗k}` and the state rebuilt from its blocks.
pub fn fourier_block_residual(
    ft: &FourierTransform,
    irreps: &[Irrep],
    dense: &ShiftState,
    blocks: &ShiftState,
) -> Result<f64> {
    let (Some(m), Some(bl)) = (dense.dense(), blocks.blocks()) else {
        return Err(Error::domain("need one dense and one block state"));
    };
    if dense.k != blocks.k || dense.group != blocks.group {
        return Err(Error::domain("states differ in group or copy count"));
    }
    let k = dense.k;
    let n = dense.group.order();
    let single = CMat::identity(2).kron(&ft.matrix);
    let u = single.kron_power(k);
    let rotated = u.matmul(m).matmul(&u.adjoint());
    let count = irreps.len();
    let scale = blocks.block_scale();

    // per-copy decomposition of a Fourier-basis index
    let decode = |idx: usize| -> Vec<(usize, usize, usize, usize)> {
        let mut parts = vec![(0, 0, 0, 0); k];
        let mut rest = idx;
        for slot in parts.iter_mut().rev() {
            let local = rest % (2 * n);
            rest /= 2 * n;
            let (x, f) = (local / n, local % n);
            let row = ft.rows[f];
            *slot = (x, row.irrep, row.i, row.j);
        }
        parts
    };
    let dim = rotated.rows();
    let decoded: Vec<_> = (0..dim).map(decode).collect();
    let mut worst: f64 = 0.0;
    for r in 0..dim {
        for c in 0..dim {
            let (pr, pc) = (&decoded[r], &decoded[c]);
            let same_block = pr.iter().zip(pc).all(|(a, b)| a.1 == b.1 && a.2 == b.2);
            let expected = if same_block {
                let tuple: Vec<usize> = pr.iter().map(|p| p.1).collect();
                let block = &bl[tuple_index(&tuple, count)];
                let inner = block.multiplicity;
                let bits = |p: &Vec<(usize, usize, usize, usize)>| p.iter().fold(0, |acc, q| acc * 2 + q.0);
                let jidx = |p: &Vec<(usize, usize, usize, usize)>| {
                    p.iter().fold(0, |acc, q| acc * irreps[q.1].dim + q.3)
                };
                block.matrix[(bits(pr) * inner + jidx(pr), bits(pc) * inner + jidx(pc))] * scale
            } else {
                ZERO
            };
            worst = worst.max((rotated[(r, c)] - expected).norm());
        }
    }
    Ok(worst)
}

/// Result of comparing the shift state restricted to a subgroup against
/// `γ₁^H ⊗ I/[G:H]`.
#[derive(Clone, Copy, Debug)]
pub struct RestrictionCheck {
    pub holds: bool,
    pub residual: f64,
}

/// Checks that `(1/|H|) Σ_{s∈H} γ₁^G(ι(s))`, reordered so that `g = t·ι(h)`
/// becomes `(x, h, t)`, equals the averaged `H` state tensored with the
/// maximally mixed state on the coset register.
pub fn subgroup_restriction_check(emb: &SubgroupEmbedding) -> Result<RestrictionCheck> {
    let g = &emb.parent;
    let h = &emb.subgroup;
    dense_guard(g, 1)?;
    let mut restricted = CMat::zeros(2 * g.order(), 2 * g.order());
    for s in h.elements() {
        restricted += &gamma1_single(g, emb.injection[s]);
    }
    let restricted = restricted.scale(1.0 / h.order() as f64);

    let m = emb.index();
    let perm: Vec<usize> = (0..2 * g.order())
        .map(|idx| {
            let (x, el) = (idx / g.order(), idx % g.order());
            let (c, hh) = emb.factor(el);
            (x * h.order() + hh) * m + c
        })
        .collect();
    let lhs = restricted.permuted(&perm);
    let rhs = averaged_dense(h, 1)?.kron(&CMat::identity(m).scale(1.0 / m as f64));
    let residual = lhs.max_abs_diff(&rhs);
    Ok(RestrictionCheck {
        holds: residual <= 1e-9,
        residual,
    })
}

/// Averaged one-copy block for an irrep, `B^ρ`; a convenience used by the
/// measurement code.
pub fn averaged_single_block(group: &Group, irreps: &[Irrep], irrep: usize) -> Result<CMat> {
    Ok(block_b(group, irreps, &[irrep], Variant::Averaged)?.matrix)
}

/// Fixed-shift one-copy block `B^ρ(s) = [[I, ρ(s)], [ρ(s⁻¹), I]]`.
pub fn fixed_single_block(group: &Group, rho: &Irrep, s: usize) -> CMat {
    let d = rho.dim;
    let mut b = CMat::identity(2 * d);
    let fwd = &rho.matrices[s];
    let back = &rho.matrices[group.inv(s)];
    for i in 0..d {
        for j in 0..d {
            b[(i, d + j)] = fwd[(i, j)];
            b[(d + i, j)] = back[(i, j)];
        }
    }
    b
}

/// `(1/|G|) Σ_g π(g)` restricted to the trivial-isotypic question: whether
/// `ρ⊗ρ` contains the trivial irrep, via the rank of its group average.
pub fn square_contains_trivial(rho: &Irrep) -> bool {
    let avg = average_rep(&tensor_rep(rho, rho));
    eigvalsh(&avg).iter().any(|&v| v > 0.5)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rep::{fourier, irreps};

    fn setup(name: &str) -> (Group, Vec<Irrep>) {
        let g = Group::parse(name).unwrap();
        let r = irreps(&g).unwrap();
        (g, r)
    }

    #[test]
    fn phi_states() {
        let (g, _) = setup("S3");
        let v = phi_state(&g, 0, 0).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((v[0].re - h).abs() < 1e-15 && (v[6].re - h).abs() < 1e-15);
        for s in g.elements() {
            for x in g.elements() {
                let v = phi_state(&g, s, x).unwrap();
                assert!((crate::linalg::vec_norm(&v) - 1.0).abs() < 1e-15);
            }
        }
        assert!(phi_state(&g, 6, 0).is_err());
    }

    #[test]
    fn gamma1_is_mixture_of_phi_states() {
        let (g, _) = setup("Z3");
        for s in g.elements() {
            let mut acc = CMat::zeros(6, 6);
            for x in g.elements() {
                acc += &CMat::outer(&phi_state(&g, s, x).unwrap(), 1.0 / 3.0);
            }
            let st = gamma1_dense(&g, s, 1).unwrap();
            assert!(st.dense().unwrap().max_abs_diff(&acc) < 1e-15);
        }
    }

    #[test]
    fn z2_identity_shift_spectrum() {
        let (g, _) = setup("Z2");
        let st = gamma1_dense(&g, 0, 1).unwrap();
        // explicit 4×4 matrix: (1/4)[[I, I], [I, I]] has eigenvalues 1/2, 1/2, 0, 0
        let e = st.spectrum().unwrap().expanded();
        let expect = [0.5, 0.5, 0.0, 0.0];
        for (a, b) in e.iter().zip(expect) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn fixed_shift_states_have_rank_order() {
        let (g, _) = setup("S3");
        for s in g.elements() {
            for k in 1..=2 {
                let st = gamma1_dense(&g, s, k).unwrap();
                let d = st.diagnostics().unwrap();
                assert!(d.is_valid(), "{d:?}");
            }
            let rep = gamma1_dense(&g, s, 1).unwrap().spectrum().unwrap();
            assert_eq!(rep.rank, 6);
            assert!((rep.clusters[0].value - 1.0 / 6.0).abs() < 1e-12);
        }
    }

    #[test]
    fn dense_capacity_guard() {
        let (g, _) = setup("S5");
        assert!(matches!(gamma1_dense(&g, 0, 2), Err(Error::Capacity(_))));
        assert!(gamma1_dense(&g, 0, 1).is_ok());
    }

    #[test]
    fn averaged_k1_rank_and_values() {
        for name in ["Z2", "Z3", "S3", "Z2xZ2"] {
            let (g, r) = setup(name);
            let st = gamma1_averaged(&g, &r, 1, Form::Dense).unwrap();
            let rep = st.spectrum().unwrap();
            let n = g.order();
            assert_eq!(rep.rank, 2 * n - 1);
            assert_eq!(rep.multiplicity_of(1.0 / (2 * n) as f64, 1e-12), 2 * n - 2);
            assert_eq!(rep.multiplicity_of(1.0 / n as f64, 1e-12), 1);
        }
    }

    #[test]
    fn gamma2_is_maximally_mixed() {
        let (g, r) = setup("S3");
        let dense = gamma2(&g, &r, 2, Form::Dense).unwrap();
        assert!(dense.dense().unwrap().max_abs_diff(&CMat::identity(144).scale(1.0 / 144.0)) == 0.0);
        let blocks = gamma2(&g, &r, 2, Form::Blocks).unwrap();
        let rep = blocks.spectrum().unwrap();
        assert_eq!(rep.clusters.len(), 1);
        assert_eq!(rep.clusters[0].multiplicity, 144);
    }

    #[test]
    fn block_a_properties() {
        let (g, r) = setup("S3");
        for t in 0..3 {
            let a0 = block_a(&g, &r, &[t], &[0], Variant::Averaged).unwrap();
            assert_eq!(a0, CMat::identity(r[t].dim));
        }
        // averaged single copy, nontrivial irrep
        assert!(block_a(&g, &r, &[1], &[1], Variant::Averaged).unwrap().max_abs() < 1e-15);
        // averaged rep ⊗ antirep of the standard irrep: (1/2) δ_il δ_jk
        let a = block_a(&g, &r, &[1, 1], &[1, -1], Variant::Averaged).unwrap();
        assert!(a.max_abs_diff(&crate::rep::swap_pattern(2)) < 1e-12);
        // A_z† = A_{-z}
        for s in g.elements() {
            for z in [[1i8, 1], [1, -1], [0, 1], [-1, 0]] {
                let nz = [-z[0], -z[1]];
                let fwd = block_a(&g, &r, &[1, 1], &z, Variant::Fixed(s)).unwrap();
                let back = block_a(&g, &r, &[1, 1], &nz, Variant::Fixed(s)).unwrap();
                assert!(fwd.adjoint().max_abs_diff(&back) < 1e-12);
            }
        }
        assert!(block_a(&g, &r, &[1], &[1, 0], Variant::Averaged).is_err());
    }

    #[test]
    fn single_copy_blocks() {
        let (g, r) = setup("S4");
        let triv = block_b(&g, &r, &[0], Variant::Averaged).unwrap();
        assert!(triv.matrix.max_abs_diff(&CMat::from_real(2, 2, &[1.0, 1.0, 1.0, 1.0])) < 1e-15);
        let e = spectrum(&triv.matrix).unwrap().expanded();
        assert!((e[0] - 2.0).abs() < 1e-14 && e[1].abs() < 1e-14);
        for t in 1..r.len() {
            let b = block_b(&g, &r, &[t], Variant::Averaged).unwrap();
            assert!(b.matrix.max_abs_diff(&CMat::identity(2 * r[t].dim)) <= 1e-10);
        }
        let (g3, r3) = setup("S3");
        for s in g3.elements() {
            for t in 0..r3.len() {
                let b = block_b(&g3, &r3, &[t], Variant::Fixed(s)).unwrap();
                assert!(b.matrix.max_abs_diff(&fixed_single_block(&g3, &r3[t], s)) < 1e-15);
                let rep = spectrum(&b.matrix).unwrap();
                assert_eq!(rep.multiplicity_of(2.0, 1e-10), r3[t].dim);
                assert_eq!(rep.multiplicity_of(0.0, 1e-10), r3[t].dim);
            }
        }
    }

    #[test]
    fn averaged_block_equals_mean_of_fixed_blocks() {
        let (g, r) = setup("S3");
        for tuple in [vec![1, 1], vec![0, 1], vec![1, 2], vec![2, 1, 1]] {
            let avg = block_b(&g, &r, &tuple, Variant::Averaged).unwrap().matrix;
            let mut acc = CMat::zeros(avg.rows(), avg.cols());
            for s in g.elements() {
                acc += &block_b(&g, &r, &tuple, Variant::Fixed(s)).unwrap().matrix;
            }
            assert!(acc.scale(1.0 / 6.0).max_abs_diff(&avg) < 1e-12);
        }
    }

    #[test]
    fn square_block_of_s3_standard() {
        let (g, r) = setup("S3");
        let check = square_block_check(&g, &r, 1).unwrap();
        assert_eq!(check.trivial_multiplicity, 1);
        assert!(check.matches(1e-8), "{check:?}");
        let rep = spectrum(&block_b(&g, &r, &[1, 1], Variant::Averaged).unwrap().matrix).unwrap();
        let counts: Vec<(f64, usize)> = rep.clusters.iter().map(|c| (c.value, c.multiplicity)).collect();
        let expect = [(2.0, 1), (1.5, 4), (1.0, 6), (0.5, 4), (0.0, 1)];
        assert_eq!(counts.len(), expect.len());
        for ((v, m), (ev, em)) in counts.iter().zip(expect) {
            assert!((v - ev).abs() < 1e-8);
            assert_eq!(*m, em);
        }
        assert!(square_block_check(&g, &r, 0).is_err());
        assert!(square_contains_trivial(&r[1]));
    }

    #[test]
    fn complex_characters_take_the_first_pattern() {
        let (g, r) = setup("Z3");
        // χ₁⊗χ₁ = χ₂ contains no trivial part
        let check = square_block_check(&g, &r, 1).unwrap();
        assert_eq!(check.trivial_multiplicity, 0);
        assert!(check.matches(1e-8));
    }

    #[test]
    fn block_and_dense_agree() {
        for (name, k) in [("Z2", 1), ("Z3", 2), ("S3", 1), ("S3", 2), ("Z2xZ2", 2)] {
            let (g, r) = setup(name);
            let ft = fourier(&g, &r).unwrap();
            let dense = gamma1_averaged(&g, &r, k, Form::Dense).unwrap();
            let blocks = gamma1_averaged(&g, &r, k, Form::Blocks).unwrap();
            assert!(fourier_block_residual(&ft, &r, &dense, &blocks).unwrap() < 1e-9, "{name} k={k}");
            let a = dense.spectrum().unwrap().expanded();
            let b = blocks.spectrum().unwrap().expanded();
            assert_eq!(a.len(), b.len());
            assert!(a.iter().zip(&b).all(|(x, y)| (x - y).abs() < 1e-8), "{name} k={k} {:?} {:?}", dense.spectrum().unwrap().clusters, blocks.spectrum().unwrap().clusters);

            let s = g.order() - 1;
            let dense = gamma1_dense(&g, s, k).unwrap();
            let blocks = gamma1_blocks(&g, &r, s, k).unwrap();
            assert!(fourier_block_residual(&ft, &r, &dense, &blocks).unwrap() < 1e-9);
        }
    }

    #[test]
    fn ranks_match_closed_forms() {
        for name in ["Z2", "Z3", "Z4", "Z2xZ2", "S3"] {
            let (g, r) = setup(name);
            for k in 1..=2 {
                let rep = rank_gamma1(&g, &r, k).unwrap();
                assert_eq!(rep.matches(), Some(true), "{name} k={k}: {rep:?}");
            }
        }
        let (s3, r) = setup("S3");
        assert_eq!(rank_gamma1(&s3, &r, 1).unwrap().numeric, 11);
        assert_eq!(rank_gamma1(&s3, &r, 2).unwrap().numeric, 115);
        let (z4, r) = setup("Z4");
        assert_eq!(rank_gamma1(&z4, &r, 2).unwrap().numeric, 43);
        assert_eq!(rank_gamma1(&z4, &r, 3).unwrap().closed_form, None);
    }

    #[test]
    fn interior_eigenvalues() {
        let (g, r) = setup("Z2");
        let check = interior_eigenvalue_check(&g, &r, 1).unwrap();
        assert!(!check.found);
        let a = s4_k3_interior_eigenvalue_check().unwrap();
        let b = s4_k3_interior_eigenvalue_check().unwrap();
        assert!(a.found);
        let w = a.witness.unwrap() * 48f64.powi(3);
        assert!(w > 1e-8 && w < 1.0 - 1e-8);
        assert_eq!(a.witness.unwrap().to_bits(), b.witness.unwrap().to_bits());
    }

    #[test]
    fn subgroup_restrictions() {
        let whole = SubgroupEmbedding::new(
            Group::symmetric(3).unwrap(),
            Group::symmetric(3).unwrap(),
            (0..6).collect(),
        )
        .unwrap();
        assert!(subgroup_restriction_check(&whole).unwrap().holds);
        let z3 = crate::group::abelian_subgroup_of_symmetric(3, &[3]).unwrap();
        assert!(subgroup_restriction_check(&z3).unwrap().holds);
        let z2_in_z4 =
            SubgroupEmbedding::new(Group::abelian(&[4]).unwrap(), Group::abelian(&[2]).unwrap(), vec![0, 2]).unwrap();
        assert!(subgroup_restriction_check(&z2_in_z4).unwrap().holds);
    }

    #[test]
    fn cluster_report_counts() {
        let rep = SpectrumReport::from_weighted(&[(1.0, 2), (1.0 + 1e-12, 1), (0.5, 3), (1e-20, 4)]);
        assert_eq!(rep.clusters.len(), 3);
        assert_eq!(rep.clusters[0].multiplicity, 3);
        assert_eq!(rep.rank, 6);
        assert_eq!(rep.min_nonzero, Some(0.5));
        assert!(spectrum(&CMat::from_real(2, 2, &[0.0, 1.0, 0.0, 0.0])).is_err());
    }
}
