//! Irreducible representations, the group Fourier transform, and the two
//! averaging identities the block analysis rests on.
//!
//! Canonical irrep order: abelian groups list characters by their tuple `w`
//! in row-major order; `S_n` lists partitions in descending lexicographic
//! order. In both cases the trivial representation comes first.

pub mod cache;
mod young;

use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;

use crate::error::{Error, Result};
use crate::group::{decode_digits, partitions, Group, GroupDescriptor};
use crate::linalg::{eigvalsh, CMat, C64};

pub use young::hook_length_dimension;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum IrrepLabel {
    /// Shape of the Young diagram (`S_n`).
    Partition(Vec<usize>),
    /// Character tuple `w` with `χ_w(g) = exp(2πi Σ w_i g_i / N_i)`.
    Character(Vec<usize>),
}

impl fmt::Display for IrrepLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: &[usize]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        match self {
            IrrepLabel::Partition(p) => write!(f, "[{}]", join(p)),
            IrrepLabel::Character(w) => write!(f, "chi[{}]", join(w)),
        }
    }
}

impl FromStr for IrrepLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::parse(format!("invalid irrep label {s:?}"));
        let (is_char, body) = match s.strip_prefix("chi") {
            Some(rest) => (true, rest),
            None => (false, s),
        };
        let inner = body.strip_prefix('[').and_then(|b| b.strip_suffix(']')).ok_or_else(bad)?;
        let parts = inner
            .split(',')
            .map(|p| p.trim().parse::<usize>().map_err(|_| bad()))
            .collect::<Result<Vec<_>>>()?;
        Ok(if is_char {
            IrrepLabel::Character(parts)
        } else {
            IrrepLabel::Partition(parts)
        })
    }
}

/// An irreducible representation given by its matrix on every group element.
#[derive(Clone, Debug, PartialEq)]
pub struct Irrep {
    pub label: IrrepLabel,
    pub dim: usize,
    /// `matrices[g]` is `ρ(g)`.
    pub matrices: Vec<CMat>,
}

impl Irrep {
    pub fn matrix(&self, g: usize) -> &CMat {
        &self.matrices[g]
    }

    pub fn is_trivial(&self) -> bool {
        match &self.label {
            IrrepLabel::Partition(p) => p.len() == 1,
            IrrepLabel::Character(w) => w.iter().all(|&x| x == 0),
        }
    }

    /// `tr ρ(g)`.
    pub fn character(&self, g: usize) -> C64 {
        self.matrices[g].trace()
    }
}

/// Largest `|G|²`, the number of stored matrix entries over all irreps,
/// that [`irreps`] will build. `S₇` fits; `S₈` would need about 26 GB.
pub const IRREP_ENTRY_LIMIT: usize = 5040 * 5040;

/// All irreducible representations of `group`, in canonical order.
pub fn irreps(group: &Group) -> Result<Vec<Irrep>> {
    let n = group.order();
    if n.saturating_mul(n) > IRREP_ENTRY_LIMIT {
        return Err(Error::capacity(format!(
            "irreps of {} need {n}² stored entries, above {IRREP_ENTRY_LIMIT}",
            group.descriptor()
        )));
    }
    match group.descriptor() {
        GroupDescriptor::Abelian(moduli) => Ok(group
            .elements()
            .map(|w| {
                let wd = decode_digits(moduli, w);
                let matrices = group
                    .elements()
                    .map(|g| {
                        let gd = decode_digits(moduli, g);
                        let phase: f64 = wd
                            .iter()
                            .zip(&gd)
                            .zip(moduli)
                            .map(|((&a, &b), &m)| ((a * b) % m) as f64 / m as f64)
                            .sum();
                        let angle = 2.0 * std::f64::consts::PI * phase;
                        CMat::from_vec(1, 1, vec![C64::new(angle.cos(), angle.sin())])
                    })
                    .collect();
                Irrep {
                    label: IrrepLabel::Character(wd),
                    dim: 1,
                    matrices,
                }
            })
            .collect()),
        GroupDescriptor::Symmetric(n) => Ok(partitions(*n)
            .into_iter()
            .map(|shape| {
                let matrices = young::orthogonal_form(group, &shape);
                Irrep {
                    dim: matrices[0].rows(),
                    label: IrrepLabel::Partition(shape),
                    matrices,
                }
            })
            .collect()),
    }
}

/// Right regular representation: `R(s)|g⟩ = |g s⁻¹⟩`.
pub fn regular_rep(group: &Group, s: usize) -> CMat {
    let n = group.order();
    let s_inv = group.inv(s);
    let mut m = CMat::zeros(n, n);
    for g in 0..n {
        m[(group.mul(g, s_inv), g)] = C64::new(1.0, 0.0);
    }
    m
}

/// Row `(irrep, i, j)` of the Fourier matrix. `i` indexes the copy of the
/// irrep inside the regular representation, `j` the irrep's own basis.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FourierRow {
    pub irrep: usize,
    pub i: usize,
    pub j: usize,
}

/// Unitary `F` with `F R(s) F† = ⊕_ρ I_{d_ρ} ⊗ ρ(s)`.
///
/// Rows are grouped by irrep in canonical order, then ordered by `(i, j)`
/// with `i` major, and row `(ρ, i, j)` has entries `sqrt(d_ρ/|G|)·conj(ρ(g)_{ij})`.
#[derive(Clone, Debug)]
pub struct FourierTransform {
    pub matrix: CMat,
    pub rows: Vec<FourierRow>,
    /// First row of each irrep's block.
    pub offsets: Vec<usize>,
}

/// Largest tolerated intertwining residual before `fourier` reports failure.
pub const INTERTWINING_TOLERANCE: f64 = 1e-9;

/// Builds the Fourier transform and checks the intertwining identity for every `s`.
pub fn fourier(group: &Group, irreps: &[Irrep]) -> Result<FourierTransform> {
    let n = group.order();
    let total: usize = irreps.iter().map(|r| r.dim * r.dim).sum();
    if total != n {
        return Err(Error::consistency(format!("sum of d^2 is {total}, expected {n}")));
    }
    let mut rows = Vec::with_capacity(n);
    let mut offsets = Vec::with_capacity(irreps.len());
    for (idx, rho) in irreps.iter().enumerate() {
        offsets.push(rows.len());
        for i in 0..rho.dim {
            for j in 0..rho.dim {
                rows.push(FourierRow { irrep: idx, i, j });
            }
        }
    }
    let matrix = CMat::from_fn(n, n, |r, g| {
        let row = rows[r];
        let rho = &irreps[row.irrep];
        let scale = (rho.dim as f64 / n as f64).sqrt();
        rho.matrices[g][(row.i, row.j)].conj() * scale
    });
    let ft = FourierTransform {
        matrix,
        rows,
        offsets,
    };
    for s in group.elements() {
        let residual = ft.intertwining_residual(group, irreps, s);
        if residual > INTERTWINING_TOLERANCE {
            return Err(Error::consistency(format!(
                "Fourier intertwining residual {residual:e} at s={s}"
            )));
        }
    }
    Ok(ft)
}

impl FourierTransform {
    /// `max |F R(s) F† - ⊕ I⊗ρ(s)|`.
    pub fn intertwining_residual(&self, group: &Group, irreps: &[Irrep], s: usize) -> f64 {
        let n = group.order();
        let s_inv = group.inv(s);
        // (F R(s))_{r,h} = F_{r, h s⁻¹}
        let fr = CMat::from_fn(n, n, |r, h| self.matrix[(r, group.mul(h, s_inv))]);
        let lhs = fr.matmul(&self.matrix.adjoint());
        lhs.max_abs_diff(&regular_block_form(irreps, s))
    }

    pub fn unitarity_residual(&self) -> f64 {
        let n = self.matrix.rows();
        self.matrix.matmul(&self.matrix.adjoint()).max_abs_diff(&CMat::identity(n))
    }
}

/// `⊕_ρ I_{d_ρ} ⊗ ρ(s)`.
pub fn regular_block_form(irreps: &[Irrep], s: usize) -> CMat {
    let blocks: Vec<CMat> = irreps
        .iter()
        .map(|r| CMat::identity(r.dim).kron(&r.matrices[s]))
        .collect();
    CMat::direct_sum(&blocks)
}

#[derive(Clone, Debug, PartialEq)]
pub struct PlancherelEntry {
    pub label: IrrepLabel,
    pub dim: usize,
    /// `d_ρ² / |G|`, exact.
    pub probability: Ratio<u64>,
}

/// The Plancherel distribution over irrep labels.
pub fn plancherel(group: &Group, irreps: &[Irrep]) -> Vec<PlancherelEntry> {
    let n = group.order() as u64;
    irreps
        .iter()
        .map(|r| PlancherelEntry {
            label: r.label.clone(),
            dim: r.dim,
            probability: Ratio::new((r.dim * r.dim) as u64, n),
        })
        .collect()
}

/// `(1/|G|) Σ_g π(g)` for a representation given element by element.
///
/// For a genuine representation this is the projector onto the trivial
/// isotypic component.
pub fn average_rep(pi: &[CMat]) -> CMat {
    assert!(!pi.is_empty(), "empty representation");
    let mut acc = CMat::zeros(pi[0].rows(), pi[0].cols());
    for m in pi {
        acc += m;
    }
    acc.scale(1.0 / pi.len() as f64)
}

/// Element-wise tensor product representation `g ↦ ρ(g) ⊗ σ(g)`.
pub fn tensor_rep(rho: &Irrep, sigma: &Irrep) -> Vec<CMat> {
    rho.matrices
        .iter()
        .zip(&sigma.matrices)
        .map(|(a, b)| a.kron(b))
        .collect()
}

/// Multiplicity of the trivial irrep in `π`, read off as the rank of its average.
pub fn trivial_multiplicity(pi: &[CMat]) -> usize {
    eigvalsh(&average_rep(pi)).iter().filter(|&&x| x > 0.5).count()
}

/// `(1/|G|) Σ_g ρ(g) ⊗ σ(g⁻¹)`, whose `(i,j;k,l)` entry is
/// `δ_{ρσ} δ_{il} δ_{jk} / d_ρ`.
pub fn average_rep_antirep(group: &Group, rho: &Irrep, sigma: &Irrep) -> CMat {
    let mut acc = CMat::zeros(rho.dim * sigma.dim, rho.dim * sigma.dim);
    for g in group.elements() {
        acc += &rho.matrices[g].kron(&sigma.matrices[group.inv(g)]);
    }
    acc.scale(1.0 / group.order() as f64)
}

/// `(1/d) Σ_{i,j} |i,j⟩⟨j,i|`, the expected value of the average over a
/// representation and its own antirepresentation.
pub fn swap_pattern(d: usize) -> CMat {
    CMat::from_fn(d * d, d * d, |r, c| {
        let (i, j) = (r / d, r % d);
        let (k, l) = (c / d, c % d);
        if i == l && j == k {
            C64::new(1.0 / d as f64, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}
