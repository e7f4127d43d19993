//! Young's orthogonal form for irreducible representations of `S_n`.
//!
//! Basis vectors are standard Young tableaux of a fixed shape. Each adjacent
//! transposition `s_i = (i, i+1)` acts through the axial distance
//! `r = content(i+1) - content(i)`:
//!
//! ```text
//! s_i · T = (1/r) T + sqrt(1 - 1/r²) s_i(T)
//! ```
//!
//! which is `+T` when `i, i+1` share a row and `-T` when they share a column.
//! Every matrix is real orthogonal.

use std::collections::HashMap;

use crate::group::Group;
use crate::linalg::{CMat, C64};

/// A standard tableau stored as the row of each entry `0..n`.
type Tableau = Vec<u8>;

pub(crate) fn standard_tableaux(shape: &[usize]) -> Vec<Tableau> {
    fn fill(v: usize, n: usize, shape: &[usize], lens: &mut Vec<usize>, cur: &mut Tableau, out: &mut Vec<Tableau>) {
        if v == n {
            out.push(cur.clone());
            return;
        }
        for r in 0..shape.len() {
            if lens[r] < shape[r] && (r == 0 || lens[r - 1] > lens[r]) {
                lens[r] += 1;
                cur.push(r as u8);
                fill(v + 1, n, shape, lens, cur, out);
                cur.pop();
                lens[r] -= 1;
            }
        }
    }
    let n = shape.iter().sum();
    let mut out = Vec::new();
    fill(0, n, shape, &mut vec![0; shape.len()], &mut Vec::new(), &mut out);
    out
}

/// Content (column minus row) of every entry.
fn contents(t: &Tableau) -> Vec<i64> {
    let mut lens = [0i64; 16];
    t.iter()
        .map(|&r| {
            let col = lens[r as usize];
            lens[r as usize] += 1;
            col - r as i64
        })
        .collect()
}

/// Sparse rows of `ρ(s_i)`: for each basis tableau, the (column, coefficient) pairs.
struct Generator {
    rows: Vec<Vec<(usize, f64)>>,
}

impl Generator {
    /// `ρ(s_i) · m`.
    fn apply_left(&self, m: &[f64], d: usize) -> Vec<f64> {
        let mut out = vec![0.0; d * d];
        for (r, entries) in self.rows.iter().enumerate() {
            for &(c, coeff) in entries {
                for j in 0..d {
                    out[r * d + j] += coeff * m[c * d + j];
                }
            }
        }
        out
    }
}

fn generators(tableaux: &[Tableau], n: usize) -> Vec<Generator> {
    let index: HashMap<&Tableau, usize> = tableaux.iter().enumerate().map(|(i, t)| (t, i)).collect();
    let all_contents: Vec<Vec<i64>> = tableaux.iter().map(contents).collect();
    (0..n.saturating_sub(1))
        .map(|i| {
            let rows = tableaux
                .iter()
                .enumerate()
                .map(|(ti, t)| {
                    let c = &all_contents[ti];
                    let r = (c[i + 1] - c[i]) as f64;
                    let mut entries = vec![(ti, 1.0 / r)];
                    if r.abs() != 1.0 {
                        let mut swapped = t.clone();
                        swapped.swap(i, i + 1);
                        let tj = index[&swapped];
                        entries.push((tj, (1.0 - 1.0 / (r * r)).sqrt()));
                    }
                    entries
                })
                .collect();
            Generator { rows }
        })
        .collect()
}

/// Matrices `ρ_λ(g)` for every element of `S_n`, in element-index order.
pub(crate) fn orthogonal_form(group: &Group, shape: &[usize]) -> Vec<CMat> {
    let n = shape.iter().sum::<usize>();
    let tableaux = standard_tableaux(shape);
    let d = tableaux.len();
    let gens = generators(&tableaux, n);
    let mut identity = vec![0.0; d * d];
    for i in 0..d {
        identity[i * d + i] = 1.0;
    }
    group
        .elements()
        .map(|g| {
            // Bubble-sorting the one-line notation of g right-multiplies by
            // adjacent transpositions s_{j1}, s_{j2}, ... until the identity
            // is reached, so g = ... s_{j2} s_{j1}.
            let mut a = group.perm(g).expect("symmetric group").images().to_vec();
            let mut m = identity.clone();
            loop {
                let mut swapped = false;
                for j in 0..n.saturating_sub(1) {
                    if a[j] > a[j + 1] {
                        a.swap(j, j + 1);
                        m = gens[j].apply_left(&m, d);
                        swapped = true;
                    }
                }
                if !swapped {
                    break;
                }
            }
            CMat::from_vec(d, d, m.into_iter().map(|x| C64::new(x, 0.0)).collect())
        })
        .collect()
}

/// Hook-length formula for the number of standard tableaux of a shape.
pub fn hook_length_dimension(shape: &[usize]) -> u128 {
    let n: usize = shape.iter().sum();
    let mut hooks: u128 = 1;
    for (r, &len) in shape.iter().enumerate() {
        for c in 0..len {
            let arm = len - c - 1;
            let leg = shape[r + 1..].iter().filter(|&&l| l > c).count();
            hooks *= (arm + leg + 1) as u128;
        }
    }
    (1..=n as u128).product::<u128>() / hooks
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::partitions;

    #[test]
    fn tableau_counts_match_hook_lengths() {
        for n in 1..=7 {
            for shape in partitions(n) {
                assert_eq!(standard_tableaux(&shape).len() as u128, hook_length_dimension(&shape));
            }
        }
        assert_eq!(hook_length_dimension(&[2, 1]), 2);
        assert_eq!(hook_length_dimension(&[3, 2, 1]), 16);
    }

    #[test]
    fn orthogonal_and_homomorphic_up_to_s5() {
        for n in 1..=5 {
            let g = Group::symmetric(n).unwrap();
            for shape in partitions(n) {
                let mats = orthogonal_form(&g, &shape);
                let d = mats[0].rows();
                for m in &mats {
                    assert!(m.matmul(&m.transpose()).max_abs_diff(&CMat::identity(d)) < 1e-12);
                }
                for a in g.elements() {
                    for b in g.elements() {
                        let lhs = &mats[g.mul(a, b)];
                        let rhs = mats[a].matmul(&mats[b]);
                        assert!(lhs.max_abs_diff(&rhs) < 1e-12, "n={n} shape={shape:?}");
                    }
                }
            }
        }
    }
}
