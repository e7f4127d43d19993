//! Graph isomorphism as a hidden shift over `S_n`.
//!
//! For rigid graphs `C₀, C₁` the functions `f_i(g) = g(C_i)` are injective,
//! and `f₀(g) = f₁(g·s)` for all `g` exactly when `C₀ = s(C₁)`; otherwise
//! their images are disjoint. Graphs may carry vertex colors, which move
//! with their vertices; colored graphs are rigid at sizes where plain ones
//! cannot be.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::group::{Group, Perm};
use crate::linalg::{CMat, C64};
use crate::shift::{ShiftState, StateForm, Variant, DENSE_DIM_LIMIT};

/// Largest vertex count for automorphism and oracle searches.
pub const MAX_SEARCH_VERTICES: usize = 8;

/// A simple undirected graph on vertices `0..n`, optionally vertex-colored.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Graph {
    n: usize,
    edges: BTreeSet<(usize, usize)>,
    colors: Option<Vec<u32>>,
}

impl Graph {
    /// Edges are 0-based pairs in either orientation.
    pub fn new(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut set = BTreeSet::new();
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::domain(format!("edge ({u}, {v}) leaves the vertex range 0..{n}")));
            }
            if u == v {
                return Err(Error::domain(format!("self-loop at vertex {u}")));
            }
            if !set.insert((u.min(v), u.max(v))) {
                return Err(Error::domain(format!("duplicate edge ({u}, {v})")));
            }
        }
        Ok(Graph {
            n,
            edges: set,
            colors: None,
        })
    }

    pub fn with_colors(mut self, colors: Vec<u32>) -> Result<Self> {
        if colors.len() != self.n {
            return Err(Error::domain("need one color per vertex"));
        }
        self.colors = Some(colors);
        Ok(self)
    }

    /// Graph on `n` vertices whose edges are the set bits of `mask`, in the
    /// order `(0,1), (0,2), …, (n−2,n−1)`.
    pub fn from_mask(n: usize, mask: u64) -> Self {
        let mut edges = BTreeSet::new();
        let mut bit = 0;
        for u in 0..n {
            for v in u + 1..n {
                if mask >> bit & 1 == 1 {
                    edges.insert((u, v));
                }
                bit += 1;
            }
        }
        Graph { n, edges, colors: None }
    }

    pub fn vertices(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn colors(&self) -> Option<&[u32]> {
        self.colors.as_deref()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.edges.contains(&(u.min(v), u.max(v)))
    }

    /// Canonical bytes: `n`, edge count, sorted edges, then an optional
    /// color list, all as little-endian `u32`.
    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(8 + 8 * self.edges.len());
        let mut put = |x: usize| out.extend_from_slice(&(x as u32).to_le_bytes());
        put(self.n);
        put(self.edges.len());
        for &(u, v) in &self.edges {
            put(u);
            put(v);
        }
        if let Some(c) = &self.colors {
            out.push(1);
            for &x in c {
                out.extend_from_slice(&x.to_le_bytes());
            }
        } else {
            out.push(0);
        }
        out
    }

    /// Inline form `n:u-v,u-v` with an optional `:c1,c2,…` color suffix,
    /// vertices 1-based.
    pub fn parse_inline(s: &str) -> Result<Self> {
        let mut parts = s.trim().split(':');
        let n = parse_count(parts.next().unwrap_or(""))?;
        let mut edges = Vec::new();
        if let Some(list) = parts.next() {
            for item in list.split(',').map(str::trim).filter(|t| !t.is_empty()) {
                let (u, v) = item
                    .split_once('-')
                    .ok_or_else(|| Error::parse(format!("edge '{item}' is not of the form u-v")))?;
                edges.push((parse_vertex(u, n)?, parse_vertex(v, n)?));
            }
        }
        let g = Graph::new(n, &edges)?;
        match parts.next() {
            Some(c) => g.with_colors(parse_colors(c.split(','))?),
            None => Ok(g),
        }
    }
}

fn parse_count(s: &str) -> Result<usize> {
    s.trim()
        .parse()
        .map_err(|_| Error::parse(format!("vertex count '{}' is not a number", s.trim())))
}

fn parse_vertex(s: &str, n: usize) -> Result<usize> {
    let v: usize = s
        .trim()
        .parse()
        .map_err(|_| Error::parse(format!("vertex '{}' is not a number", s.trim())))?;
    if v == 0 || v > n {
        return Err(Error::parse(format!("vertex {v} outside 1..={n}")));
    }
    Ok(v - 1)
}

fn parse_colors<'a>(items: impl Iterator<Item = &'a str>) -> Result<Vec<u32>> {
    items
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse().map_err(|_| Error::parse(format!("color '{t}' is not a number"))))
        .collect()
}

/// Text form: first line `n`, then one `u v` line per edge (1-based), and an
/// optional `colors: c1 … cn` line. Blank lines and `#` comments are ignored.
impl FromStr for Graph {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut lines = s
            .lines()
            .map(|l| l.split('#').next().unwrap_or("").trim())
            .filter(|l| !l.is_empty());
        let n = parse_count(lines.next().ok_or_else(|| Error::parse("empty graph description"))?)?;
        let mut edges = Vec::new();
        let mut colors = None;
        for line in lines {
            if let Some(rest) = line.strip_prefix("colors:") {
                if colors.is_some() {
                    return Err(Error::parse("more than one colors line"));
                }
                colors = Some(parse_colors(rest.split_whitespace())?);
                continue;
            }
            let mut it = line.split_whitespace();
            match (it.next(), it.next(), it.next()) {
                (Some(u), Some(v), None) => edges.push((parse_vertex(u, n)?, parse_vertex(v, n)?)),
                _ => return Err(Error::parse(format!("expected 'u v', found '{line}'"))),
            }
        }
        let g = Graph::new(n, &edges)?;
        match colors {
            Some(c) => g.with_colors(c),
            None => Ok(g),
        }
    }
}

impl fmt::Display for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.n)?;
        for &(u, v) in &self.edges {
            writeln!(f, "{} {}", u + 1, v + 1)?;
        }
        if let Some(c) = &self.colors {
            let list: Vec<String> = c.iter().map(|x| x.to_string()).collect();
            writeln!(f, "colors: {}", list.join(" "))?;
        }
        Ok(())
    }
}

/// `g(A)`: edge `{u, v}` becomes `{g(u), g(v)}` and vertex `v`'s color moves to `g(v)`.
pub fn graph_act(g: &Perm, a: &Graph) -> Result<Graph> {
    if g.degree() != a.n {
        return Err(Error::domain(format!(
            "permutation of degree {} cannot act on {} vertices",
            g.degree(),
            a.n
        )));
    }
    let edges = a
        .edges
        .iter()
        .map(|&(u, v)| {
            let (x, y) = (g.apply(u), g.apply(v));
            (x.min(y), x.max(y))
        })
        .collect();
    let colors = a.colors.as_ref().map(|c| {
        let mut out = vec![0; a.n];
        for (v, &col) in c.iter().enumerate() {
            out[g.apply(v)] = col;
        }
        out
    });
    Ok(Graph { n: a.n, edges, colors })
}

fn search_guard(a: &Graph) -> Result<()> {
    if a.n > MAX_SEARCH_VERTICES {
        return Err(Error::capacity(format!(
            "brute-force search is limited to {MAX_SEARCH_VERTICES} vertices"
        )));
    }
    Ok(())
}

/// Element indices of `S_n` that fix `a`, in increasing order.
pub fn automorphisms(a: &Graph) -> Result<Vec<usize>> {
    search_guard(a)?;
    automorphisms_in(&Group::symmetric(a.n.max(1))?, a)
}

fn automorphisms_in(group: &Group, a: &Graph) -> Result<Vec<usize>> {
    if a.n == 0 {
        return Ok(vec![group.identity()]);
    }
    // adjacency as a bitmask over ordered pairs u·n + v
    let n = a.n;
    let mut adj = 0u64;
    for &(u, v) in &a.edges {
        adj |= 1 << (u * n + v) | 1 << (v * n + u);
    }
    let mut out = Vec::new();
    for g in group.elements() {
        let p = group.perm(g).expect("symmetric group");
        let edges_fixed = a.edges.iter().all(|&(u, v)| adj >> (p.apply(u) * n + p.apply(v)) & 1 == 1);
        let colors_fixed = a
            .colors
            .as_ref()
            .is_none_or(|c| (0..n).all(|v| c[p.apply(v)] == c[v]));
        if edges_fixed && colors_fixed {
            out.push(g);
        }
    }
    Ok(out)
}

pub fn is_rigid(a: &Graph) -> Result<bool> {
    Ok(automorphisms(a)?.len() == 1)
}

/// Tables of `f₀(g)` and `f₁(g)` over every `g ∈ S_n`.
#[derive(Clone, Debug)]
pub struct ShiftOraclePair {
    pub group: Group,
    pub f0: Vec<Vec<u8>>,
    pub f1: Vec<Vec<u8>>,
}

impl ShiftOraclePair {
    /// A pair given directly by its tables, without any promise checks.
    pub fn from_tables(group: Group, f0: Vec<Vec<u8>>, f1: Vec<Vec<u8>>) -> Result<Self> {
        if f0.len() != group.order() || f1.len() != group.order() {
            return Err(Error::domain("oracle tables must cover the group"));
        }
        Ok(ShiftOraclePair { group, f0, f1 })
    }

    pub fn is_injective(&self) -> bool {
        let distinct = |f: &[Vec<u8>]| f.iter().collect::<HashSet<_>>().len() == f.len();
        distinct(&self.f0) && distinct(&self.f1)
    }

    pub fn images_disjoint(&self) -> bool {
        let left: HashSet<&Vec<u8>> = self.f0.iter().collect();
        !self.f1.iter().any(|y| left.contains(y))
    }
}

fn one_line(p: &Perm) -> String {
    p.to_string()
}

/// `f_i(g) = g(C_i)` for rigid `C₀ = a`, `C₁ = b`. Non-rigid inputs are
/// rejected with one of their nontrivial automorphisms.
pub fn make_shift_oracles(a: &Graph, b: &Graph) -> Result<ShiftOraclePair> {
    if a.n != b.n {
        return Err(Error::domain("graphs have different vertex counts"));
    }
    if a.colors.is_some() != b.colors.is_some() {
        return Err(Error::domain("either both graphs are colored or neither is"));
    }
    let group = Group::symmetric(a.n.max(1))?;
    for (name, g) in [("first", a), ("second", b)] {
        let auts = automorphisms(g)?;
        if let Some(&aut) = auts.iter().find(|&&x| x != group.identity()) {
            return Err(Error::domain(format!(
                "{name} graph is not rigid: {} is a nontrivial automorphism",
                one_line(group.perm(aut).expect("symmetric group"))
            )));
        }
    }
    let table = |c: &Graph| -> Result<Vec<Vec<u8>>> {
        group
            .elements()
            .map(|g| Ok(graph_act(group.perm(g).expect("symmetric group"), c)?.encode()))
            .collect()
    };
    let pair = ShiftOraclePair {
        f0: table(a)?,
        f1: table(b)?,
        group,
    };
    if !pair.is_injective() {
        return Err(Error::consistency("oracle of a rigid graph is not injective"));
    }
    Ok(pair)
}

/// The lowest-index `s` with `f₀(g) = f₁(g·s)` for every `g`, or `None` when
/// the images are disjoint. Images that overlap without such an `s` violate
/// the promise and give a consistency error.
pub fn find_shift_bruteforce(pair: &ShiftOraclePair) -> Result<Option<usize>> {
    let group = &pair.group;
    let mut positions: HashMap<&Vec<u8>, Vec<usize>> = HashMap::new();
    for (h, y) in pair.f1.iter().enumerate() {
        positions.entry(y).or_default().push(h);
    }
    // f₀(e) = f₁(s) pins the candidates
    if let Some(candidates) = positions.get(&pair.f0[group.identity()]) {
        for &s in candidates {
            if group.elements().all(|g| pair.f0[g] == pair.f1[group.mul(g, s)]) {
                return Ok(Some(s));
            }
        }
    }
    if pair.images_disjoint() {
        Ok(None)
    } else {
        Err(Error::consistency(
            "promise violated: the oracle images overlap but no shift relates them",
        ))
    }
}

/// Runs the standard procedure on each of `k` copies: superpose over
/// `(x, g)`, evaluate `f_x(g)` into a third register and measure it. The
/// result is the average post-measurement state, built only from the oracle
/// tables. A shifted pair gives `γ₁(s)^{⊗k}`; disjoint images give the
/// maximally mixed state.
pub fn states_from_oracles(pair: &ShiftOraclePair, k: usize) -> Result<ShiftState> {
    let n = pair.group.order();
    if k == 0 {
        return Err(Error::domain("need at least one copy"));
    }
    if !(2 * n).checked_pow(k as u32).is_some_and(|d| d <= DENSE_DIM_LIMIT) {
        return Err(Error::capacity(format!("dense oracle state of dimension (2·{n})^{k} is too large")));
    }
    // group the basis states |x, g⟩ by oracle value
    let mut classes: Vec<(&Vec<u8>, Vec<usize>)> = Vec::new();
    let mut index: HashMap<&Vec<u8>, usize> = HashMap::new();
    for (x, table) in [&pair.f0, &pair.f1].into_iter().enumerate() {
        for (g, y) in table.iter().enumerate() {
            let slot = *index.entry(y).or_insert_with(|| {
                classes.push((y, Vec::new()));
                classes.len() - 1
            });
            classes[slot].1.push(x * n + g);
        }
    }
    let weight = 1.0 / (2 * n) as f64;
    let mut single = CMat::zeros(2 * n, 2 * n);
    for (_, members) in &classes {
        for &i in members {
            for &j in members {
                single[(i, j)] += C64::new(weight, 0.0);
            }
        }
    }
    Ok(ShiftState {
        group: pair.group.clone(),
        k,
        variant: Variant::Oracle,
        form: StateForm::Dense(single.kron_power(k)),
    })
}

/// Independent isomorphism test by backtracking over vertex maps with degree
/// and color pruning. Returns `σ` (as images of `0..n`) with `σ(a) = b`.
pub fn find_isomorphism(a: &Graph, b: &Graph) -> Option<Vec<usize>> {
    if a.n != b.n || a.edges.len() != b.edges.len() || a.colors.is_some() != b.colors.is_some() {
        return None;
    }
    let n = a.n;
    let adj = |g: &Graph| {
        let mut m = vec![vec![false; n]; n];
        for &(u, v) in &g.edges {
            m[u][v] = true;
            m[v][u] = true;
        }
        m
    };
    let (am, bm) = (adj(a), adj(b));
    let deg = |m: &Vec<Vec<bool>>, v: usize| m[v].iter().filter(|&&e| e).count();
    let color = |g: &Graph, v: usize| g.colors.as_ref().map_or(0, |c| c[v]);

    fn extend(
        v: usize,
        map: &mut Vec<usize>,
        used: &mut Vec<bool>,
        ok: &dyn Fn(usize, usize, &[usize]) -> bool,
        n: usize,
    ) -> bool {
        if v == n {
            return true;
        }
        for w in 0..n {
            if !used[w] && ok(v, w, map) {
                map.push(w);
                used[w] = true;
                if extend(v + 1, map, used, ok, n) {
                    return true;
                }
                used[w] = false;
                map.pop();
            }
        }
        false
    }
    let ok = |v: usize, w: usize, map: &[usize]| {
        deg(&am, v) == deg(&bm, w)
            && color(a, v) == color(b, w)
            && map.iter().enumerate().all(|(u, &x)| am[u][v] == bm[x][w])
    };
    let mut map = Vec::with_capacity(n);
    let mut used = vec![false; n];
    extend(0, &mut map, &mut used, &ok, n).then_some(map)
}

/// Rigid graphs on six vertices, one per isomorphism class, each the
/// lowest-mask labeling of its class.
pub fn rigid_six_vertex_classes() -> Vec<Graph> {
    let s6 = Group::symmetric(6).expect("S6 is supported");
    let mut reps: Vec<Graph> = Vec::new();
    for mask in 0..1u64 << 15 {
        let g = Graph::from_mask(6, mask);
        let rigid = automorphisms_in(&s6, &g).is_ok_and(|a| a.len() == 1);
        if rigid && !reps.iter().any(|r| find_isomorphism(r, &g).is_some()) {
            reps.push(g);
        }
    }
    reps
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shift::gamma1_dense;

    fn p(images: &[usize]) -> Perm {
        Perm::from_one_line(images).unwrap()
    }

    fn path3() -> Graph {
        Graph::new(3, &[(0, 1), (1, 2)]).unwrap()
    }

    #[test]
    fn acting_on_graphs() {
        let g = path3();
        assert_eq!(graph_act(&Perm::identity(3), &g).unwrap().encode(), g.encode());
        let moved = graph_act(&p(&[2, 1, 3]), &g).unwrap();
        assert_eq!(moved.edges().collect::<Vec<_>>(), vec![(0, 1), (0, 2)]);
        assert!(graph_act(&Perm::identity(4), &g).is_err());

        let s4 = Group::symmetric(4).unwrap();
        for mask in (0..64u64).step_by(3).take(20) {
            let a = Graph::from_mask(4, mask);
            for x in s4.elements() {
                for y in s4.elements() {
                    let (px, py) = (s4.perm(x).unwrap(), s4.perm(y).unwrap());
                    let lhs = graph_act(&px.compose(py), &a).unwrap();
                    let rhs = graph_act(px, &graph_act(py, &a).unwrap()).unwrap();
                    assert_eq!(lhs, rhs);
                }
            }
        }
    }

    #[test]
    fn validation_and_formats() {
        assert!(Graph::new(3, &[(0, 0)]).is_err());
        assert!(Graph::new(3, &[(0, 1), (1, 0)]).is_err());
        assert!(Graph::new(3, &[(0, 3)]).is_err());
        let text = "# a path\n3\n1 2\n2 3\ncolors: 1 2 1\n";
        let g: Graph = text.parse().unwrap();
        assert_eq!(g.colors(), Some(&[1, 2, 1][..]));
        assert_eq!(g.to_string().parse::<Graph>().unwrap(), g);
        assert_eq!(Graph::parse_inline("3:1-2,2-3:1,2,1").unwrap(), g);
        assert_eq!(Graph::parse_inline("3:1-2, 2-3").unwrap(), path3());
        assert!("3\n1 4\n".parse::<Graph>().is_err());
        assert!("3\n1 2 3\n".parse::<Graph>().is_err());
        assert!(matches!("x".parse::<Graph>(), Err(Error::Parse(_))));
        // encoding is a function of the labeled graph only
        let a = Graph::new(3, &[(1, 2), (0, 1)]).unwrap();
        assert_eq!(a.encode(), path3().encode());
        assert_ne!(a.encode(), g.encode());
    }

    #[test]
    fn rigidity() {
        assert!(is_rigid(&Graph::new(1, &[]).unwrap()).unwrap());
        assert!(!is_rigid(&Graph::new(2, &[(0, 1)]).unwrap()).unwrap());
        for n in 2..=5 {
            let group = Group::symmetric(n).unwrap();
            let pairs = n * (n - 1) / 2;
            for mask in 0..1u64 << pairs {
                let auts = automorphisms_in(&group, &Graph::from_mask(n, mask)).unwrap();
                assert!(auts.len() > 1, "n={n} mask={mask}");
            }
        }
        let s6 = Group::symmetric(6).unwrap();
        let six = (0..1u64 << 15).find(|&m| automorphisms_in(&s6, &Graph::from_mask(6, m)).unwrap().len() == 1);
        assert!(six.is_some());
        // a colored path on three vertices is rigid
        let colored = path3().with_colors(vec![0, 0, 1]).unwrap();
        assert!(is_rigid(&colored).unwrap());
        assert!(automorphisms(&Graph::new(9, &[]).unwrap()).is_err());
    }

    #[test]
    fn six_vertex_classes() {
        let reps = rigid_six_vertex_classes();
        assert_eq!(reps.len(), 8);
        for (i, a) in reps.iter().enumerate() {
            for (j, b) in reps.iter().enumerate() {
                assert_eq!(find_isomorphism(a, b).is_some(), i == j);
            }
        }
    }

    #[test]
    fn oracles_and_shifts() {
        let reps = rigid_six_vertex_classes();
        let a = &reps[0];
        let s6 = Group::symmetric(6).unwrap();
        let same = make_shift_oracles(a, a).unwrap();
        assert_eq!(find_shift_bruteforce(&same).unwrap(), Some(s6.identity()));

        let sigma = p(&[3, 5, 1, 6, 2, 4]);
        let b = graph_act(&sigma, a).unwrap();
        let pair = make_shift_oracles(a, &b).unwrap();
        assert!(pair.is_injective());
        let s = find_shift_bruteforce(&pair).unwrap().unwrap();
        for g in s6.elements() {
            assert_eq!(pair.f0[g], pair.f1[s6.mul(g, s)]);
        }
        // s(b) = a, so s∘σ is an automorphism of a, hence the identity
        let ps = s6.perm(s).unwrap();
        assert!(ps.compose(&sigma).is_identity());

        let other = make_shift_oracles(a, &reps[1]).unwrap();
        assert!(other.images_disjoint());
        assert_eq!(find_shift_bruteforce(&other).unwrap(), None);

        let err = make_shift_oracles(&path3(), &path3()).unwrap_err();
        assert!(matches!(&err, Error::Domain(m) if m.contains("(3,2,1)")), "{err}");
    }

    #[test]
    fn promise_violations() {
        let g = Group::symmetric(2).unwrap();
        let f0 = vec![vec![0], vec![1]];
        let f1 = vec![vec![0], vec![2]];
        let pair = ShiftOraclePair::from_tables(g, f0, f1).unwrap();
        assert!(matches!(find_shift_bruteforce(&pair), Err(Error::Consistency(_))));
    }

    #[test]
    fn oracle_states() {
        // colored path on three vertices: rigid, so S3 is enough
        let a = path3().with_colors(vec![0, 0, 1]).unwrap();
        let s3 = Group::symmetric(3).unwrap();
        let sigma = p(&[2, 3, 1]);
        let b = graph_act(&sigma, &a).unwrap();
        let pair = make_shift_oracles(&a, &b).unwrap();
        let s = find_shift_bruteforce(&pair).unwrap().unwrap();
        for k in 1..=2 {
            let st = states_from_oracles(&pair, k).unwrap();
            let direct = gamma1_dense(&s3, s, k).unwrap();
            assert!(st.dense().unwrap().max_abs_diff(direct.dense().unwrap()) <= 1e-12);
            assert!(st.diagnostics().unwrap().is_valid());
        }
        let c = Graph::new(3, &[(0, 1)]).unwrap().with_colors(vec![0, 1, 2]).unwrap();
        let disjoint = make_shift_oracles(&a, &c).unwrap();
        let st = states_from_oracles(&disjoint, 2).unwrap();
        let m = st.dense().unwrap();
        assert!(m.max_abs_diff(&CMat::identity(144).scale(1.0 / 144.0)) <= 1e-15);
        assert!(matches!(states_from_oracles(&disjoint, 4), Err(Error::Capacity(_))));
    }
}
