//! Random graphs and trees, edge weights, and neighbourhood balls.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{domain, Error, Result};
use crate::genfn::OffspringLaw;
use crate::graph::{Root, WeightedGraph};
use crate::rng::RngSeed;

/// Edge weight law omega.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightLaw {
    Uniform { a: f64, b: f64 },
    Exponential { rate: f64 },
    Constant { v: f64 },
}

impl WeightLaw {
    pub fn uniform(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(domain(format!("uniform needs a < b, got ({a}, {b})")));
        }
        Ok(Self::Uniform { a, b })
    }

    pub fn exponential(rate: f64) -> Result<Self> {
        if !(rate.is_finite() && rate > 0.0) {
            return Err(domain(format!("exponential rate must be positive, got {rate}")));
        }
        Ok(Self::Exponential { rate })
    }

    pub fn constant(v: f64) -> Result<Self> {
        if !v.is_finite() {
            return Err(domain("constant weight must be finite"));
        }
        Ok(Self::Constant { v })
    }

    pub fn is_atomless(&self) -> bool {
        !matches!(self, Self::Constant { .. })
    }

    /// Closed support interval; the upper end may be infinite.
    pub fn support(&self) -> (f64, f64) {
        match *self {
            Self::Uniform { a, b } => (a, b),
            Self::Exponential { .. } => (0.0, f64::INFINITY),
            Self::Constant { v } => (v, v),
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            Self::Uniform { a, b } => 0.5 * (a + b),
            Self::Exponential { rate } => 1.0 / rate,
            Self::Constant { v } => v,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            Self::Uniform { a, b } => a + (b - a) * rng.random::<f64>(),
            Self::Exponential { rate } => -(1.0 - rng.random::<f64>()).ln() / rate,
            Self::Constant { v } => v,
        }
    }

    /// P(W >= x).
    pub fn survival(&self, x: f64) -> f64 {
        match *self {
            Self::Uniform { a, b } => ((b - x) / (b - a)).clamp(0.0, 1.0),
            Self::Exponential { rate } => {
                if x <= 0.0 {
                    1.0
                } else {
                    (-rate * x).exp()
                }
            }
            Self::Constant { v } => f64::from(x <= v),
        }
    }

    /// Integral of the survival function over [0, x] (signed for x < 0).
    pub fn integrated_survival(&self, x: f64) -> f64 {
        match *self {
            Self::Uniform { a, b } => {
                if x <= a {
                    x
                } else if x >= b {
                    0.5 * (a + b)
                } else {
                    a + ((b - a) * (b - a) - (b - x) * (b - x)) / (2.0 * (b - a))
                }
            }
            Self::Exponential { rate } => {
                if x <= 0.0 {
                    x
                } else {
                    -(-rate * x).exp_m1() / rate
                }
            }
            Self::Constant { v } => x.min(v),
        }
    }
}

impl fmt::Display for WeightLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Uniform { a, b } => write!(f, "uniform:{a}:{b}"),
            Self::Exponential { rate } => write!(f, "exp:{rate}"),
            Self::Constant { v } => write!(f, "const:{v}"),
        }
    }
}

impl FromStr for WeightLaw {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse { what: "weight law", detail: format!("{s:?}") };
        let parts: Vec<&str> = s.split(':').map(str::trim).collect();
        let num = |t: &str| t.parse::<f64>().map_err(|_| bad());
        match parts.as_slice() {
            ["uniform"] => Self::uniform(0.0, 1.0),
            ["uniform", a, b] => Self::uniform(num(a)?, num(b)?),
            ["exp"] => Self::exponential(1.0),
            ["exp", r] => Self::exponential(num(r)?),
            ["const", v] => Self::constant(num(v)?),
            _ => Err(bad()),
        }
    }
}

/// G(n, c/n) with a uniform random root vertex and unit weights.
pub fn erdos_renyi(n: usize, c: f64, seed: RngSeed) -> Result<WeightedGraph> {
    if n == 0 {
        return Err(domain("n must be at least 1"));
    }
    let mut rng = seed.rng();
    if n == 1 {
        return WeightedGraph::new(1, [], Root::Vertex(0));
    }
    if !(c > 0.0 && c < n as f64) {
        return Err(domain(format!("need 0 < c < n, got c={c}")));
    }
    let p = c / n as f64;
    let log_q = (1.0 - p).ln();
    // geometric skipping over the pairs (w < v) in lexicographic order
    let mut edges = Vec::new();
    let (mut v, mut w): (usize, i64) = (1, -1);
    while v < n {
        let r: f64 = rng.random();
        w += 1 + ((1.0 - r).ln() / log_q).floor() as i64;
        while w >= v as i64 && v < n {
            w -= v as i64;
            v += 1;
        }
        if v < n {
            edges.push((w as usize, v, 1.0));
        }
    }
    let root = rng.random_range(0..n);
    WeightedGraph::new(n, edges, Root::Vertex(root))
}

/// Uniform pairing of half-edges, with loops and repeated edges erased.
/// An odd degree sum is fixed by adding one half-edge to the last vertex.
pub fn configuration_model(degrees: &[usize], seed: RngSeed) -> Result<WeightedGraph> {
    let n = degrees.len();
    if n == 0 {
        return Err(domain("need at least one vertex"));
    }
    let mut rng = seed.rng();
    let mut stubs: Vec<usize> = degrees.iter().enumerate().flat_map(|(v, &d)| std::iter::repeat_n(v, d)).collect();
    if stubs.len() % 2 == 1 {
        stubs.push(n - 1);
    }
    stubs.shuffle(&mut rng);
    let pairs = stubs.chunks_exact(2).map(|p| (p[0], p[1], 1.0));
    let root = rng.random_range(0..n);
    WeightedGraph::simplified(n, pairs.collect::<Vec<_>>(), Root::Vertex(root))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rooting {
    Vertex,
    Edge,
}

/// Unimodular Galton-Watson tree truncated at distance `depth` from the root
/// (vertex or edge). Vertices are numbered in BFS order; the vertices at
/// distance exactly `depth` form the boundary.
pub fn ubgw_tree(law: &OffspringLaw, rooting: Rooting, depth: usize, seed: RngSeed) -> Result<WeightedGraph> {
    let mut rng = seed.rng();
    let root_sampler = law.sampler();
    let child_sampler = law.size_biased_sampler();
    let mut edges = Vec::new();
    let mut level: Vec<usize>;
    let mut n;
    let root = match rooting {
        Rooting::Vertex => {
            level = vec![0];
            n = 1;
            Root::Vertex(0)
        }
        Rooting::Edge => {
            level = vec![0, 1];
            n = 2;
            edges.push((0, 1, 1.0));
            Root::Edge(0, 1)
        }
    };
    for d in 0..depth {
        let mut next = Vec::new();
        for &v in &level {
            let kids = if d == 0 && rooting == Rooting::Vertex {
                root_sampler.sample(&mut rng)
            } else {
                child_sampler.sample(&mut rng)
            };
            for _ in 0..kids {
                edges.push((v, n, 1.0));
                next.push(n);
                n += 1;
            }
        }
        level = next;
    }
    WeightedGraph::new(n, edges, root)?.with_boundary(level)
}

/// I.i.d. weights drawn in edge-index order.
pub fn assign_weights(g: &WeightedGraph, law: WeightLaw, seed: RngSeed) -> WeightedGraph {
    let mut rng = seed.rng();
    let w: Vec<f64> = (0..g.m()).map(|_| law.sample(&mut rng)).collect();
    g.clone().with_weights(&w).expect("one finite weight per edge")
}

/// Ball B_H(g, center) together with the original id of every ball vertex.
pub fn ball_with_map(g: &WeightedGraph, center: usize, h: usize) -> Result<(WeightedGraph, Vec<usize>)> {
    if center >= g.n() {
        return Err(domain(format!("center {center} not in graph")));
    }
    let mut order = vec![center];
    let mut dist = BTreeMap::from([(center, 0usize)]);
    let mut queue = VecDeque::from([center]);
    while let Some(x) = queue.pop_front() {
        let dx = dist[&x];
        if dx == h {
            continue;
        }
        for &(y, _) in g.neighbors(x) {
            if let std::collections::btree_map::Entry::Vacant(e) = dist.entry(y) {
                e.insert(dx + 1);
                order.push(y);
                queue.push_back(y);
            }
        }
    }
    let new_id: BTreeMap<usize, usize> = order.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let mut edges = Vec::new();
    for (i, &v) in order.iter().enumerate() {
        for &(y, e) in g.neighbors(v) {
            if let Some(&j) = new_id.get(&y) {
                if i < j {
                    edges.push((i, j, g.edge(e).w));
                }
            }
        }
    }
    let boundary = order.iter().enumerate().filter(|(_, v)| dist[v] == h).map(|(i, _)| i).collect();
    let ball = WeightedGraph::new(order.len(), edges, Root::Vertex(0))?.with_boundary(boundary)?;
    Ok((ball, order))
}

/// Ball B_H(g, center), rerooted at the center (new id 0).
pub fn ball(g: &WeightedGraph, center: usize, h: usize) -> Result<WeightedGraph> {
    ball_with_map(g, center, h).map(|(b, _)| b)
}

/// Whether the rooted H-balls around c1 in g1 and c2 in g2 are isomorphic.
pub fn ball_isomorphic(
    g1: &WeightedGraph,
    c1: usize,
    g2: &WeightedGraph,
    c2: usize,
    h: usize,
    compare_weights: bool,
    weight_tol: f64,
) -> Result<bool> {
    let b1 = ball(g1, c1, h)?;
    let b2 = ball(g2, c2, h)?;
    if b1.n() != b2.n() || b1.m() != b2.m() {
        return Ok(false);
    }
    if !compare_weights && b1.is_forest() && b2.is_forest() {
        return Ok(tree_code(&b1, 0, usize::MAX) == tree_code(&b2, 0, usize::MAX));
    }
    let d1 = b1.distances(&[0]);
    let d2 = b2.distances(&[0]);
    let mut map = vec![usize::MAX; b1.n()];
    let mut used = vec![false; b2.n()];
    map[0] = 0;
    used[0] = true;
    Ok(extend_iso(&b1, &b2, &d1, &d2, 1, &mut map, &mut used, compare_weights, weight_tol))
}

fn tree_code(g: &WeightedGraph, v: usize, parent: usize) -> String {
    let mut kids: Vec<String> =
        g.neighbors(v).iter().filter(|&&(y, _)| y != parent).map(|&(y, _)| tree_code(g, y, v)).collect();
    kids.sort_unstable();
    format!("({})", kids.concat())
}

#[allow(clippy::too_many_arguments)]
fn extend_iso(
    b1: &WeightedGraph,
    b2: &WeightedGraph,
    d1: &[usize],
    d2: &[usize],
    next: usize,
    map: &mut [usize],
    used: &mut [bool],
    weights: bool,
    tol: f64,
) -> bool {
    if next == b1.n() {
        return true;
    }
    for cand in 0..b2.n() {
        if used[cand] || d2[cand] != d1[next] || b2.degree(cand) != b1.degree(next) {
            continue;
        }
        let consistent = b1.neighbors(next).iter().filter(|&&(y, _)| map[y] != usize::MAX).all(|&(y, e)| {
            match b2.edge_between(cand, map[y]) {
                Some(f) => !weights || (b1.edge(e).w - b2.edge(f).w).abs() <= tol,
                None => false,
            }
        });
        // mapped vertices adjacent to cand must be neighbours of next as well
        let reverse = b2.neighbors(cand).iter().filter(|&&(z, _)| used[z]).count()
            == b1.neighbors(next).iter().filter(|&&(y, _)| map[y] != usize::MAX).count();
        if consistent && reverse {
            map[next] = cand;
            used[cand] = true;
            if extend_iso(b1, b2, d1, d2, next + 1, map, used, weights, tol) {
                return true;
            }
            map[next] = usize::MAX;
            used[cand] = false;
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(weights: &[f64]) -> WeightedGraph {
        let edges = weights.iter().enumerate().map(|(i, &w)| (i, i + 1, w));
        WeightedGraph::new(weights.len() + 1, edges.collect::<Vec<_>>(), Root::Vertex(0)).unwrap()
    }

    #[test]
    fn weight_law_parsing() {
        assert_eq!("uniform:0:1".parse::<WeightLaw>().unwrap(), WeightLaw::Uniform { a: 0.0, b: 1.0 });
        assert_eq!("exp:2".parse::<WeightLaw>().unwrap(), WeightLaw::Exponential { rate: 2.0 });
        assert!("uniform:1:0".parse::<WeightLaw>().is_err());
    }

    #[test]
    fn integrated_survival_matches_quadrature() {
        for law in [WeightLaw::Uniform { a: 0.2, b: 1.5 }, WeightLaw::Exponential { rate: 1.7 }] {
            for x in [-0.5, 0.1, 0.7, 1.2, 3.0] {
                let n = 200_000;
                let (lo, hi) = if x < 0.0 { (x, 0.0) } else { (0.0, x) };
                let h = (hi - lo) / n as f64;
                let s: f64 = (0..n).map(|i| law.survival(lo + (i as f64 + 0.5) * h)).sum::<f64>() * h;
                let s = if x < 0.0 { -s } else { s };
                assert!((s - law.integrated_survival(x)).abs() < 1e-8, "{law} {x}");
            }
        }
    }

    #[test]
    fn ball_examples() {
        let g = path(&[1.0, 2.0]);
        let b = ball(&g, 1, 1).unwrap();
        assert_eq!((b.n(), b.m()), (3, 2));
        assert_eq!(b.boundary(), &[1, 2]);
        let b0 = ball(&g, 1, 0).unwrap();
        assert_eq!((b0.n(), b0.m()), (1, 0));
    }

    #[test]
    fn isomorphism_examples() {
        let e = path(&[1.0]);
        let p2 = path(&[1.0, 1.0]);
        assert!(ball_isomorphic(&e, 0, &p2, 0, 1, false, 0.0).unwrap());
        let star = WeightedGraph::new(4, [(0, 1, 1.0), (0, 2, 1.0), (0, 3, 1.0)], Root::Vertex(0)).unwrap();
        let p3 = path(&[1.0, 1.0, 1.0]);
        assert!(!ball_isomorphic(&star, 0, &p3, 1, 1, false, 0.0).unwrap());
        assert!(ball_isomorphic(&p3, 1, &p3, 2, 2, false, 0.0).unwrap());
        let p4 = path(&[1.0, 1.0, 1.0, 1.0]);
        assert!(ball_isomorphic(&p4, 1, &p4, 2, 1, false, 0.0).unwrap());
        assert!(!ball_isomorphic(&p4, 1, &p4, 2, 2, false, 0.0).unwrap());
        let tri = WeightedGraph::new(3, [(0, 1, 1.0), (1, 2, 2.0), (0, 2, 3.0)], Root::Vertex(0)).unwrap();
        assert!(ball_isomorphic(&tri, 0, &tri, 1, 1, false, 0.0).unwrap());
        assert!(!ball_isomorphic(&tri, 0, &tri, 1, 1, true, 1e-9).unwrap());
        assert!(ball_isomorphic(&tri, 0, &tri, 0, 1, true, 1e-9).unwrap());
    }

    #[test]
    fn deterministic_two_children_edge_tree() {
        // pi = delta_3: every non-root vertex has exactly two children
        let law = OffspringLaw::finite(vec![0.0, 0.0, 0.0, 1.0]).unwrap();
        let t = ubgw_tree(&law, Rooting::Edge, 2, RngSeed::new(1, 0)).unwrap();
        assert_eq!(t.n(), 14);
        assert_eq!(t.boundary().len(), 8);
        let law2 = OffspringLaw::finite(vec![0.0, 0.0, 1.0]).unwrap();
        let t2 = ubgw_tree(&law2, Rooting::Edge, 2, RngSeed::new(1, 0)).unwrap();
        assert_eq!(t2.n(), 6);
    }
}
