//! Ground-truth matchings: enumeration, tree dynamic programming, leaf removal.

use std::cmp::Ordering;
use std::fmt::Write as _;

use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::rng::RngSeed;

/// Edge bound for `brute_force_opt` and `max_weight_by_size`.
pub const BRUTE_FORCE_MAX_EDGES: usize = 26;
/// Edge bound for the maximum-matching enumerations.
pub const MAX_MATCHING_MAX_EDGES: usize = 22;
/// Weight differences below this are ties, resolved by edge order.
pub const WEIGHT_TIE: f64 = 1e-12;

/// Vertex-disjoint edge set of a particular graph.
#[derive(Debug, Clone, PartialEq)]
pub struct Matching {
    edge_ids: Vec<usize>,
    pairs: Vec<(usize, usize)>,
    weight: f64,
}

impl Matching {
    pub fn empty() -> Self {
        Self { edge_ids: Vec::new(), pairs: Vec::new(), weight: 0.0 }
    }

    /// Matching from edge indices of `g`.
    pub fn from_edge_ids(g: &WeightedGraph, mut ids: Vec<usize>) -> Result<Self> {
        ids.sort_unstable();
        ids.dedup();
        let mut used = vec![false; g.n()];
        let mut weight = 0.0;
        let mut pairs = Vec::with_capacity(ids.len());
        for &e in &ids {
            if e >= g.m() {
                return Err(Error::InvalidMatching(format!("edge index {e} out of range")));
            }
            let ed = g.edge(e);
            if used[ed.u] || used[ed.v] {
                return Err(Error::InvalidMatching(format!("vertex shared by edge ({},{})", ed.u, ed.v)));
            }
            used[ed.u] = true;
            used[ed.v] = true;
            weight += ed.w;
            pairs.push((ed.u, ed.v));
        }
        Ok(Self { edge_ids: ids, pairs, weight })
    }

    /// Matching from vertex pairs that must be edges of `g`.
    pub fn from_pairs(g: &WeightedGraph, pairs: &[(usize, usize)]) -> Result<Self> {
        let ids = pairs
            .iter()
            .map(|&(a, b)| {
                g.edge_between(a, b).ok_or_else(|| Error::InvalidMatching(format!("({a},{b}) is not an edge")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_edge_ids(g, ids)
    }

    pub fn size(&self) -> usize {
        self.edge_ids.len()
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    /// Sorted edge indices.
    pub fn edge_ids(&self) -> &[usize] {
        &self.edge_ids
    }

    /// Sorted (u, v) pairs with u < v.
    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn contains_edge(&self, e: usize) -> bool {
        self.edge_ids.binary_search(&e).is_ok()
    }

    /// Partner of every vertex, `None` when unmatched.
    pub fn mates(&self, n: usize) -> Vec<Option<usize>> {
        let mut m = vec![None; n];
        for &(a, b) in &self.pairs {
            m[a] = Some(b);
            m[b] = Some(a);
        }
        m
    }

    /// `size=<k> weight=<w>` followed by sorted `u v` lines.
    pub fn to_text(&self) -> String {
        let mut s = format!("size={} weight={:.16e}\n", self.size(), self.weight);
        for (a, b) in &self.pairs {
            let _ = writeln!(s, "{a} {b}");
        }
        s
    }

    pub fn from_text(g: &WeightedGraph, text: &str) -> Result<Self> {
        let bad = |d: String| Error::Parse { what: "matching", detail: d };
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| bad("empty input".into()))?;
        let size = header
            .split_whitespace()
            .find_map(|f| f.strip_prefix("size="))
            .and_then(|s| s.parse::<usize>().ok())
            .ok_or_else(|| bad(format!("bad header {header:?}")))?;
        let mut pairs = Vec::new();
        for l in lines {
            let mut it = l.split_whitespace().map(str::parse::<usize>);
            match (it.next(), it.next(), it.next()) {
                (Some(Ok(a)), Some(Ok(b)), None) => pairs.push((a, b)),
                _ => return Err(bad(format!("bad pair line {l:?}"))),
            }
        }
        let m = Self::from_pairs(g, &pairs)?;
        if m.size() != size {
            return Err(bad(format!("header size {size} but {} pairs", m.size())));
        }
        Ok(m)
    }
}

/// Lexicographic (size, weight) comparison with the tie band and canonical
/// edge order: the smaller sorted edge sequence wins a tie.
pub fn lex_cmp(a: &Matching, b: &Matching) -> Ordering {
    a.size()
        .cmp(&b.size())
        .then_with(|| {
            if (a.weight - b.weight).abs() <= WEIGHT_TIE {
                Ordering::Equal
            } else {
                a.weight.total_cmp(&b.weight)
            }
        })
        .then_with(|| b.edge_ids.cmp(&a.edge_ids))
}

/// Root performance pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Perf {
    pub match_prob: f64,
    pub expected_weight: f64,
}

impl Perf {
    pub fn lex_cmp(&self, other: &Perf) -> Ordering {
        self.match_prob.total_cmp(&other.match_prob).then(self.expected_weight.total_cmp(&other.expected_weight))
    }
}

/// Vertex-rooted and edge-rooted performance of a matching on a finite graph.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerfPair {
    pub vertex: Perf,
    pub edge: Perf,
}

pub fn perf_of(g: &WeightedGraph, m: &Matching) -> Result<PerfPair> {
    // revalidate against g: the matching may come from elsewhere
    let check = Matching::from_edge_ids(g, m.edge_ids.clone())?;
    if check.pairs != m.pairs {
        return Err(Error::InvalidMatching("edge ids do not match pairs in this graph".into()));
    }
    let n = g.n() as f64;
    let size = m.size() as f64;
    let vertex = Perf { match_prob: 2.0 * size / n, expected_weight: 2.0 * m.weight / n };
    let edge = if g.m() == 0 {
        Perf { match_prob: 0.0, expected_weight: 0.0 }
    } else {
        let e = g.m() as f64;
        Perf { match_prob: size / e, expected_weight: m.weight / e }
    };
    Ok(PerfPair { vertex, edge })
}

fn check_bound(g: &WeightedGraph, bound: usize) -> Result<()> {
    if g.m() > bound {
        Err(Error::SizeLimit { edges: g.m(), bound })
    } else {
        Ok(())
    }
}

/// Calls `visit` with the sorted edge ids of every matching of g.
fn for_each_matching(g: &WeightedGraph, mut visit: impl FnMut(&[usize])) {
    fn rec(g: &WeightedGraph, i: usize, used: &mut [bool], cur: &mut Vec<usize>, visit: &mut dyn FnMut(&[usize])) {
        if i == g.m() {
            visit(cur);
            return;
        }
        rec(g, i + 1, used, cur, visit);
        let e = g.edge(i);
        if !used[e.u] && !used[e.v] {
            used[e.u] = true;
            used[e.v] = true;
            cur.push(i);
            rec(g, i + 1, used, cur, visit);
            cur.pop();
            used[e.u] = false;
            used[e.v] = false;
        }
    }
    let mut used = vec![false; g.n()];
    rec(g, 0, &mut used, &mut Vec::new(), &mut visit);
}

/// Lexicographically optimal matching by exhaustive enumeration.
pub fn brute_force_opt(g: &WeightedGraph) -> Result<Matching> {
    check_bound(g, BRUTE_FORCE_MAX_EDGES)?;
    let mut best = Matching::empty();
    for_each_matching(g, |ids| {
        if ids.len() < best.size() {
            return;
        }
        let cand = Matching::from_edge_ids(g, ids.to_vec()).expect("enumerated sets are matchings");
        if lex_cmp(&cand, &best) == Ordering::Greater {
            best = cand;
        }
    });
    Ok(best)
}

/// Maximum total weight among matchings of each size 0..=max size.
pub fn max_weight_by_size(g: &WeightedGraph) -> Result<Vec<f64>> {
    check_bound(g, BRUTE_FORCE_MAX_EDGES)?;
    let mut best: Vec<f64> = vec![0.0];
    for_each_matching(g, |ids| {
        let w: f64 = ids.iter().map(|&e| g.edge(e).w).sum();
        if ids.len() >= best.len() {
            best.resize(ids.len() + 1, f64::NEG_INFINITY);
        }
        best[ids.len()] = best[ids.len()].max(w);
    });
    Ok(best)
}

/// Largest eps0 such that for every eps < eps0 the maximum-weight matching
/// for weights 1 + eps w has the lexicographically optimal size and weight.
/// Infinite when no smaller matching ever catches up.
pub fn eps_gap_threshold(g: &WeightedGraph) -> Result<f64> {
    let by_size = max_weight_by_size(g)?;
    let s_star = by_size.len() - 1;
    let w_star = by_size[s_star];
    let mut eps0 = f64::INFINITY;
    for (s, &w) in by_size.iter().enumerate().take(s_star) {
        if w > w_star {
            eps0 = eps0.min((s_star - s) as f64 / (w - w_star));
        }
    }
    Ok(eps0)
}

/// Lexicographic (size, weight) value.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LexValue {
    pub size: i64,
    pub weight: f64,
}

impl LexValue {
    pub const ZERO: LexValue = LexValue { size: 0, weight: 0.0 };

    pub fn cmp_lex(&self, o: &LexValue) -> Ordering {
        self.size.cmp(&o.size).then(self.weight.total_cmp(&o.weight))
    }

    fn add(self, o: LexValue) -> LexValue {
        LexValue { size: self.size + o.size, weight: self.weight + o.weight }
    }

    fn sub(self, o: LexValue) -> LexValue {
        LexValue { size: self.size - o.size, weight: self.weight - o.weight }
    }
}

/// Output of the forest dynamic program.
#[derive(Debug, Clone)]
pub struct TreeDp {
    pub matching: Matching,
    /// Rooting used: parent of every vertex (`None` for component roots,
    /// which are the smallest vertex of each component).
    pub parent: Vec<Option<usize>>,
    /// Optimum of the subtree of v.
    pub best: Vec<LexValue>,
    /// Optimum of the subtree of v with v left unmatched.
    pub free: Vec<LexValue>,
}

/// Parent vertex and connecting edge of every vertex, `None` at component roots.
pub(crate) type ParentLinks = Vec<Option<(usize, usize)>>;

/// BFS order of every component, rooted at its smallest vertex.
pub(crate) fn forest_order(g: &WeightedGraph) -> Result<(Vec<usize>, ParentLinks)> {
    if !g.is_forest() {
        return Err(Error::CycleDetected);
    }
    let mut parent: Vec<Option<(usize, usize)>> = vec![None; g.n()];
    let mut seen = vec![false; g.n()];
    let mut order = Vec::with_capacity(g.n());
    for r in 0..g.n() {
        if seen[r] {
            continue;
        }
        seen[r] = true;
        let start = order.len();
        order.push(r);
        let mut i = start;
        while i < order.len() {
            let x = order[i];
            for &(y, e) in g.neighbors(x) {
                if !seen[y] {
                    seen[y] = true;
                    parent[y] = Some((x, e));
                    order.push(y);
                }
            }
            i += 1;
        }
    }
    Ok((order, parent))
}

/// Exact lexicographic optimum on a forest.
pub fn tree_opt_dp(g: &WeightedGraph) -> Result<TreeDp> {
    let (order, parent) = forest_order(g)?;
    let n = g.n();
    let mut best = vec![LexValue::ZERO; n];
    let mut free = vec![LexValue::ZERO; n];
    let mut choice: Vec<Option<(usize, usize)>> = vec![None; n];
    for &v in order.iter().rev() {
        let p = parent[v].map(|(p, _)| p);
        let kids = g.neighbors(v).iter().filter(|&&(y, _)| Some(y) != p);
        let f = kids.clone().fold(LexValue::ZERO, |acc, &(c, _)| acc.add(best[c]));
        let mut b = f;
        for &(c, e) in kids {
            let cand = f.sub(best[c]).add(free[c]).add(LexValue { size: 1, weight: g.edge(e).w });
            if cand.cmp_lex(&b) == Ordering::Greater {
                b = cand;
                choice[v] = Some((c, e));
            }
        }
        free[v] = f;
        best[v] = b;
    }
    let mut taken = vec![false; n];
    let mut ids = Vec::new();
    for &v in &order {
        if taken[v] {
            continue;
        }
        if let Some((c, e)) = choice[v] {
            taken[c] = true;
            ids.push(e);
        }
    }
    let matching = Matching::from_edge_ids(g, ids)?;
    Ok(TreeDp { matching, parent: parent.iter().map(|p| p.map(|(x, _)| x)).collect(), best, free })
}

/// Marginal gains per directed edge d = (u -> v):
/// OPT(side of v) - OPT(side of v without v). Quadratic time; oracle use.
pub fn marginal_gains(g: &WeightedGraph) -> Result<Vec<LexValue>> {
    if !g.is_forest() {
        return Err(Error::CycleDetected);
    }
    fn opt(g: &WeightedGraph, v: usize, from: usize) -> (LexValue, LexValue) {
        let mut f = LexValue::ZERO;
        let mut kids = Vec::new();
        for &(c, e) in g.neighbors(v) {
            if c != from {
                let (bc, fc) = opt(g, c, v);
                f = f.add(bc);
                kids.push((bc, fc, g.edge(e).w));
            }
        }
        let mut b = f;
        for (bc, fc, w) in kids {
            let cand = f.sub(bc).add(fc).add(LexValue { size: 1, weight: w });
            if cand.cmp_lex(&b) == Ordering::Greater {
                b = cand;
            }
        }
        (b, f)
    }
    Ok((0..2 * g.m())
        .map(|d| {
            let (u, v) = g.dir_ends(d);
            let (b, f) = opt(g, v, u);
            b.sub(f)
        })
        .collect())
}

/// Result of Karp-Sipser leaf removal.
#[derive(Debug, Clone)]
pub struct LeafRemoval {
    pub matching: Matching,
    /// True when no random pick was needed; the matching is then maximum.
    pub exact: bool,
    /// Non-isolated vertices left when leaves first ran out.
    pub removed_core_size: usize,
}

pub fn leaf_removal(g: &WeightedGraph, seed: RngSeed) -> LeafRemoval {
    let n = g.n();
    let mut rng = seed.rng();
    let mut alive = vec![true; n];
    let mut deg: Vec<usize> = (0..n).map(|v| g.degree(v)).collect();
    let mut leaves: Vec<usize> = (0..n).rev().filter(|&v| deg[v] == 1).collect();
    let mut ids = Vec::new();
    let mut pool: Option<Vec<usize>> = None;
    let mut core = 0;

    let remove = |x: usize, alive: &mut [bool], deg: &mut [usize], leaves: &mut Vec<usize>| {
        alive[x] = false;
        for &(y, _) in g.neighbors(x) {
            if alive[y] {
                deg[y] -= 1;
                if deg[y] == 1 {
                    leaves.push(y);
                }
            }
        }
    };
    loop {
        while let Some(l) = leaves.pop() {
            if !alive[l] || deg[l] != 1 {
                continue;
            }
            let &(u, e) = g.neighbors(l).iter().find(|&&(y, _)| alive[y]).expect("leaf has a live neighbour");
            ids.push(e);
            remove(l, &mut alive, &mut deg, &mut leaves);
            remove(u, &mut alive, &mut deg, &mut leaves);
        }
        let pool = pool.get_or_insert_with(|| {
            core = (0..n).filter(|&v| alive[v] && deg[v] > 0).count();
            (0..g.m()).filter(|&e| alive[g.edge(e).u] && alive[g.edge(e).v]).collect()
        });
        let mut picked = None;
        while !pool.is_empty() {
            let i = rng.random_range(0..pool.len());
            let e = pool[i];
            if alive[g.edge(e).u] && alive[g.edge(e).v] {
                picked = Some(e);
                break;
            }
            pool.swap_remove(i);
        }
        let Some(e) = picked else { break };
        ids.push(e);
        remove(g.edge(e).u, &mut alive, &mut deg, &mut leaves);
        remove(g.edge(e).v, &mut alive, &mut deg, &mut leaves);
    }
    let matching = Matching::from_edge_ids(g, ids).expect("leaf removal builds a matching");
    LeafRemoval { matching, exact: core == 0, removed_core_size: core }
}

/// Classification of an edge relative to all maximum-cardinality matchings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EdgeClass {
    Mandatory,
    Blocking,
    Free,
}

fn maximum_matchings(g: &WeightedGraph) -> Result<Vec<Vec<usize>>> {
    check_bound(g, MAX_MATCHING_MAX_EDGES)?;
    let mut all: Vec<Vec<usize>> = Vec::new();
    let mut size = 0;
    for_each_matching(g, |ids| match ids.len().cmp(&size) {
        Ordering::Greater => {
            size = ids.len();
            all.clear();
            all.push(ids.to_vec());
        }
        Ordering::Equal => all.push(ids.to_vec()),
        Ordering::Less => {}
    });
    Ok(all)
}

/// Mandatory, blocking and free edges, indexed by edge.
pub fn mandatory_blocking(g: &WeightedGraph) -> Result<Vec<EdgeClass>> {
    let all = maximum_matchings(g)?;
    let mut count = vec![0usize; g.m()];
    for m in &all {
        for &e in m {
            count[e] += 1;
        }
    }
    Ok(count
        .into_iter()
        .map(|c| match c {
            0 => EdgeClass::Blocking,
            c if c == all.len() => EdgeClass::Mandatory,
            _ => EdgeClass::Free,
        })
        .collect())
}

/// A maximum-cardinality matching drawn uniformly at random.
pub fn uniform_max_matching(g: &WeightedGraph, seed: RngSeed) -> Result<Matching> {
    let all = maximum_matchings(g)?;
    let i = seed.rng().random_range(0..all.len());
    Matching::from_edge_ids(g, all[i].clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Root;

    fn g(n: usize, e: &[(usize, usize, f64)]) -> WeightedGraph {
        WeightedGraph::new(n, e.to_vec(), Root::Vertex(0)).unwrap()
    }

    #[test]
    fn lex_order_prefers_size() {
        let p = g(4, &[(0, 1, 0.5), (1, 2, 0.9), (2, 3, 0.5)]);
        let m = brute_force_opt(&p).unwrap();
        assert_eq!(m.pairs(), &[(0, 1), (2, 3)]);
        assert!((m.weight() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn ties_break_by_edge_order() {
        let p = g(3, &[(0, 1, 1.0), (1, 2, 1.0)]);
        assert_eq!(brute_force_opt(&p).unwrap().pairs(), &[(0, 1)]);
        let dp = tree_opt_dp(&p).unwrap().matching;
        assert_eq!((dp.size(), dp.weight()), (1, 1.0));
    }

    #[test]
    fn size_limit() {
        let edges: Vec<_> = (0..27).map(|i| (i, i + 1, 1.0)).collect();
        let p = g(28, &edges);
        assert!(matches!(brute_force_opt(&p), Err(Error::SizeLimit { edges: 27, bound: 26 })));
        assert!(tree_opt_dp(&p).is_ok());
    }

    #[test]
    fn dp_rejects_cycles() {
        let t = g(3, &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]);
        assert!(matches!(tree_opt_dp(&t), Err(Error::CycleDetected)));
    }

    #[test]
    fn matching_text_round_trip() {
        let p = g(4, &[(0, 1, 0.5), (1, 2, 0.9), (2, 3, 0.25)]);
        let m = brute_force_opt(&p).unwrap();
        let back = Matching::from_text(&p, &m.to_text()).unwrap();
        assert_eq!(back, m);
        assert!(Matching::from_text(&p, "size=1 weight=0\n0 1\n1 2\n").is_err());
    }

    #[test]
    fn eps_threshold_examples() {
        let p = g(4, &[(0, 1, 0.1), (1, 2, 0.9), (2, 3, 0.1)]);
        assert!((eps_gap_threshold(&p).unwrap() - 1.0 / 0.7).abs() < 1e-12);
        let q = g(4, &[(0, 1, 0.5), (1, 2, 0.9), (2, 3, 0.5)]);
        assert!(eps_gap_threshold(&q).unwrap().is_infinite());
    }
}
