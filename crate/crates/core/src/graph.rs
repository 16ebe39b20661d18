//! Finite simple weighted graphs with a distinguished root, and their text format.

use std::fmt::Write as _;

use crate::error::{domain, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Root {
    Vertex(usize),
    /// Directed root edge (o-, o+).
    Edge(usize, usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    /// Always u < v.
    pub u: usize,
    pub v: usize,
    pub w: f64,
}

impl Edge {
    pub fn other(&self, x: usize) -> usize {
        if x == self.u {
            self.v
        } else {
            self.u
        }
    }
}

/// Simple undirected graph. Edges are stored sorted by (u, v) and an edge's
/// index in that order is its identifier. Directed edge `2e` runs u -> v and
/// `2e + 1` runs v -> u.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    n: usize,
    edges: Vec<Edge>,
    adj: Vec<Vec<(usize, usize)>>,
    root: Root,
    boundary: Vec<usize>,
    labels: Option<Vec<u32>>,
}

impl WeightedGraph {
    /// Build from an edge list. Rejects self-loops, repeated edges and
    /// non-finite weights.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize, f64)>, root: Root) -> Result<Self> {
        let mut list = Vec::new();
        for (a, b, w) in edges {
            if a >= n || b >= n {
                return Err(domain(format!("edge ({a},{b}) out of range for n={n}")));
            }
            if a == b {
                return Err(domain(format!("self-loop at {a}")));
            }
            if !w.is_finite() {
                return Err(domain(format!("non-finite weight on ({a},{b})")));
            }
            list.push(Edge { u: a.min(b), v: a.max(b), w });
        }
        list.sort_by_key(|e| (e.u, e.v));
        if list.windows(2).any(|p| (p[0].u, p[0].v) == (p[1].u, p[1].v)) {
            return Err(domain("repeated edge"));
        }
        Self::from_sorted(n, list, root)
    }

    /// Build from a multigraph edge list, erasing self-loops and repeated
    /// edges (the first weight of a repeated pair is kept).
    pub fn simplified(n: usize, edges: impl IntoIterator<Item = (usize, usize, f64)>, root: Root) -> Result<Self> {
        let mut list: Vec<Edge> = edges
            .into_iter()
            .filter(|(a, b, _)| a != b)
            .map(|(a, b, w)| Edge { u: a.min(b), v: a.max(b), w })
            .collect();
        list.sort_by_key(|e| (e.u, e.v));
        list.dedup_by_key(|e| (e.u, e.v));
        if list.iter().any(|e| e.v >= n || !e.w.is_finite()) {
            return Err(domain("edge out of range or non-finite weight"));
        }
        Self::from_sorted(n, list, root)
    }

    fn from_sorted(n: usize, edges: Vec<Edge>, root: Root) -> Result<Self> {
        let mut adj = vec![Vec::new(); n];
        for (i, e) in edges.iter().enumerate() {
            adj[e.u].push((e.v, i));
            adj[e.v].push((e.u, i));
        }
        for a in &mut adj {
            a.sort_unstable();
        }
        let g = Self { n, edges, adj, root, boundary: Vec::new(), labels: None };
        g.check_root(root)?;
        Ok(g)
    }

    fn check_root(&self, root: Root) -> Result<()> {
        match root {
            Root::Vertex(v) if v < self.n => Ok(()),
            Root::Edge(a, b) if self.edge_between(a, b).is_some() => Ok(()),
            _ => Err(domain(format!("root {root:?} not in graph"))),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, e: usize) -> Edge {
        self.edges[e]
    }

    /// Sorted (neighbour, edge index) pairs.
    pub fn neighbors(&self, v: usize) -> &[(usize, usize)] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn edge_between(&self, a: usize, b: usize) -> Option<usize> {
        let list = self.adj.get(a)?;
        list.binary_search_by_key(&b, |&(x, _)| x).ok().map(|i| list[i].1)
    }

    pub fn root(&self) -> Root {
        self.root
    }

    pub fn with_root(mut self, root: Root) -> Result<Self> {
        self.check_root(root)?;
        self.root = root;
        Ok(self)
    }

    /// Vertices whose outside neighbourhood is unknown (sorted).
    pub fn boundary(&self) -> &[usize] {
        &self.boundary
    }

    pub fn with_boundary(mut self, mut boundary: Vec<usize>) -> Result<Self> {
        boundary.sort_unstable();
        boundary.dedup();
        if boundary.last().is_some_and(|&b| b >= self.n) {
            return Err(domain("boundary vertex out of range"));
        }
        self.boundary = boundary;
        Ok(self)
    }

    pub fn is_boundary(&self, v: usize) -> bool {
        self.boundary.binary_search(&v).is_ok()
    }

    pub fn labels(&self) -> Option<&[u32]> {
        self.labels.as_deref()
    }

    pub fn with_labels(mut self, labels: Vec<u32>) -> Result<Self> {
        if labels.len() != self.m() {
            return Err(domain("one label per edge required"));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    /// Same graph with new weights, indexed by edge.
    pub fn with_weights(mut self, weights: &[f64]) -> Result<Self> {
        if weights.len() != self.m() || weights.iter().any(|w| !w.is_finite()) {
            return Err(domain("need one finite weight per edge"));
        }
        for (e, &w) in self.edges.iter_mut().zip(weights) {
            e.w = w;
        }
        Ok(self)
    }

    pub fn total_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.w).sum()
    }

    /// Directed edge id for a -> b.
    pub fn dir(&self, a: usize, b: usize) -> Option<usize> {
        let e = self.edge_between(a, b)?;
        Some(2 * e + usize::from(a > b))
    }

    /// (tail, head) of a directed edge.
    pub fn dir_ends(&self, d: usize) -> (usize, usize) {
        let e = self.edges[d / 2];
        if d.is_multiple_of(2) {
            (e.u, e.v)
        } else {
            (e.v, e.u)
        }
    }

    pub fn is_forest(&self) -> bool {
        let mut parent: Vec<usize> = (0..self.n).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for e in &self.edges {
            let (a, b) = (find(&mut parent, e.u), find(&mut parent, e.v));
            if a == b {
                return false;
            }
            parent[a] = b;
        }
        true
    }

    /// BFS distances from a set of sources; `usize::MAX` when unreachable.
    pub fn distances(&self, sources: &[usize]) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.n];
        let mut queue = std::collections::VecDeque::new();
        for &s in sources {
            if dist[s] != 0 {
                dist[s] = 0;
                queue.push_back(s);
            }
        }
        while let Some(x) = queue.pop_front() {
            for &(y, _) in &self.adj[x] {
                if dist[y] == usize::MAX {
                    dist[y] = dist[x] + 1;
                    queue.push_back(y);
                }
            }
        }
        dist
    }

    /// Edge-list text: header then `u v w` lines with round-trip exact weights.
    pub fn to_text(&self) -> String {
        let root = match self.root {
            Root::Vertex(v) => format!("vertex:{v}"),
            Root::Edge(a, b) => format!("edge:{a},{b}"),
        };
        let mut s = format!("lexmatch-graph v1 n={} m={} root={root}\n", self.n, self.m());
        for e in &self.edges {
            let _ = writeln!(s, "{} {} {:.16e}", e.u, e.v, e.w);
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let bad = |detail: String| Error::Parse { what: "graph", detail };
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| bad("empty input".into()))?;
        let mut fields = header.split_whitespace();
        if fields.next() != Some("lexmatch-graph") || fields.next() != Some("v1") {
            return Err(bad(format!("bad header {header:?}")));
        }
        let (mut n, mut m, mut root) = (None, None, None);
        for f in fields {
            let (key, val) = f.split_once('=').ok_or_else(|| bad(format!("bad header field {f:?}")))?;
            match key {
                "n" => n = val.parse::<usize>().ok(),
                "m" => m = val.parse::<usize>().ok(),
                "root" => root = parse_root(val),
                _ => return Err(bad(format!("unknown header field {key:?}"))),
            }
        }
        let (n, m, root) = match (n, m, root) {
            (Some(n), Some(m), Some(r)) => (n, m, r),
            _ => return Err(bad("header needs n, m and root".into())),
        };
        let mut edges = Vec::with_capacity(m);
        for line in lines {
            let p: Vec<&str> = line.split_whitespace().collect();
            let parsed = match p.as_slice() {
                [u, v, w] => u.parse().ok().zip(v.parse().ok()).zip(w.parse().ok()),
                _ => None,
            };
            let ((u, v), w) = parsed.ok_or_else(|| bad(format!("bad edge line {line:?}")))?;
            edges.push((u, v, w));
        }
        if edges.len() != m {
            return Err(bad(format!("header says m={m}, found {} edges", edges.len())));
        }
        Self::new(n, edges, root)
    }
}

fn parse_root(s: &str) -> Option<Root> {
    if let Some(v) = s.strip_prefix("vertex:") {
        return v.parse().ok().map(Root::Vertex);
    }
    let (a, b) = s.strip_prefix("edge:")?.split_once(',')?;
    Some(Root::Edge(a.parse().ok()?, b.parse().ok()?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_input() {
        assert!(WeightedGraph::new(2, [(0, 0, 1.0)], Root::Vertex(0)).is_err());
        assert!(WeightedGraph::new(2, [(0, 1, 1.0), (1, 0, 2.0)], Root::Vertex(0)).is_err());
        assert!(WeightedGraph::new(2, [(0, 1, f64::NAN)], Root::Vertex(0)).is_err());
        assert!(WeightedGraph::new(3, [(0, 1, 1.0)], Root::Edge(1, 2)).is_err());
    }

    #[test]
    fn simplification_erases() {
        let g = WeightedGraph::simplified(3, [(0, 0, 1.0), (1, 0, 2.0), (0, 1, 3.0), (1, 2, 1.0)], Root::Vertex(0))
            .unwrap();
        assert_eq!(g.m(), 2);
        assert_eq!(g.edge(0).w, 2.0);
    }

    #[test]
    fn directed_ids() {
        let g = WeightedGraph::new(3, [(2, 1, 0.5), (0, 1, 0.25)], Root::Vertex(0)).unwrap();
        let d = g.dir(2, 1).unwrap();
        assert_eq!(g.dir_ends(d), (2, 1));
        assert_eq!(g.dir_ends(d ^ 1), (1, 2));
        assert!(g.is_forest());
    }

    #[test]
    fn text_round_trip_is_exact() {
        let w = [0.1 + 0.2, std::f64::consts::PI * 1e-7, 1.0 / 3.0];
        let g = WeightedGraph::new(4, [(0, 1, w[0]), (1, 2, w[1]), (2, 3, w[2])], Root::Edge(2, 1)).unwrap();
        let back = WeightedGraph::from_text(&g.to_text()).unwrap();
        assert_eq!(back, g);
        for (a, b) in back.edges().iter().zip(g.edges()) {
            assert_eq!(a.w.to_bits(), b.w.to_bits());
        }
    }

    #[test]
    fn text_errors() {
        assert!(WeightedGraph::from_text("").is_err());
        assert!(WeightedGraph::from_text("lexmatch-graph v1 n=2 m=2 root=vertex:0\n0 1 1.0\n").is_err());
        assert!(WeightedGraph::from_text("lexmatch-graph v2 n=2 m=0 root=vertex:0\n").is_err());
    }
}
