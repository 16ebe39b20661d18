//! Two-level lexicographic message passing on trees.
//!
//! The message on the directed edge u -> v describes the side of v seen from
//! u, i.e. the subtree hanging from v once the edge uv is removed.

use std::cmp::Ordering;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::exact::{EdgeClass, Matching};
use crate::graph::{Root, WeightedGraph};

/// Message (level, z) ordered lexicographically, with a bottom element.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LexMsg {
    Bottom,
    Val { level: u32, z: f64 },
}

impl LexMsg {
    pub const ZERO: LexMsg = LexMsg::Val { level: 0, z: 0.0 };

    pub fn new(level: u32, z: f64) -> Self {
        LexMsg::Val { level, z }
    }

    /// Forced-match boundary value (k, +inf).
    pub fn top(k: u32) -> Self {
        LexMsg::Val { level: k, z: f64::INFINITY }
    }

    pub fn z(&self) -> Option<f64> {
        match self {
            LexMsg::Bottom => None,
            LexMsg::Val { z, .. } => Some(*z),
        }
    }

    pub fn level(&self) -> Option<u32> {
        match self {
            LexMsg::Bottom => None,
            LexMsg::Val { level, .. } => Some(*level),
        }
    }

    pub fn cmp_lex(&self, other: &LexMsg) -> Ordering {
        match (self, other) {
            (LexMsg::Bottom, LexMsg::Bottom) => Ordering::Equal,
            (LexMsg::Bottom, _) => Ordering::Less,
            (_, LexMsg::Bottom) => Ordering::Greater,
            (LexMsg::Val { level: a, z: x }, LexMsg::Val { level: b, z: y }) => a.cmp(b).then(x.total_cmp(y)),
        }
    }

    pub fn max_lex(self, other: LexMsg) -> LexMsg {
        if other.cmp_lex(&self) == Ordering::Greater {
            other
        } else {
            self
        }
    }

    /// (k, w) - self. A result with z = -inf (offer against a Top message) is Bottom.
    pub fn offer(self, k: u32, w: f64) -> LexMsg {
        match self {
            LexMsg::Bottom => LexMsg::top(k),
            LexMsg::Val { level, z } => {
                debug_assert!(level <= k, "message level {level} above k={k}");
                let z = w - z;
                if z == f64::NEG_INFINITY {
                    LexMsg::Bottom
                } else {
                    LexMsg::Val { level: k.saturating_sub(level), z }
                }
            }
        }
    }

    fn plus(self, other: LexMsg) -> LexMsg {
        match (self, other) {
            (LexMsg::Val { level: a, z: x }, LexMsg::Val { level: b, z: y }) => LexMsg::Val { level: a + b, z: x + y },
            _ => LexMsg::Bottom,
        }
    }
}

impl PartialOrd for LexMsg {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp_lex(other))
    }
}

/// One local update rule: messages into a vertex are turned into offers,
/// joined by max, and the join excluding the target edge is finished.
pub(crate) trait Rule {
    type Msg: Copy;
    type Acc: Copy;
    fn empty(&self) -> Self::Acc;
    fn offer(&self, w: f64, m: Self::Msg) -> Self::Acc;
    fn join(&self, a: Self::Acc, b: Self::Acc) -> Self::Acc;
    fn finish(&self, a: Self::Acc) -> Self::Msg;
}

struct LexRule {
    k: u32,
}

impl Rule for LexRule {
    type Msg = LexMsg;
    type Acc = LexMsg;
    fn empty(&self) -> LexMsg {
        LexMsg::Bottom
    }
    fn offer(&self, w: f64, m: LexMsg) -> LexMsg {
        m.offer(self.k, w)
    }
    fn join(&self, a: LexMsg, b: LexMsg) -> LexMsg {
        a.max_lex(b)
    }
    fn finish(&self, a: LexMsg) -> LexMsg {
        LexMsg::ZERO.max_lex(a)
    }
}

/// [lo, hi] bounds; the update is order-reversing, so lo comes from the hi inputs.
struct IntervalRule {
    k: u32,
}

impl Rule for IntervalRule {
    type Msg = (LexMsg, LexMsg);
    type Acc = (LexMsg, LexMsg);
    fn empty(&self) -> Self::Acc {
        (LexMsg::Bottom, LexMsg::Bottom)
    }
    fn offer(&self, w: f64, (lo, hi): Self::Msg) -> Self::Acc {
        (hi.offer(self.k, w), lo.offer(self.k, w))
    }
    fn join(&self, a: Self::Acc, b: Self::Acc) -> Self::Acc {
        (a.0.max_lex(b.0), a.1.max_lex(b.1))
    }
    fn finish(&self, a: Self::Acc) -> Self::Msg {
        (LexMsg::ZERO.max_lex(a.0), LexMsg::ZERO.max_lex(a.1))
    }
}

/// Weightless level recursion i(u,v) = max(0, max(1 - i(v,u'))), as [lo, hi].
struct LevelRule;

impl Rule for LevelRule {
    type Msg = (u8, u8);
    type Acc = (i8, i8);
    fn empty(&self) -> Self::Acc {
        (i8::MIN, i8::MIN)
    }
    fn offer(&self, _w: f64, (lo, hi): Self::Msg) -> Self::Acc {
        (1 - hi as i8, 1 - lo as i8)
    }
    fn join(&self, a: Self::Acc, b: Self::Acc) -> Self::Acc {
        (a.0.max(b.0), a.1.max(b.1))
    }
    fn finish(&self, a: Self::Acc) -> Self::Msg {
        (a.0.max(0) as u8, a.1.max(0) as u8)
    }
}

struct ScalarRule {
    eps: f64,
}

impl Rule for ScalarRule {
    type Msg = f64;
    type Acc = f64;
    fn empty(&self) -> f64 {
        f64::NEG_INFINITY
    }
    fn offer(&self, w: f64, m: f64) -> f64 {
        1.0 + self.eps * w - m
    }
    fn join(&self, a: f64, b: f64) -> f64 {
        a.max(b)
    }
    fn finish(&self, a: f64) -> f64 {
        a.max(0.0)
    }
}

/// BFS order covering all vertices, starting from the root, with the parent
/// edge of every non-start vertex.
struct RootedOrder {
    order: Vec<usize>,
    parent: Vec<Option<(usize, usize)>>,
}

fn rooted_order(g: &WeightedGraph) -> Result<RootedOrder> {
    if !g.is_forest() {
        return Err(Error::CycleDetected);
    }
    let first = match g.root() {
        Root::Vertex(v) => v,
        Root::Edge(a, _) => a,
    };
    let mut parent = vec![None; g.n()];
    let mut seen = vec![false; g.n()];
    let mut order = Vec::with_capacity(g.n());
    for s in std::iter::once(first).chain(0..g.n()) {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        let mut i = order.len();
        order.push(s);
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
    Ok(RootedOrder { order, parent })
}

/// Two sweeps computing every directed message, with `fixed` entries
/// overriding the rule.
fn propagate<R: Rule>(g: &WeightedGraph, ro: &RootedOrder, rule: &R, fixed: &[Option<R::Msg>]) -> Vec<R::Msg> {
    let mut msg: Vec<Option<R::Msg>> = fixed.to_vec();
    // leaves to root: message parent -> v
    for &v in ro.order.iter().rev() {
        let Some((p, _)) = ro.parent[v] else { continue };
        let d = g.dir(p, v).expect("tree edge");
        if fixed[d].is_some() {
            continue;
        }
        let mut acc = rule.empty();
        for &(c, e) in g.neighbors(v) {
            if c != p {
                let m = msg[g.dir(v, c).expect("tree edge")].expect("child message computed");
                acc = rule.join(acc, rule.offer(g.edge(e).w, m));
            }
        }
        msg[d] = Some(rule.finish(acc));
    }
    // root to leaves: message c -> v for every neighbour c of v other than its parent
    let mut offers: Vec<R::Acc> = Vec::new();
    let mut suffix: Vec<R::Acc> = Vec::new();
    for &v in &ro.order {
        let nb = g.neighbors(v);
        offers.clear();
        for &(y, e) in nb {
            let m = msg[g.dir(v, y).expect("tree edge")].expect("outgoing message computed");
            offers.push(rule.offer(g.edge(e).w, m));
        }
        suffix.clear();
        suffix.resize(nb.len() + 1, rule.empty());
        for i in (0..nb.len()).rev() {
            suffix[i] = rule.join(offers[i], suffix[i + 1]);
        }
        let mut prefix = rule.empty();
        let p = ro.parent[v].map(|(p, _)| p);
        for (i, &(c, _)) in nb.iter().enumerate() {
            if Some(c) != p {
                let d = g.dir(c, v).expect("tree edge");
                if fixed[d].is_none() {
                    msg[d] = Some(rule.finish(rule.join(prefix, suffix[i + 1])));
                }
            }
            prefix = rule.join(prefix, offers[i]);
        }
    }
    msg.into_iter().map(|m| m.expect("every directed edge visited")).collect()
}

/// Boundary condition on the inward edge of a boundary vertex.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundaryValue {
    /// Boundary vertex not matched outward: (0, 0).
    Zero,
    /// Boundary vertex matched outward: (k, +inf).
    Top,
    Sampled(LexMsg),
}

impl BoundaryValue {
    pub fn value(self, k: u32) -> LexMsg {
        match self {
            BoundaryValue::Zero => LexMsg::ZERO,
            BoundaryValue::Top => LexMsg::top(k),
            BoundaryValue::Sampled(m) => m,
        }
    }
}

/// Inward directed edge (neighbour towards the root -> b) of every boundary
/// vertex b, in boundary order. The root vertex of a vertex-rooted ball has none.
pub fn boundary_edges(g: &WeightedGraph) -> Result<Vec<(usize, usize)>> {
    let ro = rooted_order(g)?;
    Ok(g.boundary()
        .iter()
        .filter_map(|&b| {
            let from = match (g.root(), ro.parent[b]) {
                (Root::Edge(a, c), _) if b == a => Some(c),
                (_, Some((p, _))) => Some(p),
                _ => None,
            }?;
            Some((b, g.dir(from, b).expect("tree edge")))
        })
        .collect())
}

/// Per-directed-edge messages, indexed by directed edge id.
#[derive(Debug, Clone, PartialEq)]
pub struct MessageField {
    pub k: u32,
    pub msgs: Vec<LexMsg>,
    /// Fixed boundary messages as (directed edge, value).
    pub boundary: Vec<(usize, BoundaryValue)>,
}

impl MessageField {
    pub fn get(&self, g: &WeightedGraph, u: usize, v: usize) -> Option<LexMsg> {
        g.dir(u, v).map(|d| self.msgs[d])
    }

    fn is_fixed(&self, d: usize) -> bool {
        self.boundary.iter().any(|&(b, _)| b == d)
    }

    /// `u v level z` per directed edge; Bottom is written with level -1.
    pub fn to_text(&self, g: &WeightedGraph) -> String {
        let mut s = String::new();
        for (d, m) in self.msgs.iter().enumerate() {
            let (u, v) = g.dir_ends(d);
            let _ = match m {
                LexMsg::Bottom => writeln!(s, "{u} {v} -1 0"),
                LexMsg::Val { level, z } => writeln!(s, "{u} {v} {level} {z:.16e}"),
            };
        }
        s
    }

    /// Largest deviation from the recursion over non-boundary directed edges:
    /// 0 when every message equals its re-evaluated right-hand side exactly.
    pub fn recursion_defect(&self, g: &WeightedGraph) -> usize {
        let rule = LexRule { k: self.k };
        (0..self.msgs.len())
            .filter(|&d| !self.is_fixed(d))
            .filter(|&d| {
                let (u, v) = g.dir_ends(d);
                let mut acc = rule.empty();
                for &(y, e) in g.neighbors(v) {
                    if y != u {
                        acc = rule.join(acc, rule.offer(g.edge(e).w, self.msgs[g.dir(v, y).unwrap()]));
                    }
                }
                rule.finish(acc) != self.msgs[d]
            })
            .count()
    }
}

/// Exact messages on a forest.
pub fn sweep_tree(g: &WeightedGraph, k: u32) -> Result<MessageField> {
    let ro = rooted_order(g)?;
    let msgs = propagate(g, &ro, &LexRule { k }, &vec![None; 2 * g.m()]);
    Ok(MessageField { k, msgs, boundary: Vec::new() })
}

/// Messages on a tree ball with the given value on each boundary vertex's
/// inward edge (`values` follows `ball.boundary()` order; missing entries
/// for the root vertex are skipped).
pub fn sweep_bounded(ball: &WeightedGraph, k: u32, values: &[BoundaryValue]) -> Result<MessageField> {
    if values.len() != ball.boundary().len() {
        return Err(Error::Domain(format!(
            "{} boundary values for {} boundary vertices",
            values.len(),
            ball.boundary().len()
        )));
    }
    let ro = rooted_order(ball)?;
    let mut fixed = vec![None; 2 * ball.m()];
    let mut boundary = Vec::new();
    for (b, d) in boundary_edges(ball)? {
        let i = ball.boundary().binary_search(&b).expect("boundary vertex");
        fixed[d] = Some(values[i].value(k));
        boundary.push((d, values[i]));
    }
    let msgs = propagate(ball, &ro, &LexRule { k }, &fixed);
    Ok(MessageField { k, msgs, boundary })
}

/// Same boundary value everywhere.
pub fn sweep_uniform_boundary(ball: &WeightedGraph, k: u32, value: BoundaryValue) -> Result<MessageField> {
    sweep_bounded(ball, k, &vec![value; ball.boundary().len()])
}

fn edge_rule(g: &WeightedGraph, field: &MessageField, e: usize) -> bool {
    let s = field.msgs[2 * e].plus(field.msgs[2 * e + 1]);
    s.cmp_lex(&LexMsg::new(field.k, g.edge(e).w)) == Ordering::Less
}

/// Per-vertex self-loop value max over neighbours of (k, w) - message, and the
/// neighbour attaining it (first in adjacency order on ties).
pub fn flexibility(g: &WeightedGraph, field: &MessageField) -> Vec<(LexMsg, Option<usize>)> {
    (0..g.n())
        .map(|u| {
            let mut best = (LexMsg::Bottom, None);
            for &(v, e) in g.neighbors(u) {
                let o = field.msgs[g.dir(u, v).unwrap()].offer(field.k, g.edge(e).w);
                if o.cmp_lex(&best.0) == Ordering::Greater {
                    best = (o, Some(v));
                }
            }
            best
        })
        .collect()
}

/// Matching given by the edge decision rule, cross-checked against the
/// vertex rule at every non-boundary vertex.
pub fn extract_matching(g: &WeightedGraph, field: &MessageField) -> Result<Matching> {
    let ids: Vec<usize> = (0..g.m()).filter(|&e| edge_rule(g, field, e)).collect();
    let m = Matching::from_edge_ids(g, ids).map_err(|e| Error::Inconsistent(e.to_string()))?;
    let mates = m.mates(g.n());
    for (u, (flex, arg)) in flexibility(g, field).into_iter().enumerate() {
        if g.is_boundary(u) {
            continue;
        }
        let by_vertex = if flex.cmp_lex(&LexMsg::ZERO) == Ordering::Greater { arg } else { None };
        if by_vertex != mates[u] {
            return Err(Error::Inconsistent(format!(
                "vertex {u}: vertex rule gives {by_vertex:?}, edge rule gives {:?}",
                mates[u]
            )));
        }
    }
    Ok(m)
}

/// Interval bounds on every directed message, valid for every boundary condition.
#[derive(Debug, Clone, PartialEq)]
pub struct Squeeze {
    pub lower: Vec<LexMsg>,
    pub upper: Vec<LexMsg>,
}

impl Squeeze {
    pub fn certified(&self, d: usize) -> bool {
        self.lower[d] == self.upper[d]
    }
}

/// Bounds from anti-monotone interval propagation with [Zero, Top] on the boundary.
pub fn squeeze(ball: &WeightedGraph, k: u32) -> Result<Squeeze> {
    let ro = rooted_order(ball)?;
    let mut fixed = vec![None; 2 * ball.m()];
    for (_, d) in boundary_edges(ball)? {
        fixed[d] = Some((LexMsg::ZERO, LexMsg::top(k)));
    }
    let bounds = propagate(ball, &ro, &IntervalRule { k }, &fixed);
    let (lower, upper) = bounds.into_iter().unzip();
    Ok(Squeeze { lower, upper })
}

/// The all-Zero and all-Top boundary fields.
pub fn extremal_fields(ball: &WeightedGraph, k: u32) -> Result<(MessageField, MessageField)> {
    Ok((sweep_uniform_boundary(ball, k, BoundaryValue::Zero)?, sweep_uniform_boundary(ball, k, BoundaryValue::Top)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LevelBoundary {
    Zero,
    One,
}

fn check_level_regime(k: u32) -> Result<()> {
    if k == 1 {
        Ok(())
    } else {
        Err(Error::Regime(format!("level recursion needs k = 1, got k = {k}")))
    }
}

fn level_propagate(ball: &WeightedGraph, lo: u8, hi: u8) -> Result<Vec<(u8, u8)>> {
    let ro = rooted_order(ball)?;
    let mut fixed = vec![None; 2 * ball.m()];
    for (_, d) in boundary_edges(ball)? {
        fixed[d] = Some((lo, hi));
    }
    Ok(propagate(ball, &ro, &LevelRule, &fixed))
}

/// Levels for a fixed boundary value.
pub fn macroscopic_sweep(ball: &WeightedGraph, k: u32, boundary: LevelBoundary) -> Result<Vec<u8>> {
    check_level_regime(k)?;
    let b = match boundary {
        LevelBoundary::Zero => 0,
        LevelBoundary::One => 1,
    };
    Ok(level_propagate(ball, b, b)?.into_iter().map(|(l, _)| l).collect())
}

/// Levels that agree under every boundary condition, `None` elsewhere.
pub fn macroscopic_squeeze(ball: &WeightedGraph, k: u32) -> Result<Vec<Option<u8>>> {
    check_level_regime(k)?;
    Ok(level_propagate(ball, 0, 1)?.into_iter().map(|(lo, hi)| (lo == hi).then_some(lo)).collect())
}

/// Classification of each edge whose two directed levels are known.
pub fn classify_edges_from_levels(g: &WeightedGraph, levels: &[Option<u8>], k: u32) -> Vec<Option<EdgeClass>> {
    (0..g.m())
        .map(|e| match (levels[2 * e], levels[2 * e + 1]) {
            (Some(a), Some(b)) => Some(match (a as u32 + b as u32).cmp(&k) {
                Ordering::Less => EdgeClass::Mandatory,
                Ordering::Greater => EdgeClass::Blocking,
                Ordering::Equal => EdgeClass::Free,
            }),
            _ => None,
        })
        .collect()
}

/// Scalar messages for weights 1 + eps w and the induced maximum-weight matching.
pub fn scalar_sweep_eps(g: &WeightedGraph, eps: f64) -> Result<(Vec<f64>, Matching)> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::Domain(format!("eps must be positive, got {eps}")));
    }
    let ro = rooted_order(g)?;
    let z = propagate(g, &ro, &ScalarRule { eps }, &vec![None; 2 * g.m()]);
    let ids = (0..g.m()).filter(|&e| 1.0 + eps * g.edge(e).w > z[2 * e] + z[2 * e + 1]).collect();
    let m = Matching::from_edge_ids(g, ids).map_err(|e| Error::Inconsistent(e.to_string()))?;
    Ok((z, m))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(w: &[f64]) -> WeightedGraph {
        let edges: Vec<_> = w.iter().enumerate().map(|(i, &x)| (i, i + 1, x)).collect();
        WeightedGraph::new(w.len() + 1, edges, Root::Vertex(0)).unwrap()
    }

    #[test]
    fn lex_order() {
        assert!(LexMsg::Bottom < LexMsg::ZERO);
        assert!(LexMsg::new(0, 5.0) < LexMsg::new(1, -5.0));
        assert!(LexMsg::new(1, 0.2) < LexMsg::top(1));
        assert_eq!(LexMsg::top(1).offer(1, 0.3), LexMsg::Bottom);
        assert_eq!(LexMsg::new(1, 0.25).offer(2, 1.0), LexMsg::new(1, 0.75));
    }

    #[test]
    fn path_messages() {
        let g = path(&[0.3, 0.8]);
        let f = sweep_tree(&g, 1).unwrap();
        assert_eq!(f.get(&g, 0, 1), Some(LexMsg::new(1, 0.8)));
        assert_eq!(f.get(&g, 2, 1), Some(LexMsg::new(1, 0.3)));
        assert_eq!(f.get(&g, 1, 0), Some(LexMsg::ZERO));
        assert_eq!(f.get(&g, 1, 2), Some(LexMsg::ZERO));
        assert_eq!(extract_matching(&g, &f).unwrap().pairs(), &[(1, 2)]);
    }

    #[test]
    fn field_dump() {
        let g = path(&[0.5]);
        let f = sweep_tree(&g, 1).unwrap();
        assert_eq!(f.to_text(&g), "0 1 0 0.0000000000000000e0\n1 0 0 0.0000000000000000e0\n");
    }

    #[test]
    fn top_boundary_excludes_boundary_edges() {
        let star = WeightedGraph::new(4, [(0, 1, 0.2), (0, 2, 0.9), (0, 3, 0.5)], Root::Vertex(0))
            .unwrap()
            .with_boundary(vec![1, 2, 3])
            .unwrap();
        let zero = sweep_uniform_boundary(&star, 1, BoundaryValue::Zero).unwrap();
        assert_eq!(extract_matching(&star, &zero).unwrap().pairs(), &[(0, 2)]);
        let top = sweep_uniform_boundary(&star, 1, BoundaryValue::Top).unwrap();
        assert_eq!(extract_matching(&star, &top).unwrap().size(), 0);
    }

    #[test]
    fn level_regime_checked() {
        let g = path(&[1.0]);
        assert!(matches!(macroscopic_sweep(&g, 2, LevelBoundary::Zero), Err(Error::Regime(_))));
    }

    #[test]
    fn cycles_rejected() {
        let t = WeightedGraph::new(3, [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)], Root::Vertex(0)).unwrap();
        assert!(matches!(sweep_tree(&t, 1), Err(Error::CycleDetected)));
        assert!(matches!(scalar_sweep_eps(&t, 0.1), Err(Error::CycleDetected)));
    }
}
