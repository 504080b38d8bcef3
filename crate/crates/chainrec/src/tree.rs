//! Directed trees over a finite window of three vertex families:
//! the line ℕ/ℤ, the comb tree (finite fingers of length k attached at -k)
//! and the grid tree (a bi-infinite branch path attached at each -k).
//!
//! Everything is truncated to a [`TruncationParams`] window. Vertices whose
//! infinite-tree neighborhood got clipped by the window are flagged so that
//! operator application can detect leakage instead of silently computing
//! wrong coordinates.

use crate::error::{Error, Result};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// A vertex of the line, or the j-th vertex of the branch attached at -k.
/// `Branch(k, j)` encodes the pair (-k, j).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum VertexId {
    Line(i64),
    Branch(u32, i64),
}

impl VertexId {
    pub fn is_branch(&self) -> bool {
        matches!(self, VertexId::Branch(_, _))
    }

    /// Parses "5", "-3" or "(-3,2)".
    pub fn parse(s: &str) -> Result<VertexId> {
        let s = s.trim();
        if let Some(body) = s.strip_prefix('(').and_then(|b| b.strip_suffix(')')) {
            let (a, b) = body
                .split_once(',')
                .ok_or_else(|| Error::Scenario(format!("bad vertex {s:?}")))?;
            let neg_k: i64 = a
                .trim()
                .parse()
                .map_err(|_| Error::Scenario(format!("bad vertex {s:?}")))?;
            let j: i64 = b
                .trim()
                .parse()
                .map_err(|_| Error::Scenario(format!("bad vertex {s:?}")))?;
            if neg_k >= 0 {
                return Err(Error::Scenario(format!(
                    "branch vertex must have negative first entry: {s:?}"
                )));
            }
            Ok(VertexId::Branch((-neg_k) as u32, j))
        } else {
            let n: i64 = s
                .parse()
                .map_err(|_| Error::Scenario(format!("bad vertex {s:?}")))?;
            Ok(VertexId::Line(n))
        }
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VertexId::Line(n) => write!(f, "{n}"),
            VertexId::Branch(k, j) => write!(f, "(-{k},{j})"),
        }
    }
}

impl serde::Serialize for VertexId {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// Finite window onto the infinite vertex sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct TruncationParams {
    pub n_min: i64,
    pub n_max: i64,
    /// Number of branches; branch k is attached at line vertex -k.
    pub k_max: u32,
    /// Branch depth range for the grid tree (comb fingers use 1..=k).
    pub j_min: i64,
    pub j_max: i64,
}

impl TruncationParams {
    pub fn line(n_min: i64, n_max: i64) -> Self {
        TruncationParams { n_min, n_max, k_max: 0, j_min: 0, j_max: 0 }
    }

    pub fn comb(n_min: i64, n_max: i64, k_max: u32) -> Self {
        TruncationParams { n_min, n_max, k_max, j_min: 0, j_max: 0 }
    }

    pub fn grid(n_min: i64, n_max: i64, k_max: u32, j_min: i64, j_max: i64) -> Self {
        TruncationParams { n_min, n_max, k_max, j_min, j_max }
    }

    fn check_branch_attachments(&self) -> Result<()> {
        if self.k_max >= 1 && (self.n_min > -(self.k_max as i64) || self.n_max < 1) {
            return Err(Error::InvalidWindow(format!(
                "need n_min <= -k_max and n_max >= 1 so every attachment point exists \
                 (got n_min={}, n_max={}, k_max={})",
                self.n_min, self.n_max, self.k_max
            )));
        }
        Ok(())
    }

    /// True when `self` covers `other` in every dimension.
    pub fn covers(&self, other: &TruncationParams) -> bool {
        self.n_min <= other.n_min
            && self.n_max >= other.n_max
            && self.k_max >= other.k_max
            && self.j_min <= other.j_min
            && self.j_max >= other.j_max
    }
}

impl fmt::Display for TruncationParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "n in [{}, {}], k_max {}, j in [{}, {}]",
            self.n_min, self.n_max, self.k_max, self.j_min, self.j_max
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TreeKind {
    Line,
    Comb,
    Grid,
}

#[derive(Debug, Clone)]
pub struct DirectedTree {
    pub kind: TreeKind,
    pub params: TruncationParams,
    vertices: BTreeSet<VertexId>,
    parent: BTreeMap<VertexId, VertexId>,
    /// Ordered children (line child before branch child).
    children: BTreeMap<VertexId, Vec<VertexId>>,
    root: Option<VertexId>,
    /// Vertices whose infinite-tree parent fell outside the window.
    cut_parent: BTreeSet<VertexId>,
    /// Vertices with at least one infinite-tree child outside the window.
    cut_children: BTreeSet<VertexId>,
}

/// A violation found by [`DirectedTree::validate`], naming the axiom and the
/// witnessing vertices.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct TreeViolation {
    pub axiom: String,
    pub witnesses: Vec<VertexId>,
}

impl DirectedTree {
    pub fn vertices(&self) -> impl Iterator<Item = &VertexId> {
        self.vertices.iter()
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.parent.len()
    }

    pub fn contains(&self, v: &VertexId) -> bool {
        self.vertices.contains(v)
    }

    pub fn parent(&self, v: &VertexId) -> Option<&VertexId> {
        self.parent.get(v)
    }

    pub fn children(&self, v: &VertexId) -> &[VertexId] {
        self.children.get(v).map(|c| c.as_slice()).unwrap_or(&[])
    }

    pub fn root(&self) -> Option<&VertexId> {
        self.root.as_ref()
    }

    pub fn is_cut_parent(&self, v: &VertexId) -> bool {
        self.cut_parent.contains(v)
    }

    pub fn is_cut_children(&self, v: &VertexId) -> bool {
        self.cut_children.contains(v)
    }

    pub fn cut_vertices(&self) -> BTreeSet<VertexId> {
        self.cut_parent.union(&self.cut_children).copied().collect()
    }

    /// Checks the tree axioms. Empty result means all invariants hold.
    pub fn validate(&self) -> Vec<TreeViolation> {
        let mut violations = Vec::new();

        // parent/children consistency
        for (v, p) in &self.parent {
            if !self.children(p).contains(v) {
                violations.push(TreeViolation {
                    axiom: "parent/children consistency".into(),
                    witnesses: vec![*p, *v],
                });
            }
        }
        for (v, cs) in &self.children {
            for c in cs {
                if self.parent.get(c) != Some(v) {
                    violations.push(TreeViolation {
                        axiom: "parent/children consistency".into(),
                        witnesses: vec![*v, *c],
                    });
                }
            }
        }

        // at most one genuine root (window-cut parentless vertices excluded)
        let parentless: Vec<VertexId> = self
            .vertices
            .iter()
            .filter(|v| !self.parent.contains_key(v) && !self.cut_parent.contains(v))
            .copied()
            .collect();
        if parentless.len() > 1 {
            violations.push(TreeViolation {
                axiom: "multiple roots".into(),
                witnesses: parentless.clone(),
            });
        }

        // no cycles: walk parents from every vertex
        for v in &self.vertices {
            let mut seen = BTreeSet::new();
            let mut cur = *v;
            while let Some(p) = self.parent.get(&cur) {
                if !seen.insert(cur) {
                    violations.push(TreeViolation {
                        axiom: "cycle".into(),
                        witnesses: vec![*v],
                    });
                    break;
                }
                cur = *p;
            }
        }

        // connectivity of the undirected graph
        if !self.vertices.is_empty() {
            let start = *self.vertices.iter().next().unwrap();
            let mut seen = BTreeSet::from([start]);
            let mut stack = vec![start];
            while let Some(v) = stack.pop() {
                let mut neighbors: Vec<VertexId> = self.children(&v).to_vec();
                if let Some(p) = self.parent.get(&v) {
                    neighbors.push(*p);
                }
                for n in neighbors {
                    if seen.insert(n) {
                        stack.push(n);
                    }
                }
            }
            if seen.len() != self.vertices.len() {
                let missing: Vec<VertexId> = self
                    .vertices
                    .difference(&seen)
                    .take(4)
                    .copied()
                    .collect();
                violations.push(TreeViolation {
                    axiom: "disconnected".into(),
                    witnesses: missing,
                });
            }
        }

        violations
    }

    /// JSON document {kind, params, vertices, edges, flags} for report embedding.
    pub fn to_json(&self) -> serde_json::Value {
        let edges: Vec<[String; 2]> = self
            .parent
            .iter()
            .map(|(v, p)| [p.to_string(), v.to_string()])
            .collect();
        serde_json::json!({
            "kind": self.kind,
            "params": self.params,
            "vertices": self.vertices.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
            "edges": edges,
            "flags": {
                "cut_parent": self.cut_parent.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
                "cut_children": self.cut_children.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
            },
        })
    }
}

struct TreeBuilder {
    kind: TreeKind,
    params: TruncationParams,
    vertices: BTreeSet<VertexId>,
    parent: BTreeMap<VertexId, VertexId>,
    children: BTreeMap<VertexId, Vec<VertexId>>,
    root: Option<VertexId>,
    cut_parent: BTreeSet<VertexId>,
    cut_children: BTreeSet<VertexId>,
}

impl TreeBuilder {
    fn new(kind: TreeKind, params: TruncationParams) -> Self {
        TreeBuilder {
            kind,
            params,
            vertices: BTreeSet::new(),
            parent: BTreeMap::new(),
            children: BTreeMap::new(),
            root: None,
            cut_parent: BTreeSet::new(),
            cut_children: BTreeSet::new(),
        }
    }

    fn edge(&mut self, parent: VertexId, child: VertexId) {
        self.parent.insert(child, parent);
        self.children.entry(parent).or_default().push(child);
    }

    fn finish(self) -> DirectedTree {
        DirectedTree {
            kind: self.kind,
            params: self.params,
            vertices: self.vertices,
            parent: self.parent,
            children: self.children,
            root: self.root,
            cut_parent: self.cut_parent,
            cut_children: self.cut_children,
        }
    }
}

/// The line tree over [n_min, n_max] with Chi(n) = {n+1}. `rooted` models ℕ:
/// the left end is a genuine root instead of a window cut.
pub fn build_line_tree(params: TruncationParams, rooted: bool) -> Result<DirectedTree> {
    if params.n_min > params.n_max {
        return Err(Error::InvalidWindow("empty line range".into()));
    }
    let mut b = TreeBuilder::new(TreeKind::Line, params);
    for n in params.n_min..=params.n_max {
        b.vertices.insert(VertexId::Line(n));
        if n > params.n_min {
            b.edge(VertexId::Line(n - 1), VertexId::Line(n));
        }
    }
    if rooted {
        b.root = Some(VertexId::Line(params.n_min));
    } else {
        b.cut_parent.insert(VertexId::Line(params.n_min));
    }
    b.cut_children.insert(VertexId::Line(params.n_max));
    Ok(b.finish())
}

/// The comb tree: the line plus, for each 1 <= k <= k_max, a finger
/// (-k,1),...,(-k,k) attached at line vertex -k. Finger tips are true leaves.
pub fn build_comb_tree(params: TruncationParams) -> Result<DirectedTree> {
    if params.k_max < 1 {
        return Err(Error::InvalidWindow("comb tree needs k_max >= 1".into()));
    }
    params.check_branch_attachments()?;
    let mut b = TreeBuilder::new(TreeKind::Comb, params);
    for n in params.n_min..=params.n_max {
        b.vertices.insert(VertexId::Line(n));
        if n > params.n_min {
            b.edge(VertexId::Line(n - 1), VertexId::Line(n));
        }
    }
    for k in 1..=params.k_max {
        for j in 1..=(k as i64) {
            let v = VertexId::Branch(k, j);
            b.vertices.insert(v);
            let p = if j == 1 {
                VertexId::Line(-(k as i64))
            } else {
                VertexId::Branch(k, j - 1)
            };
            b.edge(p, v);
        }
    }
    b.cut_parent.insert(VertexId::Line(params.n_min));
    b.cut_children.insert(VertexId::Line(params.n_max));
    // line vertices -k for k > k_max are missing their branch child
    let lo = params.n_min.max(i64::MIN + 1);
    for n in lo..=-(params.k_max as i64 + 1) {
        b.cut_children.insert(VertexId::Line(n));
    }
    Ok(b.finish())
}

/// The grid tree: the line plus, at each -k, a window of the bi-infinite
/// branch path (-k, j_min),...,(-k, j_max) with (-k,1) attached at -k.
/// k_max = 0 degenerates to the line tree.
pub fn build_grid_tree(params: TruncationParams) -> Result<DirectedTree> {
    if params.k_max == 0 {
        return build_line_tree(params, false);
    }
    if !(params.j_min < 0 && 0 < params.j_max) {
        return Err(Error::InvalidWindow("grid tree needs j_min < 0 < j_max".into()));
    }
    params.check_branch_attachments()?;
    let mut b = TreeBuilder::new(TreeKind::Grid, params);
    for n in params.n_min..=params.n_max {
        b.vertices.insert(VertexId::Line(n));
        if n > params.n_min {
            b.edge(VertexId::Line(n - 1), VertexId::Line(n));
        }
    }
    for k in 1..=params.k_max {
        // upper path 1..j_max grows from the line; the lower path 0 down to
        // j_min hangs below (-k,1), so the whole branch stays connected
        for j in params.j_min..=params.j_max {
            let v = VertexId::Branch(k, j);
            b.vertices.insert(v);
            let p = if j == 1 {
                VertexId::Line(-(k as i64))
            } else if j > 1 {
                VertexId::Branch(k, j - 1)
            } else {
                VertexId::Branch(k, j + 1)
            };
            b.edge(p, v);
        }
        b.cut_children.insert(VertexId::Branch(k, params.j_max));
        b.cut_children.insert(VertexId::Branch(k, params.j_min));
    }
    b.cut_parent.insert(VertexId::Line(params.n_min));
    b.cut_children.insert(VertexId::Line(params.n_max));
    let lo = params.n_min.max(i64::MIN + 1);
    for n in lo..=-(params.k_max as i64 + 1) {
        b.cut_children.insert(VertexId::Line(n));
    }
    Ok(b.finish())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rooted_line_path() {
        let t = build_line_tree(TruncationParams::line(1, 5), true).unwrap();
        assert_eq!(t.root(), Some(&VertexId::Line(1)));
        assert_eq!(t.children(&VertexId::Line(2)), &[VertexId::Line(3)]);
        assert_eq!(t.vertex_count(), 5);
        assert!(t.validate().is_empty());
    }

    #[test]
    fn unrooted_line_flags_boundary_not_root() {
        let t = build_line_tree(TruncationParams::line(-2, 2), false).unwrap();
        assert_eq!(t.root(), None);
        assert!(t.is_cut_parent(&VertexId::Line(-2)));
        assert!(t.validate().is_empty());
    }

    #[test]
    fn single_vertex_window() {
        let t = build_line_tree(TruncationParams::line(3, 3), false).unwrap();
        assert_eq!(t.vertex_count(), 1);
        assert_eq!(t.edge_count(), 0);
        assert!(t.validate().is_empty());
    }

    #[test]
    fn comb_parents_match_the_definition() {
        let t = build_comb_tree(TruncationParams::comb(-6, 3, 4)).unwrap();
        assert_eq!(t.parent(&VertexId::Branch(3, 2)), Some(&VertexId::Branch(3, 1)));
        assert_eq!(t.parent(&VertexId::Branch(3, 1)), Some(&VertexId::Line(-3)));
        // line child before branch child
        assert_eq!(
            t.children(&VertexId::Line(-3)),
            &[VertexId::Line(-2), VertexId::Branch(3, 1)]
        );
        // Chi(n) = {n+1} for n >= 0; finger tips are leaves
        assert_eq!(t.children(&VertexId::Line(0)), &[VertexId::Line(1)]);
        assert!(t.children(&VertexId::Branch(4, 4)).is_empty());
        assert!(t.validate().is_empty());
    }

    #[test]
    fn comb_vertex_count_matches_enumeration() {
        // (n_max - n_min + 1) + K(K+1)/2
        let p = TruncationParams::comb(-7, 4, 5);
        let t = build_comb_tree(p).unwrap();
        assert_eq!(t.vertex_count() as i64, (4 - (-7) + 1) + 5 * 6 / 2);
        assert_eq!(
            t.edge_count(),
            t.vertex_count() - t.vertices().filter(|v| t.parent(v).is_none()).count()
        );
    }

    #[test]
    fn grid_branch_paths_present() {
        let t = build_grid_tree(TruncationParams::grid(-5, 2, 3, -4, 4)).unwrap();
        for j in -4..=4i64 {
            assert!(t.contains(&VertexId::Branch(2, j)));
        }
        assert_eq!(t.parent(&VertexId::Branch(2, 1)), Some(&VertexId::Line(-2)));
        assert_eq!(t.parent(&VertexId::Branch(2, 0)), Some(&VertexId::Branch(2, 1)));
        assert_eq!(t.parent(&VertexId::Branch(2, -1)), Some(&VertexId::Branch(2, 0)));
        assert!(t.is_cut_children(&VertexId::Branch(2, -4)));
        assert!(t.is_cut_children(&VertexId::Branch(2, 4)));
        assert!(t.validate().is_empty());
    }

    #[test]
    fn grid_kmax_zero_degenerates_to_line() {
        let t = build_grid_tree(TruncationParams::grid(-3, 3, 0, -2, 2)).unwrap();
        assert_eq!(t.kind, TreeKind::Line);
    }

    #[test]
    fn validator_catches_hand_built_breakage() {
        let mut t = build_line_tree(TruncationParams::line(0, 3), true).unwrap();
        // two parentless non-cut vertices
        t.parent.remove(&VertexId::Line(2));
        t.children.get_mut(&VertexId::Line(1)).unwrap().clear();
        let violations = t.validate();
        assert!(violations.iter().any(|v| v.axiom == "multiple roots"));
        assert!(violations.iter().any(|v| v.axiom == "disconnected"));

        // hand-built 2-cycle
        let mut c = build_line_tree(TruncationParams::line(0, 1), false).unwrap();
        c.parent.insert(VertexId::Line(0), VertexId::Line(1));
        c.children.entry(VertexId::Line(1)).or_default().push(VertexId::Line(0));
        assert!(c.validate().iter().any(|v| v.axiom == "cycle"));
    }

    #[test]
    fn vertex_parse_roundtrip() {
        assert_eq!(VertexId::parse("-4").unwrap(), VertexId::Line(-4));
        assert_eq!(VertexId::parse("(-3,2)").unwrap(), VertexId::Branch(3, 2));
        assert_eq!(VertexId::parse("(-3,2)").unwrap().to_string(), "(-3,2)");
    }
}
