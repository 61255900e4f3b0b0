//! Eisenbud–Neumann splice diagram of a plane curve germ.
//!
//! The diagram is produced from the Eggers tree: leaves become arrowheads
//! (one per branch), every non-root vertex without an extra-flagged downward
//! edge gains a stub leaf whose top weight is `r_v`, remaining top ends get
//! weight 1, and the bottom weights follow the label recursion
//! `m'_v = s_v + r_v r_{v'} m'_{v'}` (plain edge) or
//! `m'_v = (s_v + r_v m'_{v'}) / r_{v'}` (extra-flagged edge, division exact).
//!
//! Linking numbers computed from the diagram equal intersection
//! multiplicities of the corresponding branches; together with edge
//! determinant positivity this provides an independent consistency oracle
//! for the labels.

use crate::carrousel::{CanonicalCode, EggersChildKind, EggersNode, EggersTree};
use crate::error::CurveError;
use crate::scalar::Rational;
use num_bigint::BigInt;

#[derive(Debug, Clone)]
pub struct SpliceVertex {
    /// Displayed weight `m/n` of the originating Eggers vertex.
    pub m: u64,
    pub n: u64,
    /// Bottom label of the edge entering this vertex (absent at the root).
    pub m_prime: Option<u64>,
}

impl SpliceVertex {
    pub fn q(&self) -> Rational {
        Rational::new(BigInt::from(self.m), BigInt::from(self.n))
    }
}

/// Vertex–vertex edge with one near-weight at each end.
#[derive(Debug, Clone)]
pub struct SpliceEdge {
    pub upper: usize,
    pub lower: usize,
    pub upper_weight: u64,
    pub lower_weight: u64,
}

/// Arrowhead leaf, one per curve branch.
#[derive(Debug, Clone)]
pub struct SpliceArrow {
    pub vertex: usize,
    pub weight: u64,
    pub branch: usize,
}

/// Added leaf with a weight only at the vertex end.
#[derive(Debug, Clone)]
pub struct SpliceStub {
    pub vertex: usize,
    pub weight: u64,
}

#[derive(Debug, Clone)]
pub struct SpliceDiagram {
    pub vertices: Vec<SpliceVertex>,
    pub edges: Vec<SpliceEdge>,
    pub arrows: Vec<SpliceArrow>,
    pub stubs: Vec<SpliceStub>,
}

/// Handle on a leaf of the diagram.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpliceLeaf {
    Arrow(usize),
    Stub(usize),
}

impl SpliceDiagram {
    pub fn arrow_of_branch(&self, branch: usize) -> Option<usize> {
        self.arrows.iter().position(|a| a.branch == branch)
    }
}

/// Build the splice diagram from an Eggers tree.
pub fn build_splice(e: &EggersTree) -> Result<SpliceDiagram, CurveError> {
    let mut d = SpliceDiagram {
        vertices: Vec::new(),
        edges: Vec::new(),
        arrows: Vec::new(),
        stubs: Vec::new(),
    };
    d.vertices.push(SpliceVertex { m: e.root.m, n: e.root.n, m_prime: None });
    walk(&e.root, 0, true, &mut d)?;
    Ok(d)
}

fn walk(
    node: &EggersNode,
    node_id: usize,
    node_is_root: bool,
    d: &mut SpliceDiagram,
) -> Result<(), CurveError> {
    let mut has_extra_down = false;
    for child in &node.children {
        let top_weight = if child.extra { node.r } else { 1 };
        if child.extra {
            has_extra_down = true;
        }
        match &child.kind {
            EggersChildKind::Leaf { branch } => {
                d.arrows.push(SpliceArrow { vertex: node_id, weight: top_weight, branch: *branch });
            }
            EggersChildKind::Node(k) => {
                let m_prime = if node_is_root {
                    k.m
                } else {
                    let parent_mp = d.vertices[node_id]
                        .m_prime
                        .ok_or_else(|| CurveError::Internal("missing parent label".into()))?
                        as u128;
                    if child.extra {
                        let num = k.s as u128 + k.r as u128 * parent_mp;
                        if num % (node.r as u128) != 0 {
                            return Err(CurveError::Internal(format!(
                                "label recursion division not exact: {} / {}",
                                num, node.r
                            )));
                        }
                        u64::try_from(num / node.r as u128)
                            .map_err(|_| CurveError::Internal("label overflow".into()))?
                    } else {
                        let num = k.s as u128 + k.r as u128 * node.r as u128 * parent_mp;
                        u64::try_from(num)
                            .map_err(|_| CurveError::Internal("label overflow".into()))?
                    }
                };
                let child_id = d.vertices.len();
                d.vertices.push(SpliceVertex { m: k.m, n: k.n, m_prime: Some(m_prime) });
                d.edges.push(SpliceEdge {
                    upper: node_id,
                    lower: child_id,
                    upper_weight: top_weight,
                    lower_weight: m_prime,
                });
                walk(k, child_id, false, d)?;
            }
        }
    }
    if !node_is_root && !has_extra_down {
        d.stubs.push(SpliceStub { vertex: node_id, weight: node.r });
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// linking numbers and determinants

/// Node of the leaf-extended tree underlying the diagram.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Node {
    Vertex(usize),
    ArrowTip(usize),
    StubTip(usize),
}

fn incident(d: &SpliceDiagram, v: usize) -> Vec<(Node, u64)> {
    let mut out = Vec::new();
    for e in &d.edges {
        if e.upper == v {
            out.push((Node::Vertex(e.lower), e.upper_weight));
        } else if e.lower == v {
            out.push((Node::Vertex(e.upper), e.lower_weight));
        }
    }
    for (i, a) in d.arrows.iter().enumerate() {
        if a.vertex == v {
            out.push((Node::ArrowTip(i), a.weight));
        }
    }
    for (i, s) in d.stubs.iter().enumerate() {
        if s.vertex == v {
            out.push((Node::StubTip(i), s.weight));
        }
    }
    out
}

fn leaf_vertex(d: &SpliceDiagram, l: SpliceLeaf) -> usize {
    match l {
        SpliceLeaf::Arrow(i) => d.arrows[i].vertex,
        SpliceLeaf::Stub(i) => d.stubs[i].vertex,
    }
}

fn vertex_path(d: &SpliceDiagram, from: usize, to: usize) -> Vec<usize> {
    // the diagram is a tree rooted at vertex 0; meet the two ancestor chains
    let mut parent: Vec<Option<usize>> = vec![None; d.vertices.len()];
    for e in &d.edges {
        parent[e.lower] = Some(e.upper);
    }
    let ancestors = |mut v: usize| -> Vec<usize> {
        let mut chain = vec![v];
        while let Some(p) = parent[v] {
            chain.push(p);
            v = p;
        }
        chain
    };
    let a = ancestors(from);
    let b = ancestors(to);
    let meet = a
        .iter()
        .find(|x| b.contains(x))
        .copied()
        .expect("tree is connected");
    let mut path: Vec<usize> = a.iter().take_while(|x| **x != meet).copied().collect();
    path.push(meet);
    let tail: Vec<usize> = b.iter().take_while(|x| **x != meet).copied().collect();
    path.extend(tail.into_iter().rev());
    path
}

/// Linking number of two leaves: the product, over the vertices of the
/// connecting path, of the near-weights at that vertex of the incident edges
/// not lying on the path (empty product = 1).
pub fn linking_number(d: &SpliceDiagram, a: SpliceLeaf, b: SpliceLeaf) -> Result<u64, CurveError> {
    if a == b {
        return Err(CurveError::Invalid("linking number needs two distinct leaves".into()));
    }
    let va = leaf_vertex(d, a);
    let vb = leaf_vertex(d, b);
    let path = vertex_path(d, va, vb);
    let leaf_node = |l: SpliceLeaf| match l {
        SpliceLeaf::Arrow(i) => Node::ArrowTip(i),
        SpliceLeaf::Stub(i) => Node::StubTip(i),
    };
    let mut product: u128 = 1;
    for (idx, v) in path.iter().enumerate() {
        let mut on_path: Vec<Node> = Vec::new();
        if idx > 0 {
            on_path.push(Node::Vertex(path[idx - 1]));
        }
        if idx + 1 < path.len() {
            on_path.push(Node::Vertex(path[idx + 1]));
        }
        if *v == va {
            on_path.push(leaf_node(a));
        }
        if *v == vb {
            on_path.push(leaf_node(b));
        }
        for (nb, w) in incident(d, *v) {
            if !on_path.contains(&nb) {
                product = product
                    .checked_mul(w as u128)
                    .ok_or_else(|| CurveError::Internal("linking number overflow".into()))?;
            }
        }
    }
    u64::try_from(product).map_err(|_| CurveError::Internal("linking number overflow".into()))
}

/// Linking number of the arrows of two branches.
pub fn branch_linking(d: &SpliceDiagram, b1: usize, b2: usize) -> Result<u64, CurveError> {
    let a1 = d
        .arrow_of_branch(b1)
        .ok_or_else(|| CurveError::Invalid(format!("no arrow for branch {}", b1)))?;
    let a2 = d
        .arrow_of_branch(b2)
        .ok_or_else(|| CurveError::Invalid(format!("no arrow for branch {}", b2)))?;
    linking_number(d, SpliceLeaf::Arrow(a1), SpliceLeaf::Arrow(a2))
}

/// For each vertex–vertex edge: product of its two near-weights minus the
/// product of all other near-weights at its endpoints (empty product = 1).
/// All values are strictly positive on diagrams of curve germs.
pub fn edge_determinants(d: &SpliceDiagram) -> Vec<(usize, i128)> {
    let mut out = Vec::new();
    for (idx, e) in d.edges.iter().enumerate() {
        let mut others: i128 = 1;
        for (v, skip) in [(e.upper, Node::Vertex(e.lower)), (e.lower, Node::Vertex(e.upper))] {
            for (nb, w) in incident(d, v) {
                if nb != skip {
                    others *= w as i128;
                }
            }
        }
        let det = (e.upper_weight as i128) * (e.lower_weight as i128) - others;
        out.push((idx, det));
    }
    out
}

/// Fingerprint of the diagram as a decorated rooted tree; arrows and stubs
/// enter only through their weights, so sheet and branch numbering do not
/// matter.
pub fn diagram_code(d: &SpliceDiagram) -> CanonicalCode {
    fn code_of(d: &SpliceDiagram, v: usize, entry_weight: Option<u64>) -> String {
        let mut parts: Vec<String> = Vec::new();
        for e in &d.edges {
            if e.upper == v {
                parts.push(format!(
                    "[{},{}>{}]",
                    e.upper_weight,
                    e.lower_weight,
                    code_of(d, e.lower, Some(e.lower_weight))
                ));
            }
        }
        for a in &d.arrows {
            if a.vertex == v {
                parts.push(format!("[A{}]", a.weight));
            }
        }
        for s in &d.stubs {
            if s.vertex == v {
                parts.push(format!("[S{}]", s.weight));
            }
        }
        parts.sort();
        let entry = entry_weight.map(|w| w.to_string()).unwrap_or_default();
        format!("({}:{})", entry, parts.join(""))
    }
    CanonicalCode(code_of(d, 0, None))
}

// ---------------------------------------------------------------------------
// renderings

pub fn splice_json(d: &SpliceDiagram) -> serde_json::Value {
    serde_json::json!({
        "vertices": d.vertices.iter().enumerate().map(|(i, v)| serde_json::json!({
            "id": i,
            "q": [v.m, v.n],
            "m_prime": v.m_prime,
        })).collect::<Vec<_>>(),
        "edges": d.edges.iter().map(|e| serde_json::json!({
            "a": e.upper, "b": e.lower, "wa": e.upper_weight, "wb": e.lower_weight,
        })).collect::<Vec<_>>(),
        "arrows": d.arrows.iter().map(|a| serde_json::json!({
            "vertex": a.vertex, "weight": a.weight, "branch": a.branch,
        })).collect::<Vec<_>>(),
        "stubs": d.stubs.iter().map(|s| serde_json::json!({
            "vertex": s.vertex, "weight": s.weight,
        })).collect::<Vec<_>>(),
    })
}

pub fn splice_dot(d: &SpliceDiagram) -> String {
    let mut out = String::from("graph splice {\n  node [shape=point];\n");
    for (i, v) in d.vertices.iter().enumerate() {
        out.push_str(&format!("  v{} [xlabel=\"{}/{}\"];\n", i, v.m, v.n));
    }
    for e in &d.edges {
        out.push_str(&format!(
            "  v{} -- v{} [taillabel=\"{}\" headlabel=\"{}\"];\n",
            e.upper, e.lower, e.upper_weight, e.lower_weight
        ));
    }
    for (i, a) in d.arrows.iter().enumerate() {
        out.push_str(&format!("  a{} [shape=none label=\"branch {}\"];\n", i, a.branch + 1));
        out.push_str(&format!(
            "  v{} -- a{} [taillabel=\"{}\"];\n",
            a.vertex, i, a.weight
        ));
    }
    for (i, s) in d.stubs.iter().enumerate() {
        out.push_str(&format!("  s{} [shape=point width=0.05];\n", i));
        out.push_str(&format!(
            "  v{} -- s{} [taillabel=\"{}\"];\n",
            s.vertex, i, s.weight
        ));
    }
    out.push_str("}\n");
    out
}

pub fn splice_text(d: &SpliceDiagram) -> String {
    let mut out = String::new();
    for (i, v) in d.vertices.iter().enumerate() {
        let mp = v
            .m_prime
            .map(|m| m.to_string())
            .unwrap_or_else(|| "-".into());
        out.push_str(&format!(
            "vertex {}: q = {}/{}, incoming bottom label {}\n",
            i, v.m, v.n, mp
        ));
    }
    for e in &d.edges {
        out.push_str(&format!(
            "edge {} -- {}: weights ({}, {})\n",
            e.upper, e.lower, e.upper_weight, e.lower_weight
        ));
    }
    for a in &d.arrows {
        out.push_str(&format!(
            "arrow at vertex {}: weight {}, branch {}\n",
            a.vertex, a.weight, a.branch + 1
        ));
    }
    for s in &d.stubs {
        out.push_str(&format!("stub at vertex {}: weight {}\n", s.vertex, s.weight));
    }
    out
}
