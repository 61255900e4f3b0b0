//! Combinatorial carrousel tree, Eggers reduction, and the equivalence
//! decision.
//!
//! Levels are the distinct values of the contact map together with 1; the
//! classes of `j ~_q k ⇔ q(j,k) ≥ q` form a tree under inclusion, and
//! suppressing valence-2 vertices gives the combinatorial carrousel. At
//! every vertex the child subtrees fall into groups of `r_v` isomorphic
//! copies plus at most one extra; deleting all but one per group yields the
//! Eggers tree with decorations `(m_v, n_v, r_v, s_v)`. Canonical codes make
//! decorated-rooted-tree isomorphism a string comparison, which is what the
//! topology/outer-Lipschitz equivalence test compares.

use crate::contact::{q_map, verify_ultrametric_matrix, QMap};
use crate::error::CurveError;
use crate::puiseux::{Curve, Sheet};
use crate::scalar::{fmt_rat, ExtendedRational, Rational};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive};
use std::collections::BTreeMap;

/// Vertex of the combinatorial carrousel: an equivalence class of sheets at
/// some level, weighted by that level. Leaves carry `q = ∞` and singleton
/// sheet classes; weights strictly increase away from the root (`q = 1`).
#[derive(Debug, Clone)]
pub struct CarrouselNode {
    pub q: ExtendedRational,
    pub sheets: Vec<usize>,
    pub children: Vec<CarrouselNode>,
}

impl CarrouselNode {
    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    pub fn leaf_count(&self) -> usize {
        if self.is_leaf() {
            1
        } else {
            self.children.iter().map(|c| c.leaf_count()).sum()
        }
    }
}

#[derive(Debug, Clone)]
pub struct CarrouselTree {
    pub root: CarrouselNode,
}

/// Totally ordered fingerprint of a decorated rooted tree; equal codes iff
/// the trees are isomorphic with all decorations.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct CanonicalCode(pub String);

impl std::fmt::Display for CanonicalCode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Build the carrousel tree of a contact matrix. Fails when the matrix
/// violates the ultrametric property.
pub fn build_carrousel_tree(q: &QMap) -> Result<CarrouselTree, CurveError> {
    build_from_matrix(&q.values)
}

/// Same construction from a bare symmetric matrix (used by the numeric
/// recovery pipeline, which has no sheet bookkeeping).
pub fn build_from_matrix(values: &[Vec<ExtendedRational>]) -> Result<CarrouselTree, CurveError> {
    let mu = values.len();
    if mu == 0 {
        return Err(CurveError::Invalid("empty contact matrix".into()));
    }
    let bad = verify_ultrametric_matrix(values);
    if !bad.is_empty() {
        return Err(CurveError::Ultrametric(bad.len()));
    }
    let one = Rational::one();
    for row in values.iter() {
        for v in row {
            if let ExtendedRational::Finite(r) = v {
                if r < &one {
                    return Err(CurveError::Internal(format!(
                        "contact value {} below 1",
                        fmt_rat(r)
                    )));
                }
            }
        }
    }

    // levels in decreasing order, 1 included, ∞ handled as the leaf level
    let mut levels: Vec<Rational> = Vec::new();
    for row in values.iter() {
        for v in row {
            if let ExtendedRational::Finite(r) = v {
                if !levels.contains(r) {
                    levels.push(r.clone());
                }
            }
        }
    }
    if !levels.contains(&one) {
        levels.push(one.clone());
    }
    levels.sort();
    levels.reverse();

    // start from singleton leaves, merge classes level by level
    let mut classes: Vec<CarrouselNode> = (0..mu)
        .map(|j| CarrouselNode {
            q: ExtendedRational::Infinity,
            sheets: vec![j],
            children: Vec::new(),
        })
        .collect();
    for level in levels {
        let lf = ExtendedRational::Finite(level.clone());
        let mut groups: Vec<CarrouselNode> = Vec::new();
        'outer: for class in classes.drain(..) {
            let rep = class.sheets[0];
            for group in groups.iter_mut() {
                let grep = group.sheets[0];
                if values[rep][grep] >= lf {
                    group.sheets.extend_from_slice(&class.sheets);
                    group.children.push(class);
                    continue 'outer;
                }
            }
            groups.push(CarrouselNode {
                q: lf.clone(),
                sheets: class.sheets.clone(),
                children: vec![class],
            });
        }
        for g in groups.iter_mut() {
            g.sheets.sort_unstable();
        }
        classes = groups;
    }
    if classes.len() != 1 {
        return Err(CurveError::Internal(
            "contact values below 1 left the root disconnected".into(),
        ));
    }
    let mut root = classes.pop().unwrap();
    suppress_valence_two(&mut root);
    Ok(CarrouselTree { root })
}

/// Remove every non-root internal vertex of degree 2 (one parent, one
/// child), amalgamating its edges. The root is kept even with one child.
fn suppress_valence_two(node: &mut CarrouselNode) {
    for child in node.children.iter_mut() {
        while child.children.len() == 1 {
            let only = child.children.pop().unwrap();
            *child = only;
        }
        suppress_valence_two(child);
    }
}

pub fn carrousel_code(t: &CarrouselTree) -> CanonicalCode {
    CanonicalCode(code_of_node(&t.root))
}

fn code_of_node(n: &CarrouselNode) -> String {
    if n.is_leaf() {
        return "*".to_string();
    }
    let q = match &n.q {
        ExtendedRational::Finite(r) => fmt_rat(r),
        ExtendedRational::Infinity => "inf".to_string(),
    };
    let mut kids: Vec<String> = n.children.iter().map(code_of_node).collect();
    kids.sort();
    format!("({}:{})", q, kids.join(","))
}

/// Decide whether two reduced germs have the same embedded topology (hence
/// the same outer Lipschitz geometry): their carrousel trees must be
/// isomorphic as weighted rooted trees.
pub fn equivalent(c1: &Curve, c2: &Curve) -> Result<bool, CurveError> {
    let t1 = build_carrousel_tree(&q_map(c1)?)?;
    let t2 = build_carrousel_tree(&q_map(c2)?)?;
    Ok(carrousel_code(&t1) == carrousel_code(&t2))
}

// ---------------------------------------------------------------------------
// Eggers reduction

/// Non-leaf vertex of the Eggers tree. The weight is kept as the unreduced
/// pair `q_v = m_v / n_v` with `n_v` the lcm of the level denominators on
/// the root path; `r_v = n_v / n_{v'}` and `s_v = n_v (q_v − q_{v'})` refer
/// to the parent `v'`. The root carries `(1, 1)` and `r = 1, s = 0`.
#[derive(Debug, Clone)]
pub struct EggersNode {
    pub m: u64,
    pub n: u64,
    pub r: u64,
    pub s: u64,
    pub children: Vec<EggersChild>,
}

#[derive(Debug, Clone)]
pub struct EggersChild {
    pub kind: EggersChildKind,
    /// Set on the single "additional" subtree at a vertex whose other
    /// subtrees come in groups of `r_v`.
    pub extra: bool,
}

#[derive(Debug, Clone)]
pub enum EggersChildKind {
    Node(EggersNode),
    /// Kept leaf; remembers which branch its sheet belongs to.
    Leaf { branch: usize },
}

#[derive(Debug, Clone)]
pub struct EggersTree {
    pub root: EggersNode,
}

impl EggersNode {
    pub fn q(&self) -> Rational {
        Rational::new(BigInt::from(self.m), BigInt::from(self.n))
    }

    /// Arrow branches in this subtree, one per kept leaf.
    pub fn leaf_branches(&self, out: &mut Vec<usize>) {
        for c in &self.children {
            match &c.kind {
                EggersChildKind::Leaf { branch } => out.push(*branch),
                EggersChildKind::Node(n) => n.leaf_branches(out),
            }
        }
    }
}

/// Reduce a carrousel tree to the Eggers tree.
///
/// At each non-root vertex the child subtrees are partitioned into
/// isomorphism classes, refined by the multiset of branches their sheets
/// belong to (conjugate subtrees always agree on that multiset); each class
/// must have size `≡ 0 (mod r_v)`, except for at most one class of size
/// `≡ 1 (mod r_v)` which contributes the extra subtree. One representative
/// per group of `r_v` is kept.
pub fn eggers_reduce(t: &CarrouselTree, sheets: &[Sheet]) -> Result<EggersTree, CurveError> {
    let root_q = match &t.root.q {
        ExtendedRational::Finite(r) if r.is_one() => r.clone(),
        other => {
            return Err(CurveError::Internal(format!(
                "carrousel root has weight {:?}, expected 1",
                other
            )))
        }
    };
    // the root is exempt from grouping: r = 1 keeps every child
    let children = reduce_children(&t.root, 1, &root_q, 1, sheets)?;
    Ok(EggersTree {
        root: EggersNode { m: 1, n: 1, r: 1, s: 0, children },
    })
}

fn reduce_children(
    node: &CarrouselNode,
    n_v: u64,
    q_v: &Rational,
    r_v: u64,
    sheets: &[Sheet],
) -> Result<Vec<EggersChild>, CurveError> {
    // group children by (isomorphism code, branch signature)
    let mut groups: BTreeMap<(String, Vec<(usize, usize)>), Vec<&CarrouselNode>> = BTreeMap::new();
    for child in &node.children {
        let code = code_of_node(child);
        let mut sig: BTreeMap<usize, usize> = BTreeMap::new();
        for s in &child.sheets {
            *sig.entry(sheets[*s].branch).or_insert(0) += 1;
        }
        groups
            .entry((code, sig.into_iter().collect()))
            .or_default()
            .push(child);
    }

    let mut extra_seen = false;
    let mut kept: Vec<(&CarrouselNode, bool)> = Vec::new();
    for ((code, _sig), members) in &groups {
        let count = members.len() as u64;
        let rem = count % r_v;
        if rem != 0 {
            if rem != 1 || extra_seen {
                return Err(CurveError::CarrouselStructure(format!(
                    "at weight {}: {} subtrees of shape {} do not form groups of {}",
                    fmt_rat(q_v),
                    count,
                    code,
                    r_v
                )));
            }
            extra_seen = true;
        }
        let mut sorted: Vec<&CarrouselNode> = members.clone();
        sorted.sort_by_key(|m| m.sheets.clone());
        let keep = (count / r_v) as usize;
        for (idx, m) in sorted.into_iter().take(keep + (rem as usize)).enumerate() {
            // the flagged representative may be any member of the class
            kept.push((m, rem == 1 && idx == keep));
        }
    }
    kept.sort_by_key(|(m, _)| m.sheets.clone());

    let mut out = Vec::new();
    for (child, extra) in kept {
        match &child.q {
            ExtendedRational::Infinity => {
                let sheet = child.sheets[0];
                out.push(EggersChild {
                    kind: EggersChildKind::Leaf { branch: sheets[sheet].branch },
                    extra,
                });
            }
            ExtendedRational::Finite(q_c) => {
                let den = q_c
                    .denom()
                    .to_u64()
                    .ok_or_else(|| CurveError::Internal("level denominator overflow".into()))?;
                let n_c = n_v.lcm(&den);
                let r_c = n_c / n_v;
                let m_c = (q_c * Rational::from_integer(BigInt::from(n_c))).to_integer();
                let m_c = m_c
                    .to_u64()
                    .ok_or_else(|| CurveError::Internal("vertex weight overflow".into()))?;
                let s_big = ((q_c - q_v) * Rational::from_integer(BigInt::from(n_c))).to_integer();
                if !s_big.is_positive() {
                    return Err(CurveError::Internal(format!(
                        "non-positive jump s at weight {}",
                        fmt_rat(q_c)
                    )));
                }
                let s_c = s_big
                    .to_u64()
                    .ok_or_else(|| CurveError::Internal("jump overflow".into()))?;
                let grandchildren = reduce_children(child, n_c, q_c, r_c, sheets)?;
                out.push(EggersChild {
                    kind: EggersChildKind::Node(EggersNode {
                        m: m_c,
                        n: n_c,
                        r: r_c,
                        s: s_c,
                        children: grandchildren,
                    }),
                    extra,
                });
            }
        }
    }
    Ok(out)
}

pub fn eggers_code(t: &EggersTree) -> CanonicalCode {
    CanonicalCode(eggers_node_code(&t.root))
}

fn eggers_node_code(n: &EggersNode) -> String {
    let mut kids: Vec<String> = n
        .children
        .iter()
        .map(|c| {
            let base = match &c.kind {
                EggersChildKind::Leaf { .. } => "*".to_string(),
                EggersChildKind::Node(node) => eggers_node_code(node),
            };
            if c.extra {
                format!("{}!", base)
            } else {
                base
            }
        })
        .collect();
    kids.sort();
    format!("({}/{};{};{}:{})", n.m, n.n, n.r, n.s, kids.join(","))
}

// ---------------------------------------------------------------------------
// renderings

fn ext_q_json(q: &ExtendedRational) -> serde_json::Value {
    match q {
        ExtendedRational::Infinity => serde_json::Value::from("inf"),
        ExtendedRational::Finite(r) => crate::scalar::json_rat(r),
    }
}

pub fn carrousel_json(t: &CarrouselTree) -> serde_json::Value {
    fn node(n: &CarrouselNode) -> serde_json::Value {
        serde_json::json!({
            "q": ext_q_json(&n.q),
            "sheets": n.sheets,
            "children": n.children.iter().map(node).collect::<Vec<_>>(),
        })
    }
    node(&t.root)
}

pub fn eggers_json(t: &EggersTree) -> serde_json::Value {
    fn node(n: &EggersNode, extra: Option<bool>) -> serde_json::Value {
        let mut v = serde_json::json!({
            "q": [n.m, n.n],
            "r": n.r,
            "s": n.s,
            "children": n.children.iter().map(|c| match &c.kind {
                EggersChildKind::Leaf { branch } => serde_json::json!({
                    "q": "inf", "branch": branch, "extra": c.extra,
                }),
                EggersChildKind::Node(k) => node(k, Some(c.extra)),
            }).collect::<Vec<_>>(),
        });
        if let Some(e) = extra {
            v["extra"] = serde_json::Value::from(e);
        }
        v
    }
    node(&t.root, None)
}

pub fn carrousel_dot(t: &CarrouselTree) -> String {
    let mut out = String::from("graph carrousel {\n  node [shape=circle];\n");
    let mut counter = 0usize;
    fn walk(n: &CarrouselNode, id: usize, counter: &mut usize, out: &mut String) {
        let label = match &n.q {
            ExtendedRational::Finite(r) => fmt_rat(r),
            ExtendedRational::Infinity => String::new(),
        };
        out.push_str(&format!("  v{} [label=\"{}\"];\n", id, label));
        for c in &n.children {
            *counter += 1;
            let cid = *counter;
            walk(c, cid, counter, out);
            out.push_str(&format!("  v{} -- v{};\n", id, cid));
        }
    }
    walk(&t.root, 0, &mut counter, &mut out);
    out.push_str("}\n");
    out
}

pub fn eggers_dot(t: &EggersTree) -> String {
    let mut out = String::from("graph eggers {\n  node [shape=circle];\n");
    let mut counter = 0usize;
    fn walk(n: &EggersNode, id: usize, counter: &mut usize, out: &mut String) {
        out.push_str(&format!("  v{} [label=\"{}/{}\"];\n", id, n.m, n.n));
        for c in &n.children {
            *counter += 1;
            let cid = *counter;
            let edge_label = if c.extra {
                // the extra edge carries the group size r_v of its top vertex
                format!(" [label=\"{}\"]", n.r)
            } else {
                String::new()
            };
            match &c.kind {
                EggersChildKind::Leaf { branch } => {
                    out.push_str(&format!(
                        "  v{} [label=\"\" xlabel=\"b{}\"];\n",
                        cid,
                        branch + 1
                    ));
                }
                EggersChildKind::Node(k) => walk(k, cid, counter, out),
            }
            out.push_str(&format!("  v{} -- v{}{};\n", id, cid, edge_label));
        }
    }
    walk(&t.root, 0, &mut counter, &mut out);
    out.push_str("}\n");
    out
}

/// Indented text rendering used by the CLI.
pub fn carrousel_text(t: &CarrouselTree) -> String {
    fn walk(n: &CarrouselNode, depth: usize, out: &mut String) {
        let indent = "  ".repeat(depth);
        match &n.q {
            ExtendedRational::Finite(r) => {
                out.push_str(&format!("{}q = {}  sheets {:?}\n", indent, fmt_rat(r), n.sheets));
            }
            ExtendedRational::Infinity => {
                out.push_str(&format!("{}leaf sheet {}\n", indent, n.sheets[0]));
            }
        }
        for c in &n.children {
            walk(c, depth + 1, out);
        }
    }
    let mut out = String::new();
    walk(&t.root, 0, &mut out);
    out
}

pub fn eggers_text(t: &EggersTree) -> String {
    fn walk(n: &EggersNode, depth: usize, extra: bool, r_parent: u64, out: &mut String) {
        let indent = "  ".repeat(depth);
        let flag = if extra {
            format!("  [extra edge, label {}]", r_parent)
        } else {
            String::new()
        };
        out.push_str(&format!(
            "{}q = {}/{}  (m={}, n={}, r={}, s={}){}\n",
            indent, n.m, n.n, n.m, n.n, n.r, n.s, flag
        ));
        for c in &n.children {
            match &c.kind {
                EggersChildKind::Leaf { branch } => {
                    let lf = if c.extra {
                        format!("  [extra edge, label {}]", n.r)
                    } else {
                        String::new()
                    };
                    out.push_str(&format!(
                        "{}  leaf (branch {}){}\n",
                        indent,
                        branch + 1,
                        lf
                    ));
                }
                EggersChildKind::Node(k) => walk(k, depth + 1, c.extra, n.r, out),
            }
        }
    }
    let mut out = String::new();
    walk(&t.root, 0, false, 1, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contact::q_map;
    use crate::puiseux::parse_curve;
    use crate::scalar::rat;

    fn tree_of(text: &str) -> (CarrouselTree, Vec<Sheet>) {
        let c = parse_curve(text).unwrap();
        let q = q_map(&c).unwrap();
        let t = build_carrousel_tree(&q).unwrap();
        (t, q.sheets)
    }

    #[test]
    fn example_tree_shape() {
        let (t, _) = tree_of("y = x^(3/2) + x^(13/6)\ny = x^(7/3)");
        let root = &t.root;
        assert_eq!(root.q, ExtendedRational::finite(rat(1, 1)));
        assert_eq!(root.children.len(), 1);
        let v32 = &root.children[0];
        assert_eq!(v32.q, ExtendedRational::finite(rat(3, 2)));
        assert_eq!(v32.children.len(), 3);
        let mut shapes: Vec<(Rational, usize)> = v32
            .children
            .iter()
            .map(|c| {
                let q = c.q.as_finite().unwrap().clone();
                assert!(c.children.iter().all(|l| l.is_leaf()));
                (q, c.children.len())
            })
            .collect();
        shapes.sort();
        assert_eq!(
            shapes,
            vec![(rat(13, 6), 3), (rat(13, 6), 3), (rat(7, 3), 3)]
        );
        assert_eq!(root.leaf_count(), 9);
    }

    #[test]
    fn cusp_tree() {
        let (t, _) = tree_of("y = x^(3/2)");
        assert_eq!(t.root.children.len(), 1);
        let v = &t.root.children[0];
        assert_eq!(v.q, ExtendedRational::finite(rat(3, 2)));
        assert_eq!(v.children.len(), 2);
        assert!(v.children.iter().all(|c| c.is_leaf()));
    }

    #[test]
    fn smooth_branch_tree() {
        let (t, _) = tree_of("y = 2x");
        assert_eq!(t.root.children.len(), 1);
        assert!(t.root.children[0].is_leaf());
    }

    #[test]
    fn suppression_of_mixed_chain() {
        // line + cusp: the line's singleton class at 3/2 is a valence-2 chain
        let (t, _) = tree_of("y = x\ny = x + x^(3/2)");
        assert_eq!(t.root.children.len(), 1);
        let v = &t.root.children[0];
        // contact(line, cusp sheets) = 3/2 as well, so all three sheets join at 3/2
        assert_eq!(v.q, ExtendedRational::finite(rat(3, 2)));
        assert_eq!(v.children.len(), 3);
    }

    #[test]
    fn transverse_tangent_root() {
        let (t, _) = tree_of("y = x\ny = 2x");
        assert_eq!(t.root.q, ExtendedRational::finite(rat(1, 1)));
        assert_eq!(t.root.children.len(), 2);
        assert!(t.root.children.iter().all(|c| c.is_leaf()));
    }

    #[test]
    fn eggers_example_decorations() {
        let c = crate::testutil::example_curve();
        let q = q_map(&c).unwrap();
        let t = build_carrousel_tree(&q).unwrap();
        let e = eggers_reduce(&t, &q.sheets).unwrap();

        assert_eq!((e.root.m, e.root.n), (1, 1));
        assert_eq!(e.root.children.len(), 1);
        let v32 = match &e.root.children[0].kind {
            EggersChildKind::Node(n) => n,
            _ => panic!("expected node below root"),
        };
        assert_eq!((v32.m, v32.n, v32.r, v32.s), (3, 2, 2, 1));
        // two children survive: one 13/6 subtree and the extra 7/3 subtree
        assert_eq!(v32.children.len(), 2);
        let mut found = Vec::new();
        for c in &v32.children {
            let n = match &c.kind {
                EggersChildKind::Node(n) => n,
                _ => panic!("leaves cannot hang directly below 3/2 here"),
            };
            found.push(((n.m, n.n, n.r, n.s), c.extra, n.children.len()));
        }
        found.sort();
        assert_eq!(
            found,
            vec![
                ((13, 6, 3, 4), false, 1), // kept 13/6 subtree, 3 leaves → 1
                ((14, 6, 3, 5), true, 1),  // extra 7/3 subtree, displayed 14/6
            ]
        );
    }

    #[test]
    fn eggers_cusp() {
        let c = parse_curve("y = x^(3/2)").unwrap();
        let q = q_map(&c).unwrap();
        let t = build_carrousel_tree(&q).unwrap();
        let e = eggers_reduce(&t, &q.sheets).unwrap();
        let v = match &e.root.children[0].kind {
            EggersChildKind::Node(n) => n,
            _ => panic!(),
        };
        assert_eq!((v.m, v.n, v.r, v.s), (3, 2, 2, 1));
        assert_eq!(v.children.len(), 1);
        assert!(!v.children[0].extra);
        assert!(matches!(v.children[0].kind, EggersChildKind::Leaf { branch: 0 }));
    }

    #[test]
    fn eggers_leaves_are_one_per_branch() {
        for text in [
            "y = x^(3/2) + x^(13/6)\ny = x^(7/3)",
            "y = x^(3/2)\ny = 0",
            "y = x^(3/2) + x^(13/6)\ny = x^(7/3)\ny = x^(3/2) + 2x^(13/6)",
        ] {
            let c = parse_curve(text).unwrap();
            let q = q_map(&c).unwrap();
            let t = build_carrousel_tree(&q).unwrap();
            let e = eggers_reduce(&t, &q.sheets).unwrap();
            let mut branches = Vec::new();
            e.root.leaf_branches(&mut branches);
            branches.sort_unstable();
            let expect: Vec<usize> = (0..c.branches().len()).collect();
            assert_eq!(branches, expect, "curve {:?}", text);
        }
    }

    #[test]
    fn codes_are_order_and_coefficient_insensitive() {
        let a = parse_curve("y = x^(3/2) + x^(13/6)\ny = x^(7/3)").unwrap();
        let b = parse_curve("y = x^(7/3)\ny = 5x^(3/2) - 2x^(13/6)").unwrap();
        let ca = carrousel_code(&build_carrousel_tree(&q_map(&a).unwrap()).unwrap());
        let cb = carrousel_code(&build_carrousel_tree(&q_map(&b).unwrap()).unwrap());
        assert_eq!(ca, cb);

        let cusp23 = parse_curve("y = x^(3/2)").unwrap();
        let cusp25 = parse_curve("y = x^(5/2)").unwrap();
        let c23 = carrousel_code(&build_carrousel_tree(&q_map(&cusp23).unwrap()).unwrap());
        let c25 = carrousel_code(&build_carrousel_tree(&q_map(&cusp25).unwrap()).unwrap());
        assert_ne!(c23, c25);
    }

    #[test]
    fn equivalence_examples() {
        let e = crate::testutil::example_curve();
        let resc = parse_curve("y = 5x^(3/2) - 2x^(13/6)\ny = -x^(7/3)").unwrap();
        assert!(equivalent(&e, &resc).unwrap());

        let a = parse_curve("y = x^(3/2) + x^(13/6)").unwrap();
        let b = parse_curve("y = x^(3/2) + x^(11/6)").unwrap();
        assert!(!equivalent(&a, &b).unwrap());

        let a = parse_curve("y = x^2\ny = -x^2").unwrap();
        let b = parse_curve("y = x^2\ny = x^2 + x^3").unwrap();
        assert!(!equivalent(&a, &b).unwrap());
    }

    #[test]
    fn inessential_term_does_not_change_code() {
        // exponent 12 over n=6 keeps gcd 3 between the drops at 9 and 13
        let a = parse_curve("y = x^(3/2) + x^(13/6)").unwrap();
        let b = parse_curve("y = x^(3/2) + x^2 + x^(13/6)").unwrap();
        assert!(equivalent(&a, &b).unwrap());
    }

    #[test]
    fn ultrametric_violation_rejected() {
        let f = |n: i64, d: i64| ExtendedRational::finite(rat(n, d));
        let inf = ExtendedRational::Infinity;
        let m = vec![
            vec![inf.clone(), f(2, 1), f(5, 1)],
            vec![f(2, 1), inf.clone(), f(3, 1)],
            vec![f(5, 1), f(3, 1), inf.clone()],
        ];
        match build_from_matrix(&m) {
            Err(CurveError::Ultrametric(1)) => {}
            other => panic!("expected ultrametric error, got {:?}", other),
        }
    }
}
