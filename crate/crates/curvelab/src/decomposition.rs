//! Carrousel decomposition of the ambient ball with respect to a plane
//! curve, and SVG rendering of its `{x = t}` sections.
//!
//! Inside the square ball `{|x| ≤ ε₀, |y| ≤ Rε₀}` each tangent direction
//! gets a cone `V = {|y − a x| ≤ η|x|}`; the complement of the cones is the
//! `B(1)` piece. Within a cone, every pair `κ = (f, p_k)` of a truncated
//! Puiseux polynomial and a next exponent spawns a `B`-piece
//! `{α_κ|x^{p_k}| ≤ |y − f(x)| ≤ β_κ|x^{p_k}|}` minus a hole of radius
//! `γ_κ|x^{p_k}|` around each occurring coefficient of `x^{p_k}`; `A`-pieces
//! fill the rate gaps between nested pieces, and each sheet ends in a
//! `D`-piece disk. Constants are exact rationals chosen by a deterministic
//! rule with `α_κ < |a_{kν}| − γ_κ < |a_{kν}| + γ_κ < β_κ`.

use crate::carrousel::build_carrousel_tree;
use crate::contact::q_map;
use crate::error::CurveError;
use crate::puiseux::Curve;
use crate::scalar::{
    fmt_rat, json_rat, rat, rat_to_f64, rsqrt_over, rsqrt_under, GaussianRational, Rational,
    TaggedScalar,
};
use num_complex::Complex64;
use num_traits::{One, Zero};
use std::collections::BTreeMap;

/// Geometry constants of the ambient decomposition: outer radius ε₀, cone
/// half-width η, and square-ball aspect R. The per-piece constants follow
/// the default rule described on [`decompose`].
#[derive(Debug, Clone)]
pub struct DecompositionParams {
    pub eps0: Rational,
    pub eta: Rational,
    pub r_bound: Rational,
}

impl DecompositionParams {
    /// Defaults for a sheared curve: ε₀ = 1/4; η is a quarter of the
    /// smallest pairwise tangent-slope distance (1/4 for a single tangent),
    /// which keeps the cones disjoint; R bounds 1 plus the largest slope
    /// modulus.
    pub fn default_for(slopes: &[GaussianRational]) -> DecompositionParams {
        let mut distinct: Vec<&GaussianRational> = Vec::new();
        for s in slopes {
            if !distinct.iter().any(|d| *d == s) {
                distinct.push(s);
            }
        }
        let mut eta = rat(1, 4);
        for i in 0..distinct.len() {
            for j in (i + 1)..distinct.len() {
                let d2 = distinct[i].sub(distinct[j]).norm_sq();
                let quarter = rsqrt_under(&d2) / rat(4, 1);
                if quarter < eta {
                    eta = quarter;
                }
            }
        }
        let mut max_slope = Rational::zero();
        for s in slopes {
            let m = rsqrt_over(&s.norm_sq());
            if m > max_slope {
                max_slope = m;
            }
        }
        DecompositionParams {
            eps0: rat(1, 4),
            eta,
            r_bound: Rational::one() + max_slope,
        }
    }

    /// Cones around distinct slopes are disjoint iff `2η < |a − a'|`;
    /// checked exactly on squared moduli.
    pub fn cones_disjoint(&self, slopes: &[GaussianRational]) -> bool {
        let four_eta_sq = rat(4, 1) * &self.eta * &self.eta;
        for i in 0..slopes.len() {
            for j in (i + 1)..slopes.len() {
                if slopes[i].sub(&slopes[j]).norm_sq() <= four_eta_sq {
                    return false;
                }
            }
        }
        true
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum PieceKind {
    B1,
    B,
    A,
    D,
}

impl PieceKind {
    pub fn label(&self) -> &'static str {
        match self {
            PieceKind::B1 => "B(1)",
            PieceKind::B => "B",
            PieceKind::A => "A",
            PieceKind::D => "D",
        }
    }
}

/// One piece of the decomposition. Field use by kind:
/// * `B`: `rate` = p_k, `coeffs` = hole coefficients, `alpha`/`beta` the
///   annulus radii constants, `gamma` the hole radius constant;
/// * `A`: annulus from `beta·t^{outer_rate}` down to `alpha·t^{rate}`;
/// * `D`: disk of radius `gamma·t^{rate}` owning one sheet;
/// * `B1`: the cone complement (`rate` 1, `gamma` = η).
#[derive(Debug, Clone)]
pub struct Piece {
    pub kind: PieceKind,
    pub sector: Option<usize>,
    pub rate: Rational,
    pub outer_rate: Option<Rational>,
    pub center: Vec<(Rational, TaggedScalar)>,
    pub coeffs: Vec<TaggedScalar>,
    pub alpha: Option<Rational>,
    pub beta: Option<Rational>,
    pub gamma: Option<Rational>,
    pub sheets: Vec<usize>,
    pub children: Vec<Piece>,
}

impl Piece {
    fn leaf_d_count(&self) -> usize {
        let own = usize::from(self.kind == PieceKind::D);
        own + self.children.iter().map(|c| c.leaf_d_count()).sum::<usize>()
    }

    /// Numeric center value at `x = t`.
    pub fn center_at(&self, t: f64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (e, c) in &self.center {
            acc += c.to_c64() * t.powf(rat_to_f64(e));
        }
        acc
    }

    /// Structure fingerprint: kind, rates, hole count, children (sorted);
    /// constants and coefficient values excluded.
    pub fn structure_code(&self) -> String {
        let mut kids: Vec<String> = self.children.iter().map(|c| c.structure_code()).collect();
        kids.sort();
        let outer = self
            .outer_rate
            .as_ref()
            .map(|r| fmt_rat(r))
            .unwrap_or_default();
        format!(
            "{}[{};{};m{}]({})",
            self.kind.label(),
            fmt_rat(&self.rate),
            outer,
            self.coeffs.len(),
            kids.join(",")
        )
    }
}

#[derive(Debug, Clone)]
pub struct PieceDecomposition {
    pub params: DecompositionParams,
    /// Shear λ applied up front when some tangent line was an axis.
    pub shear: Option<GaussianRational>,
    /// The (sheared) curve the decomposition refers to.
    pub curve: Curve,
    pub sectors: Vec<GaussianRational>,
    pub root: Piece,
}

impl PieceDecomposition {
    /// Piece counts by kind.
    pub fn inventory(&self) -> BTreeMap<&'static str, usize> {
        let mut counts = BTreeMap::new();
        fn walk<'p>(p: &'p Piece, counts: &mut BTreeMap<&'static str, usize>) {
            *counts.entry(p.kind.label()).or_insert(0) += 1;
            for c in &p.children {
                walk(c, counts);
            }
        }
        walk(&self.root, &mut counts);
        counts
    }

    pub fn pieces(&self) -> Vec<&Piece> {
        let mut out = Vec::new();
        fn walk<'p>(p: &'p Piece, out: &mut Vec<&'p Piece>) {
            out.push(p);
            for c in &p.children {
                walk(c, out);
            }
        }
        walk(&self.root, &mut out);
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        fn piece(p: &Piece) -> serde_json::Value {
            serde_json::json!({
                "kind": p.kind.label(),
                "sector": p.sector,
                "rate": json_rat(&p.rate),
                "outer_rate": p.outer_rate.as_ref().map(json_rat),
                "center": p.center.iter().map(|(e, c)| serde_json::json!({
                    "exponent": json_rat(e),
                    "coeff": c.json(),
                })).collect::<Vec<_>>(),
                "coeffs": p.coeffs.iter().map(|c| c.json()).collect::<Vec<_>>(),
                "alpha": p.alpha.as_ref().map(json_rat),
                "beta": p.beta.as_ref().map(json_rat),
                "gamma": p.gamma.as_ref().map(json_rat),
                "sheets": p.sheets,
                "children": p.children.iter().map(piece).collect::<Vec<_>>(),
            })
        }
        serde_json::json!({
            "eps0": json_rat(&self.params.eps0),
            "eta": json_rat(&self.params.eta),
            "R": json_rat(&self.params.r_bound),
            "shear": self.shear.as_ref().map(|s| s.json()),
            "sectors": self.sectors.iter().map(|s| s.json()).collect::<Vec<_>>(),
            "pieces": piece(&self.root),
        })
    }
}

/// Sheet series with explicit term list; zero coefficients are allowed and
/// mark aligned inessential levels.
type SheetSeries = (usize, Vec<(Rational, TaggedScalar)>);

/// Per-piece constants from hole coefficients. `H` is the smallest modulus
/// of a nonzero coefficient, `G` the smallest pairwise coefficient distance;
/// then `γ = min(G/2, H)/3`, `α = H/2`, `β = 2·max|a| + γ`, all replaced by
/// rational bounds on the safe side.
fn b_constants(coeffs: &[TaggedScalar]) -> Result<(Rational, Rational, Rational), CurveError> {
    let nonzero: Vec<&TaggedScalar> = coeffs.iter().filter(|c| !c.is_zero()).collect();
    if nonzero.is_empty() {
        // aligned phantom level: a single hole at the origin, no modulus
        // constraints to satisfy
        return Ok((rat(1, 2), rat(2, 1), rat(1, 8)));
    }
    let h_sq = nonzero
        .iter()
        .map(|c| c.norm_sq())
        .min()
        .expect("nonzero list");
    let max_sq = nonzero.iter().map(|c| c.norm_sq()).max().expect("nonzero list");
    let h_under = rsqrt_under(&h_sq);

    // pairwise gaps include the zero coefficient when present; exact values
    // may be irrational, so take a strict float-guided lower bound
    let mut g_under: Option<Rational> = None;
    for i in 0..coeffs.len() {
        for j in (i + 1)..coeffs.len() {
            let gap = (coeffs[i].to_c64() - coeffs[j].to_c64()).norm();
            let bound = Rational::from_float(gap * (1.0 - 1e-9))
                .ok_or_else(|| CurveError::Internal("coefficient gap not representable".into()))?;
            if g_under.as_ref().map_or(true, |g| bound < *g) {
                g_under = Some(bound);
            }
        }
    }

    let gamma_base = match g_under {
        Some(g) => {
            let half = g / rat(2, 1);
            if half < h_under {
                half
            } else {
                h_under.clone()
            }
        }
        None => h_under.clone(),
    };
    let gamma = gamma_base / rat(3, 1);
    let alpha = &h_under / rat(2, 1);
    let beta = rat(2, 1) * rsqrt_over(&max_sq) + &gamma;

    // the defining inequalities, checked exactly on squared moduli
    for c in &nonzero {
        let m_sq = c.norm_sq();
        let lo = &alpha + &gamma;
        if !(&lo * &lo < m_sq) {
            return Err(CurveError::Internal(format!(
                "constants infeasible: alpha+gamma = {} reaches |a|",
                fmt_rat(&lo)
            )));
        }
        let hi = &beta - &gamma;
        if !(m_sq < &hi * &hi) {
            return Err(CurveError::Internal("constants infeasible: beta too small".into()));
        }
    }
    Ok((alpha, beta, gamma))
}

/// Recursive construction below one prefix. Returns the chain to hang under
/// the enclosing region (an `A → B …` chain, or a bare `D`).
fn build_node(
    sector: usize,
    prefix: &[(Rational, TaggedScalar)],
    sheets: Vec<SheetSeries>,
    incoming_rate: &Rational,
    incoming_radius: &Rational,
) -> Result<Piece, CurveError> {
    let mut enders: Vec<usize> = Vec::new();
    let mut by_rate: BTreeMap<Rational, Vec<SheetSeries>> = BTreeMap::new();
    for (idx, rest) in sheets {
        match rest.first() {
            None => enders.push(idx),
            Some((e, _)) => by_rate.entry(e.clone()).or_default().push((idx, rest)),
        }
    }
    if enders.len() > 1 {
        return Err(CurveError::Internal(
            "two sheets share a full truncated series".into(),
        ));
    }

    if by_rate.is_empty() {
        // terminal disk filling the enclosing hole (or cone)
        return Ok(Piece {
            kind: PieceKind::D,
            sector: Some(sector),
            rate: incoming_rate.clone(),
            outer_rate: None,
            center: prefix.to_vec(),
            coeffs: Vec::new(),
            alpha: None,
            beta: None,
            gamma: Some(incoming_radius.clone()),
            sheets: enders,
            children: Vec::new(),
        })
    }

    // one B-piece per rate, nested top down; A-pieces fill the gaps
    let rates: Vec<Rational> = by_rate.keys().cloned().collect();
    let mut b_pieces: Vec<Piece> = Vec::new();
    for rate in &rates {
        let participants = by_rate.remove(rate).expect("rate key");
        // group by the (canonical) coefficient of x^rate
        let mut holes: BTreeMap<TaggedScalar, Vec<SheetSeries>> = BTreeMap::new();
        for (idx, rest) in participants {
            let coeff = rest[0].1.clone();
            holes
                .entry(coeff)
                .or_default()
                .push((idx, rest[1..].to_vec()));
        }
        let coeffs: Vec<TaggedScalar> = holes.keys().cloned().collect();
        let (alpha, beta, gamma) = b_constants(&coeffs)?;
        let mut children = Vec::new();
        let mut covered: Vec<usize> = Vec::new();
        for (coeff, members) in holes {
            let mut sub_prefix = prefix.to_vec();
            sub_prefix.push((rate.clone(), coeff));
            covered.extend(members.iter().map(|(i, _)| *i));
            children.push(build_node(sector, &sub_prefix, members, rate, &gamma)?);
        }
        b_pieces.push(Piece {
            kind: PieceKind::B,
            sector: Some(sector),
            rate: rate.clone(),
            outer_rate: None,
            center: prefix.to_vec(),
            coeffs,
            alpha: Some(alpha),
            beta: Some(beta),
            gamma: Some(gamma),
            sheets: covered,
            children,
        });
    }

    // terminal center disk below the deepest B-piece for an ending sheet
    if let Some(ender) = enders.first() {
        let last = b_pieces.last().unwrap();
        let d = Piece {
            kind: PieceKind::D,
            sector: Some(sector),
            rate: last.rate.clone(),
            outer_rate: None,
            center: prefix.to_vec(),
            coeffs: Vec::new(),
            alpha: None,
            beta: None,
            gamma: last.alpha.clone(),
            sheets: vec![*ender],
            children: Vec::new(),
        };
        b_pieces.last_mut().unwrap().children.push(d);
    }

    // fold the rate stack bottom-up: each deeper B hangs under its
    // predecessor through an A-piece bridging the rate gap
    let mut chain: Option<Piece> = None;
    for b in b_pieces.into_iter().rev() {
        let inner = match chain.take() {
            None => b,
            Some(deeper) => {
                let a = Piece {
                    kind: PieceKind::A,
                    sector: Some(sector),
                    rate: deeper.rate.clone(),
                    outer_rate: Some(b.rate.clone()),
                    center: prefix.to_vec(),
                    coeffs: Vec::new(),
                    alpha: deeper.beta.clone(),
                    beta: b.alpha.clone(),
                    gamma: None,
                    sheets: Vec::new(),
                    children: vec![deeper],
                };
                let mut b = b;
                b.children.push(a);
                b
            }
        };
        chain = Some(inner);
    }
    let innermost = chain.expect("at least one rate");

    // bridge from the enclosing region down to the top B-piece
    Ok(Piece {
        kind: PieceKind::A,
        sector: Some(sector),
        rate: innermost.rate.clone(),
        outer_rate: Some(incoming_rate.clone()),
        center: prefix.to_vec(),
        coeffs: Vec::new(),
        alpha: innermost.beta.clone(),
        beta: Some(incoming_radius.clone()),
        gamma: None,
        sheets: Vec::new(),
        children: vec![innermost],
    })
}

/// Smallest positive integer shear λ making every tangent slope nonzero.
fn pick_shear(slopes: &[GaussianRational]) -> GaussianRational {
    'cand: for lambda in 1i64..=1024 {
        let l = GaussianRational::from_int(lambda);
        for s in slopes {
            if s.add(&l).is_zero() {
                continue 'cand;
            }
        }
        return l;
    }
    unreachable!("more than 1024 distinct real negative integer slopes")
}

pub(crate) fn shear_if_needed(c: &Curve) -> (Curve, Option<GaussianRational>) {
    let slopes: Vec<GaussianRational> =
        c.branches().iter().map(|b| b.tangent_slope()).collect();
    if slopes.iter().any(|s| s.is_zero()) {
        let lambda = pick_shear(&slopes);
        (c.sheared(&lambda), Some(lambda))
    } else {
        (c.clone(), None)
    }
}

fn build_from_series(
    curve: Curve,
    shear: Option<GaussianRational>,
    series: Vec<SheetSeries>,
    params: DecompositionParams,
) -> Result<PieceDecomposition, CurveError> {
    // sector = tangent slope = untagged coefficient of the exponent-1 term
    let mut sectors: Vec<GaussianRational> = Vec::new();
    let mut per_sector: Vec<Vec<SheetSeries>> = Vec::new();
    for (idx, terms) in series {
        let (e0, c0) = terms
            .first()
            .ok_or_else(|| CurveError::Internal("empty sheet series".into()))?;
        if !e0.is_one() {
            return Err(CurveError::TangentToYAxis(
                "sheet series does not start at exponent 1 (shear missing)".into(),
            ));
        }
        let slope = match c0 {
            TaggedScalar::Term { tag, coeff } if tag.is_trivial() => coeff.clone(),
            _ => {
                return Err(CurveError::Internal(
                    "tangent coefficient must be a plain Gaussian rational".into(),
                ))
            }
        };
        match sectors.iter().position(|s| *s == slope) {
            Some(si) => per_sector[si].push((idx, terms[1..].to_vec())),
            None => {
                sectors.push(slope);
                per_sector.push(vec![(idx, terms[1..].to_vec())]);
            }
        }
    }
    if !params.cones_disjoint(&sectors) {
        return Err(CurveError::Invalid(
            "cone half-width eta does not separate the tangent lines".into(),
        ));
    }

    let mut root = Piece {
        kind: PieceKind::B1,
        sector: None,
        rate: Rational::one(),
        outer_rate: None,
        center: Vec::new(),
        coeffs: Vec::new(),
        alpha: None,
        beta: Some(params.r_bound.clone()),
        gamma: Some(params.eta.clone()),
        sheets: Vec::new(),
        children: Vec::new(),
    };
    let one = Rational::one();
    for (si, slope) in sectors.iter().enumerate() {
        let sheets = per_sector[si].clone();
        let prefix = vec![(one.clone(), TaggedScalar::from_gaussian(slope.clone()))];
        let top = build_node(si, &prefix, sheets, &one, &params.eta)?;
        root.children.push(top);
    }

    let dec = PieceDecomposition { params, shear, curve, sectors, root };
    // leaves are exactly the D-pieces, one per sheet
    let mu = dec.curve.multiplicity() as usize;
    if dec.root.leaf_d_count() != mu {
        return Err(CurveError::Internal(format!(
            "expected {} terminal disks, built {}",
            mu,
            dec.root.leaf_d_count()
        )));
    }
    Ok(dec)
}

/// Carrousel decomposition of the ambient ball relative to `c`.
///
/// If some tangent line is an axis, the shear `(x, y) ↦ (x, y + λx)` with
/// the smallest admissible positive integer λ is applied first (linear
/// shears change no invariant). Branches are truncated at their truncation
/// exponents; the resulting piece tree has the `B(1)` piece at the root, one
/// `B`-piece per pair (truncated polynomial, next exponent), `A`-pieces
/// along rate gaps, and one `D`-piece per sheet.
pub fn decompose(
    c: &Curve,
    params: Option<DecompositionParams>,
) -> Result<PieceDecomposition, CurveError> {
    let (sheared, shear) = shear_if_needed(c);
    let truncated = sheared.truncated();
    let series: Vec<SheetSeries> = truncated
        .sheets()
        .iter()
        .enumerate()
        .map(|(i, s)| (i, truncated.sheet_terms(s)))
        .collect();
    let params = params.unwrap_or_else(|| DecompositionParams::default_for(&slopes_of(&sheared)));
    build_from_series(sheared, shear, series, params)
}

fn slopes_of(c: &Curve) -> Vec<GaussianRational> {
    c.branches().iter().map(|b| b.tangent_slope()).collect()
}

// ---------------------------------------------------------------------------
// alignment of two topologically equivalent curves

/// Kind/rate-preserving bijection between the pieces of two decompositions,
/// with shared B-piece constants valid for both sides.
#[derive(Debug, Clone)]
pub struct PiecePairing {
    pub left: PieceDecomposition,
    pub right: PieceDecomposition,
    /// (left path, right path, shared constants for B-pairs) with paths as
    /// child-index chains from the root.
    pub pairs: Vec<PiecePair>,
}

#[derive(Debug, Clone)]
pub struct PiecePair {
    pub left_path: Vec<usize>,
    pub right_path: Vec<usize>,
    pub kind: PieceKind,
    pub rate: Rational,
    pub shared: Option<(Rational, Rational, Rational)>,
}

impl PiecePairing {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn piece_at<'d>(dec: &'d PieceDecomposition, path: &[usize]) -> &'d Piece {
        let mut p = &dec.root;
        for &i in path {
            p = &p.children[i];
        }
        p
    }
}

/// Marked carrousel code used to pair branches between equivalent curves:
/// leaves of the chosen branch are labelled.
fn marked_code(c: &Curve, branch: usize) -> Result<String, CurveError> {
    let q = q_map(c)?;
    let t = build_carrousel_tree(&q)?;
    fn walk(n: &crate::carrousel::CarrouselNode, sheets: &[crate::puiseux::Sheet], b: usize) -> String {
        if n.is_leaf() {
            return if sheets[n.sheets[0]].branch == b { "*1".into() } else { "*0".into() };
        }
        let q = match &n.q {
            crate::scalar::ExtendedRational::Finite(r) => fmt_rat(r),
            crate::scalar::ExtendedRational::Infinity => "inf".into(),
        };
        let mut kids: Vec<String> = n.children.iter().map(|c| walk(c, sheets, b)).collect();
        kids.sort();
        format!("({}:{})", q, kids.join(","))
    }
    Ok(walk(&t.root, &q.sheets, branch))
}

/// Insert the zero-coefficient terms needed so that paired branches carry
/// the same exponent sets, then rebuild the sheet series.
fn aligned_series(
    c: &Curve,
    pairing: &[(usize, usize)],
    own_side: usize, // 0 = left, 1 = right
    partner: &Curve,
) -> Result<Vec<SheetSeries>, CurveError> {
    let mut extra_exps: Vec<Vec<Rational>> = vec![Vec::new(); c.branches().len()];
    for (l, r) in pairing {
        let (own_b, partner_b) = if own_side == 0 { (*l, *r) } else { (*r, *l) };
        let own = &c.branches()[own_b];
        let other = &partner.branches()[partner_b];
        if own.multiplicity() != other.multiplicity() {
            return Err(CurveError::Internal("paired branches of unequal multiplicity".into()));
        }
        let own_exps: Vec<Rational> = own
            .terms()
            .iter()
            .map(|(i, _)| rat(*i as i64, own.multiplicity() as i64))
            .collect();
        for (i, _) in other.terms() {
            let e = rat(*i as i64, other.multiplicity() as i64);
            if !own_exps.contains(&e) {
                extra_exps[own_b].push(e);
            }
        }
    }
    let sheets = c.sheets();
    let mut out = Vec::new();
    for (idx, s) in sheets.iter().enumerate() {
        let mut terms = c.sheet_terms(s);
        for e in &extra_exps[s.branch] {
            terms.push((e.clone(), TaggedScalar::Zero));
        }
        terms.sort_by(|(a, _), (b, _)| a.cmp(b));
        out.push((idx, terms));
    }
    Ok(out)
}

/// Align the decompositions of two topologically equivalent curves: insert
/// zero-coefficient inessential levels so both piece trees become identical,
/// and return the induced bijection with shared B-piece constants computed
/// from the union of the two hole coefficient lists.
///
/// Alignment keeps every stored term of both inputs (no truncation): terms
/// beyond the truncation exponent are inessential, and matching them is the
/// whole point of the zero-coefficient insertion.
pub fn align_decompositions(c1: &Curve, c2: &Curve) -> Result<PiecePairing, CurveError> {
    if !crate::carrousel::equivalent(c1, c2)? {
        return Err(CurveError::Invalid(
            "not equivalent: the curves have different embedded topology".into(),
        ));
    }
    let (s1, shear1) = shear_if_needed(c1);
    let (s2, shear2) = shear_if_needed(c2);
    let t1 = s1.clone();
    let t2 = s2.clone();

    // branch pairing via marked tree codes
    let mut pairing: Vec<(usize, usize)> = Vec::new();
    let mut used = vec![false; t2.branches().len()];
    for b1 in 0..t1.branches().len() {
        let code1 = marked_code(&t1, b1)?;
        let mut found = None;
        for b2 in 0..t2.branches().len() {
            if !used[b2] && marked_code(&t2, b2)? == code1 {
                found = Some(b2);
                break;
            }
        }
        match found {
            Some(b2) => {
                used[b2] = true;
                pairing.push((b1, b2));
            }
            None => {
                return Err(CurveError::Internal(
                    "equivalent curves without a branch correspondence".into(),
                ))
            }
        }
    }

    let series1 = aligned_series(&t1, &pairing, 0, &t2)?;
    let series2 = aligned_series(&t2, &pairing, 1, &t1)?;
    let p1 = DecompositionParams::default_for(&slopes_of(&s1));
    let p2 = DecompositionParams::default_for(&slopes_of(&s2));
    let left = build_from_series(s1, shear1, series1, p1)?;
    let right = build_from_series(s2, shear2, series2, p2)?;

    let mut pairs = Vec::new();
    pair_pieces(&left.root, &right.root, Vec::new(), Vec::new(), &mut pairs)?;
    Ok(PiecePairing { left, right, pairs })
}

fn pair_pieces(
    a: &Piece,
    b: &Piece,
    path_a: Vec<usize>,
    path_b: Vec<usize>,
    out: &mut Vec<PiecePair>,
) -> Result<(), CurveError> {
    if a.kind != b.kind || a.rate != b.rate || a.coeffs.len() != b.coeffs.len() {
        return Err(CurveError::Internal(format!(
            "aligned trees disagree at {:?} vs {:?}: {} vs {}",
            path_a,
            path_b,
            a.structure_code(),
            b.structure_code()
        )));
    }
    let shared = if a.kind == PieceKind::B {
        let union: Vec<TaggedScalar> = a
            .coeffs
            .iter()
            .chain(b.coeffs.iter())
            .cloned()
            .collect();
        Some(b_constants(&union)?)
    } else {
        None
    };
    out.push(PiecePair {
        left_path: path_a.clone(),
        right_path: path_b.clone(),
        kind: a.kind,
        rate: a.rate.clone(),
        shared,
    });
    if a.children.len() != b.children.len() {
        return Err(CurveError::Internal("aligned trees with unequal child counts".into()));
    }
    // match children by structure code
    let mut ka: Vec<usize> = (0..a.children.len()).collect();
    let mut kb: Vec<usize> = (0..b.children.len()).collect();
    ka.sort_by_key(|&i| a.children[i].structure_code());
    kb.sort_by_key(|&i| b.children[i].structure_code());
    for (ia, ib) in ka.into_iter().zip(kb.into_iter()) {
        let mut pa = path_a.clone();
        pa.push(ia);
        let mut pb = path_b.clone();
        pb.push(ib);
        pair_pieces(&a.children[ia], &b.children[ib], pa, pb, out)?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// disjointness checks

/// Check that at `x = t` the B-piece annuli of each fixed rate are pairwise
/// disjoint, and likewise the hole disks and the D-piece disks. Numeric at
/// the section level (centers are evaluated in floating point).
pub fn section_disjoint_at(dec: &PieceDecomposition, t: f64) -> bool {
    let pieces = dec.pieces();
    let rate_of = |p: &Piece| rat_to_f64(&p.rate);
    // B annuli of one rate
    let bs: Vec<&&Piece> = pieces.iter().filter(|p| p.kind == PieceKind::B).collect();
    for i in 0..bs.len() {
        for j in (i + 1)..bs.len() {
            let (p, q) = (bs[i], bs[j]);
            if p.rate != q.rate {
                continue;
            }
            let scale = t.powf(rate_of(p));
            let dist = (p.center_at(t) - q.center_at(t)).norm();
            let sum = (rat_to_f64(p.beta.as_ref().unwrap()) + rat_to_f64(q.beta.as_ref().unwrap()))
                * scale;
            if dist <= sum {
                return false;
            }
        }
    }
    // hole disks within one B
    for p in &bs {
        let gamma = rat_to_f64(p.gamma.as_ref().unwrap());
        let scale = t.powf(rate_of(p));
        let centers: Vec<Complex64> = p
            .coeffs
            .iter()
            .map(|c| p.center_at(t) + c.to_c64() * scale)
            .collect();
        for i in 0..centers.len() {
            for j in (i + 1)..centers.len() {
                if (centers[i] - centers[j]).norm() <= 2.0 * gamma * scale {
                    return false;
                }
            }
        }
    }
    // D disks of one rate
    let ds: Vec<&&Piece> = pieces.iter().filter(|p| p.kind == PieceKind::D).collect();
    for i in 0..ds.len() {
        for j in (i + 1)..ds.len() {
            let (p, q) = (ds[i], ds[j]);
            if p.rate != q.rate {
                continue;
            }
            let scale = t.powf(rate_of(p));
            let dist = (p.center_at(t) - q.center_at(t)).norm();
            let sum = (rat_to_f64(p.gamma.as_ref().unwrap())
                + rat_to_f64(q.gamma.as_ref().unwrap()))
                * scale;
            if dist <= sum {
                return false;
            }
        }
    }
    true
}

/// Largest `t` on the ladder `ε₀, ε₀/2, ε₀/4, …` (12 steps) at which the
/// section is verified disjoint; there is no closed-form bound, so the value
/// is established by checking.
pub fn largest_disjoint_t(dec: &PieceDecomposition) -> Option<f64> {
    let eps0 = rat_to_f64(&dec.params.eps0);
    for k in 0..12 {
        let t = eps0 / f64::powi(2.0, k);
        if section_disjoint_at(dec, t) {
            return Some(t);
        }
    }
    None
}

// ---------------------------------------------------------------------------
// SVG sections

fn fmt_f(v: f64) -> String {
    format!("{:.6e}", v)
}

/// Render the `{x = t}` section: the μ sheet points of the (sheared,
/// untruncated) curve and the section circles of every piece. Deterministic
/// byte output for fixed inputs.
pub fn render_section(dec: &PieceDecomposition, t: &Rational) -> Result<String, CurveError> {
    if !(t > &Rational::zero() && t <= &dec.params.eps0) {
        return Err(CurveError::Invalid(format!(
            "section parameter {} outside (0, {}]",
            fmt_rat(t),
            fmt_rat(&dec.params.eps0)
        )));
    }
    let tf = rat_to_f64(t);
    let mut circles: Vec<(String, Vec<(Complex64, f64, &'static str)>)> = Vec::new();
    for p in dec.pieces() {
        let mut list: Vec<(Complex64, f64, &'static str)> = Vec::new();
        let center = p.center_at(tf);
        match p.kind {
            PieceKind::B1 => {
                // inner boundaries of the cone complement
                for s in &dec.sectors {
                    list.push((
                        s.to_c64() * tf,
                        rat_to_f64(&dec.params.eta) * tf,
                        "cone",
                    ));
                }
            }
            PieceKind::B => {
                let scale = tf.powf(rat_to_f64(&p.rate));
                list.push((center, rat_to_f64(p.alpha.as_ref().unwrap()) * scale, "inner"));
                list.push((center, rat_to_f64(p.beta.as_ref().unwrap()) * scale, "outer"));
                for c in &p.coeffs {
                    list.push((
                        center + c.to_c64() * scale,
                        rat_to_f64(p.gamma.as_ref().unwrap()) * scale,
                        "hole",
                    ));
                }
            }
            PieceKind::A => {
                let inner_scale = tf.powf(rat_to_f64(&p.rate));
                let outer_scale = tf.powf(rat_to_f64(p.outer_rate.as_ref().unwrap()));
                list.push((center, rat_to_f64(p.alpha.as_ref().unwrap()) * inner_scale, "inner"));
                list.push((center, rat_to_f64(p.beta.as_ref().unwrap()) * outer_scale, "outer"));
            }
            PieceKind::D => {
                let scale = tf.powf(rat_to_f64(&p.rate));
                list.push((center, rat_to_f64(p.gamma.as_ref().unwrap()) * scale, "disk"));
            }
        }
        let header = format!(
            "kind=\"{}\" data-kind=\"{}\" data-rate=\"{}\"",
            p.kind.label(),
            p.kind.label(),
            fmt_rat(&p.rate)
        );
        circles.push((header, list));
    }

    let points: Vec<(Complex64, usize, u64)> = {
        let sheets = dec.curve.sheets();
        sheets
            .iter()
            .map(|s| {
                let mut acc = Complex64::new(0.0, 0.0);
                for (e, c) in dec.curve.sheet_terms(s) {
                    acc += c.to_c64() * tf.powf(rat_to_f64(&e));
                }
                (acc, s.branch, s.k)
            })
            .collect()
    };

    // view box from the drawn geometry
    let mut max_extent = 1e-12f64;
    for (_, list) in &circles {
        for (c, r, _) in list {
            max_extent = max_extent.max(c.norm() + r);
        }
    }
    for (p, _, _) in &points {
        max_extent = max_extent.max(p.norm());
    }
    let half = max_extent * 1.1;

    let mut svg = String::new();
    svg.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"800\" viewBox=\"{} {} {} {}\">\n",
        fmt_f(-half),
        fmt_f(-half),
        fmt_f(2.0 * half),
        fmt_f(2.0 * half)
    ));
    svg.push_str(&format!(
        "<!-- section x = {} ; mu = {} -->\n",
        fmt_rat(t),
        points.len()
    ));
    svg.push_str("<g class=\"pieces\" fill=\"none\" stroke-width=\"0.2%\">\n");
    for (header, list) in &circles {
        svg.push_str(&format!("  <g class=\"piece\" {}>\n", header));
        for (c, r, role) in list {
            svg.push_str(&format!(
                "    <circle class=\"{}\" cx=\"{}\" cy=\"{}\" r=\"{}\" stroke=\"#5577aa\"/>\n",
                role,
                fmt_f(c.re),
                fmt_f(-c.im),
                fmt_f(*r)
            ));
        }
        svg.push_str("  </g>\n");
    }
    svg.push_str("</g>\n<g class=\"sheets\" fill=\"#000000\">\n");
    let dot = half / 200.0;
    for (p, branch, k) in &points {
        svg.push_str(&format!(
            "  <circle class=\"sheet\" data-branch=\"{}\" data-k=\"{}\" cx=\"{}\" cy=\"{}\" r=\"{}\"/>\n",
            branch,
            k,
            fmt_f(p.re),
            fmt_f(-p.im),
            fmt_f(dot)
        ));
    }
    svg.push_str("</g>\n</svg>\n");
    Ok(svg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::puiseux::parse_curve;

    fn inv(dec: &PieceDecomposition) -> Vec<(&'static str, usize)> {
        dec.inventory().into_iter().collect()
    }

    #[test]
    fn example_inventory() {
        let c = crate::testutil::example_curve();
        let dec = decompose(&c, None).unwrap();
        assert_eq!(dec.shear, Some(GaussianRational::from_int(1)));
        assert_eq!(
            inv(&dec),
            vec![("A", 4), ("B", 4), ("B(1)", 1), ("D", 9)]
        );
        // B-piece rates and hole counts
        let mut bs: Vec<(String, usize)> = dec
            .pieces()
            .into_iter()
            .filter(|p| p.kind == PieceKind::B)
            .map(|p| (fmt_rat(&p.rate), p.coeffs.len()))
            .collect();
        bs.sort();
        assert_eq!(
            bs,
            vec![
                ("13/6".to_string(), 3),
                ("13/6".to_string(), 3),
                ("3/2".to_string(), 2),
                ("7/3".to_string(), 3),
            ]
        );
    }

    #[test]
    fn sheared_cusp_inventory() {
        let c = parse_curve("y = x + x^(3/2)").unwrap();
        let dec = decompose(&c, None).unwrap();
        assert_eq!(dec.shear, None);
        assert_eq!(inv(&dec), vec![("A", 1), ("B", 1), ("B(1)", 1), ("D", 2)]);
    }

    #[test]
    fn smooth_branch_inventory() {
        let c = parse_curve("y = x").unwrap();
        let dec = decompose(&c, None).unwrap();
        assert_eq!(inv(&dec), vec![("B(1)", 1), ("D", 1)]);
    }

    #[test]
    fn constants_satisfy_strict_inequalities() {
        let c = crate::testutil::example_curve();
        let dec = decompose(&c, None).unwrap();
        for p in dec.pieces() {
            if p.kind == PieceKind::B {
                let (a, b, g) = (
                    p.alpha.as_ref().unwrap(),
                    p.beta.as_ref().unwrap(),
                    p.gamma.as_ref().unwrap(),
                );
                assert!(a < b);
                for coeff in &p.coeffs {
                    let m_sq = coeff.norm_sq();
                    let lo = a + g;
                    let hi = b - g;
                    assert!(&lo * &lo < m_sq, "alpha + gamma below |a|");
                    assert!(m_sq < &hi * &hi, "|a| + gamma below beta");
                }
            }
        }
    }

    #[test]
    fn piece_tree_mirrors_carrousel_tree() {
        // forgetting constants and inessential levels, the B-skeleton of the
        // piece tree is the carrousel tree of the truncated curve
        let c = crate::testutil::example_curve();
        let dec = decompose(&c, None).unwrap();
        // root B(1) has one sector child chain: A -> B(3/2) with three
        // sub-chains (7/3, 13/6, 13/6)
        let a = &dec.root.children[0];
        assert_eq!(a.kind, PieceKind::A);
        let b32 = &a.children[0];
        assert_eq!(b32.kind, PieceKind::B);
        assert_eq!(b32.rate, rat(3, 2));
        let mut sub: Vec<(String, String)> = b32
            .children
            .iter()
            .map(|c| {
                let inner = if c.kind == PieceKind::A { &c.children[0] } else { c };
                (inner.kind.label().to_string(), fmt_rat(&inner.rate))
            })
            .collect();
        sub.sort();
        assert_eq!(
            sub,
            vec![
                ("B".into(), "13/6".into()),
                ("B".into(), "13/6".into()),
                ("B".into(), "7/3".into()),
            ]
        );
    }

    #[test]
    fn sections_are_disjoint_and_cover_sheets() {
        let c = crate::testutil::example_curve();
        let dec = decompose(&c, None).unwrap();
        let t = largest_disjoint_t(&dec).expect("some disjoint section");
        assert!(t > 0.0);

        // every sheet point lies inside exactly one D disk
        let sheets = dec.curve.sheets();
        let ds: Vec<&Piece> = dec
            .pieces()
            .into_iter()
            .filter(|p| p.kind == PieceKind::D)
            .collect();
        for (i, s) in sheets.iter().enumerate() {
            let mut point = Complex64::new(0.0, 0.0);
            for (e, coeff) in dec.curve.sheet_terms(s) {
                point += coeff.to_c64() * t.powf(rat_to_f64(&e));
            }
            let mut inside = 0;
            for d in &ds {
                let radius = rat_to_f64(d.gamma.as_ref().unwrap()) * t.powf(rat_to_f64(&d.rate));
                if (d.center_at(t) - point).norm() < radius {
                    inside += 1;
                }
            }
            assert_eq!(inside, 1, "sheet {} inside {} disks", i, inside);
        }
    }

    #[test]
    fn align_inserts_inessential_level() {
        let a = parse_curve("y = x + x^(3/2)").unwrap();
        let b = parse_curve("y = x + x^(3/2) + x^2").unwrap();
        let pairing = align_decompositions(&a, &b).unwrap();
        // identical inventories after insertion
        assert_eq!(pairing.left.inventory(), pairing.right.inventory());
        // the cusp side gained a rate-2 B level
        let has_rate2 = pairing
            .left
            .pieces()
            .into_iter()
            .any(|p| p.kind == PieceKind::B && p.rate == rat(2, 1));
        assert!(has_rate2);
        for pair in &pairing.pairs {
            let l = PiecePairing::piece_at(&pairing.left, &pair.left_path);
            let r = PiecePairing::piece_at(&pairing.right, &pair.right_path);
            assert_eq!(l.kind, r.kind);
            assert_eq!(l.rate, r.rate);
            if l.kind == PieceKind::B {
                assert_eq!(l.coeffs.len(), r.coeffs.len());
            }
        }
    }

    #[test]
    fn align_rescaled_example_has_no_insertions() {
        let e = crate::testutil::example_curve();
        let r = parse_curve("y = 5x^(3/2) - 2x^(13/6)\ny = -x^(7/3)").unwrap();
        let pairing = align_decompositions(&e, &r).unwrap();
        let de = decompose(&e, None).unwrap();
        assert_eq!(pairing.left.inventory(), de.inventory());
        assert_eq!(pairing.len(), de.pieces().len());
    }

    #[test]
    fn align_rejects_inequivalent() {
        let a = parse_curve("y = x^(3/2)").unwrap();
        let b = parse_curve("y = x^(5/2)").unwrap();
        match align_decompositions(&a, &b) {
            Err(CurveError::Invalid(msg)) => assert!(msg.contains("not equivalent")),
            other => panic!("expected not-equivalent error, got {:?}", other),
        }
    }

    #[test]
    fn svg_renders_deterministically() {
        let c = crate::testutil::example_curve();
        let dec = decompose(&c, None).unwrap();
        let t = rat(1, 10);
        let svg1 = render_section(&dec, &t).unwrap();
        let svg2 = render_section(&dec, &t).unwrap();
        assert_eq!(svg1, svg2);
        assert_eq!(svg1.matches("class=\"sheet\"").count(), 9);
        // out of range
        assert!(render_section(&dec, &rat(1, 1)).is_err());
    }

    #[test]
    fn smooth_branch_section_has_concentric_circle() {
        let c = parse_curve("y = x").unwrap();
        let dec = decompose(&c, None).unwrap();
        let svg = render_section(&dec, &rat(1, 10)).unwrap();
        assert_eq!(svg.matches("class=\"sheet\"").count(), 1);
        assert!(svg.contains("class=\"cone\""));
    }
}
