//! Space-curve germs and generic linear projections to the plane.
//!
//! A branch in ℂ^N is `γ(w) = (w^n, Σ a_{2i} w^i, …, Σ a_{Ni} w^i)` with the
//! convention `a_{1n} = 1`, `a_{1i} = 0` for `i > n`. A projection
//! `ℓ(z) = (z_1, Σ b_j z_j)` is generic when (a) `Σ_j b_j a_{ji} ≠ 0` at
//! every essential integer exponent of every branch, and (b) for every
//! branch pair on the common grid `n = lcm` and every n-th root of unity
//! `λ = ζ_n^r`, writing `i(λ)` for the smallest exponent where some
//! coordinate has `a_{ji} ≠ λ^i a'_{ji}`, the value
//! `Σ_j b_j a_{ji} − λ^{i} Σ_j b_j a'_{ji}` is nonzero. The restriction of a
//! generic projection is bilipschitz for the outer metric, so the embedded
//! topology of the generic plane image is a complete invariant of the germ.

use crate::carrousel::{build_carrousel_tree, carrousel_code, CanonicalCode};
use crate::contact::q_map;
use crate::error::CurveError;
use crate::puiseux::{Branch, Curve, RawBranch, Scanner};
use crate::scalar::{tagged_equal, GaussianRational, RootOfUnityTag, TaggedScalar};
use num_integer::Integer;

/// One branch of a space curve. `coords[j]` holds the terms of coordinate
/// `j + 2`; the first coordinate is always `w^n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpaceBranch {
    n: u64,
    coords: Vec<Vec<(u64, GaussianRational)>>,
}

impl SpaceBranch {
    pub fn new(
        n: u64,
        coords: Vec<Vec<(u64, GaussianRational)>>,
    ) -> Result<SpaceBranch, CurveError> {
        if n == 0 {
            return Err(CurveError::Invalid("branch multiplicity must be positive".into()));
        }
        if coords.is_empty() {
            return Err(CurveError::Invalid(
                "space branch needs at least one extra coordinate".into(),
            ));
        }
        let mut cleaned = Vec::new();
        for terms in coords {
            let mut sorted = terms;
            sorted.sort_by_key(|(i, _)| *i);
            let mut merged: Vec<(u64, GaussianRational)> = Vec::new();
            for (i, c) in sorted {
                match merged.last_mut() {
                    Some((j, acc)) if *j == i => *acc = acc.add(&c),
                    _ => merged.push((i, c)),
                }
            }
            merged.retain(|(_, c)| !c.is_zero());
            if let Some((i, _)) = merged.iter().find(|(i, _)| *i < n) {
                return Err(CurveError::TangentToYAxis(format!(
                    "coordinate exponent {} below the multiplicity {}",
                    i, n
                )));
            }
            cleaned.push(merged);
        }
        // primitivity over the joint support
        let mut d = n;
        for terms in &cleaned {
            for (i, _) in terms {
                d = d.gcd(i);
            }
        }
        if d > 1 {
            let reduced = cleaned
                .into_iter()
                .map(|terms| terms.into_iter().map(|(i, c)| (i / d, c)).collect())
                .collect();
            Ok(SpaceBranch { n: n / d, coords: reduced })
        } else {
            Ok(SpaceBranch { n, coords: cleaned })
        }
    }

    pub fn multiplicity(&self) -> u64 {
        self.n
    }

    /// Ambient coordinate count N (the first coordinate included).
    pub fn ambient_dim(&self) -> usize {
        self.coords.len() + 1
    }

    pub fn coords(&self) -> &[Vec<(u64, GaussianRational)>] {
        &self.coords
    }

    /// Joint support `A = {i : some a_{ji} ≠ 0} ∪ {n}`, sorted.
    pub fn support(&self) -> Vec<u64> {
        let mut s = vec![self.n];
        for terms in &self.coords {
            for (i, _) in terms {
                if !s.contains(i) {
                    s.push(*i);
                }
            }
        }
        s.sort_unstable();
        s
    }

    /// Essential integer exponents via the gcd-drop rule on the joint
    /// support.
    pub fn essential_exponents(&self) -> Vec<u64> {
        let mut out = Vec::new();
        let mut g = 0u64;
        for i in self.support() {
            let next = g.gcd(&i);
            if g != 0 && next < g && i != self.n {
                out.push(i);
            }
            g = next;
        }
        out
    }

    fn coeff(&self, j: usize, i: u64) -> GaussianRational {
        self.coords
            .get(j)
            .and_then(|terms| terms.iter().find(|(e, _)| *e == i))
            .map(|(_, c)| c.clone())
            .unwrap_or_else(GaussianRational::zero)
    }

    /// The branch re-parametrized on the grid of multiplicity `m` (a
    /// multiple of `n`): exponents scale by `m / n`.
    fn rescaled(&self, m: u64) -> SpaceBranch {
        assert!(m % self.n == 0);
        let f = m / self.n;
        SpaceBranch {
            n: m,
            coords: self
                .coords
                .iter()
                .map(|terms| terms.iter().map(|(i, c)| (i * f, c.clone())).collect())
                .collect(),
        }
    }
}

/// Reduced space curve germ.
#[derive(Debug, Clone)]
pub struct SpaceCurve {
    branches: Vec<SpaceBranch>,
}

impl SpaceCurve {
    pub fn new(branches: Vec<SpaceBranch>) -> Result<SpaceCurve, CurveError> {
        if branches.is_empty() {
            return Err(CurveError::Invalid("curve needs at least one branch".into()));
        }
        let dim = branches.iter().map(|b| b.ambient_dim()).max().unwrap();
        // pad to a common ambient dimension with zero coordinates
        let branches: Vec<SpaceBranch> = branches
            .into_iter()
            .map(|mut b| {
                while b.ambient_dim() < dim {
                    b.coords.push(Vec::new());
                }
                b
            })
            .collect();
        for i in 0..branches.len() {
            for j in (i + 1)..branches.len() {
                if space_branches_equal(&branches[i], &branches[j]) {
                    return Err(CurveError::NonReduced(format!(
                        "branches {} and {} coincide",
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        Ok(SpaceCurve { branches })
    }

    pub fn branches(&self) -> &[SpaceBranch] {
        &self.branches
    }

    pub fn ambient_dim(&self) -> usize {
        self.branches[0].ambient_dim()
    }
}

fn space_branches_equal(a: &SpaceBranch, b: &SpaceBranch) -> bool {
    if a.n != b.n || a.support() != b.support() || a.coords.len() != b.coords.len() {
        return false;
    }
    'twist: for k in 0..a.n {
        for j in 0..a.coords.len() {
            for i in a.coords[j]
                .iter()
                .map(|(i, _)| *i)
                .chain(b.coords[j].iter().map(|(i, _)| *i))
            {
                let residue = ((k as u128 * i as u128) % a.n as u128) as i64;
                let twisted = TaggedScalar::term(a.coeff(j, i), RootOfUnityTag::new(a.n, residue));
                let plain = TaggedScalar::from_gaussian(b.coeff(j, i));
                if !tagged_equal(&twisted, &plain) {
                    continue 'twist;
                }
            }
        }
        return true;
    }
    false
}

/// Linear projection `(z_1, …, z_N) ↦ (z_1, Σ b_j z_j)`. The shear
/// component `b_1` defaults to zero; `(b_2, …, b_N)` must not all vanish.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Direction {
    pub b1: GaussianRational,
    pub rest: Vec<GaussianRational>,
}

impl Direction {
    pub fn new(rest: Vec<GaussianRational>) -> Result<Direction, CurveError> {
        if rest.iter().all(|c| c.is_zero()) {
            return Err(CurveError::Invalid(
                "projection direction must have a nonzero coefficient".into(),
            ));
        }
        Ok(Direction { b1: GaussianRational::zero(), rest })
    }

    pub fn from_ints(v: &[i64]) -> Direction {
        Direction {
            b1: GaussianRational::zero(),
            rest: v.iter().map(|n| GaussianRational::from_int(*n)).collect(),
        }
    }

    /// `Σ_{j≥2} b_j a_{ji}` for a branch, on the branch's own grid.
    fn pair_sum(&self, b: &SpaceBranch, i: u64) -> GaussianRational {
        let mut acc = GaussianRational::zero();
        for (j, coeff) in self.rest.iter().enumerate() {
            acc = acc.add(&coeff.mul(&b.coeff(j, i)));
        }
        acc
    }
}

impl std::fmt::Display for Direction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.rest.iter().map(|c| c.to_string()).collect();
        write!(f, "({})", parts.join(", "))
    }
}

/// Outcome of the genericity test; deterministic: the first failing
/// condition in branch order, then pair and residue order, is reported.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GenericityVerdict {
    Generic,
    /// `Σ_j b_j a_{ji} = 0` at an essential integer exponent `i` of a branch.
    FailsBranch { branch: usize, exponent: u64 },
    /// The pair condition fails for `λ = ζ_n^r` at the first differing
    /// exponent `i`.
    FailsPair { branches: (usize, usize), residue: u64, exponent: u64 },
}

impl GenericityVerdict {
    pub fn is_generic(&self) -> bool {
        matches!(self, GenericityVerdict::Generic)
    }

    pub fn to_json(&self) -> serde_json::Value {
        match self {
            GenericityVerdict::Generic => serde_json::json!({ "generic": true }),
            GenericityVerdict::FailsBranch { branch, exponent } => serde_json::json!({
                "generic": false,
                "failure": { "kind": "branch", "branch": branch, "exponent": exponent },
            }),
            GenericityVerdict::FailsPair { branches, residue, exponent } => serde_json::json!({
                "generic": false,
                "failure": {
                    "kind": "pair",
                    "branches": [branches.0, branches.1],
                    "residue": residue,
                    "exponent": exponent,
                },
            }),
        }
    }
}

impl std::fmt::Display for GenericityVerdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            GenericityVerdict::Generic => write!(f, "GENERIC"),
            GenericityVerdict::FailsBranch { branch, exponent } => {
                write!(f, "FAILS_BRANCH(branch {}, exponent {})", branch + 1, exponent)
            }
            GenericityVerdict::FailsPair { branches, residue, exponent } => write!(
                f,
                "FAILS_PAIR(branches {} and {}, root residue {}, exponent {})",
                branches.0 + 1,
                branches.1 + 1,
                residue,
                exponent
            ),
        }
    }
}

/// Test the two genericity conditions for a direction.
pub fn is_generic(c: &SpaceCurve, d: &Direction) -> Result<GenericityVerdict, CurveError> {
    // (a) per-branch condition at essential integer exponents
    for (bi, b) in c.branches().iter().enumerate() {
        for i in b.essential_exponents() {
            if d.pair_sum(b, i).is_zero() {
                return Ok(GenericityVerdict::FailsBranch { branch: bi, exponent: i });
            }
        }
    }
    // (b) pairwise condition over all n-th roots of unity on the common grid
    for b1 in 0..c.branches().len() {
        for b2 in (b1 + 1)..c.branches().len() {
            let n = c.branches()[b1].n.lcm(&c.branches()[b2].n);
            let a = c.branches()[b1].rescaled(n);
            let b = c.branches()[b2].rescaled(n);
            let mut support: Vec<u64> =
                a.support().into_iter().chain(b.support().into_iter()).collect();
            support.sort_unstable();
            support.dedup();
            let ncoords = a.coords().len().max(b.coords().len());
            for r in 0..n {
                // smallest exponent where the λ-twisted series differ
                let mut i_lambda = None;
                'exps: for &i in &support {
                    for j in 0..ncoords {
                        let plain = TaggedScalar::from_gaussian(a.coeff(j, i));
                        let residue = ((r as u128 * i as u128) % n as u128) as i64;
                        let twisted =
                            TaggedScalar::term(b.coeff(j, i), RootOfUnityTag::new(n, residue));
                        if !tagged_equal(&plain, &twisted) {
                            i_lambda = Some(i);
                            break 'exps;
                        }
                    }
                }
                let i = match i_lambda {
                    Some(i) => i,
                    None => {
                        return Err(CurveError::NonReduced(format!(
                            "branches {} and {} coincide up to the root zeta_{}^{}",
                            b1 + 1,
                            b2 + 1,
                            n,
                            r
                        )))
                    }
                };
                let lhs = TaggedScalar::from_gaussian(d.pair_sum(&a, i));
                let residue = ((r as u128 * i as u128) % n as u128) as i64;
                let rhs = TaggedScalar::term(d.pair_sum(&b, i), RootOfUnityTag::new(n, residue));
                if tagged_equal(&lhs, &rhs) {
                    return Ok(GenericityVerdict::FailsPair {
                        branches: (b1, b2),
                        residue: r,
                        exponent: i,
                    });
                }
            }
        }
    }
    Ok(GenericityVerdict::Generic)
}

/// Search integer directions by increasing max-norm; within one norm the
/// entries run through `0, 1, −1, 2, −2, …` lexicographically, so axis-like
/// candidates come first. Returns the first direction with verdict GENERIC
/// (the bad set is a finite union of proper linear conditions, so the search
/// terminates).
pub fn find_generic_direction(c: &SpaceCurve) -> Result<Direction, CurveError> {
    let len = c.ambient_dim() - 1;
    for g in 1..=64i64 {
        let mut order = vec![0i64];
        for a in 1..=g {
            order.push(a);
            order.push(-a);
        }
        let mut idx = vec![0usize; len];
        loop {
            let cand: Vec<i64> = idx.iter().map(|&i| order[i]).collect();
            let norm = cand.iter().map(|v| v.abs()).max().unwrap_or(0);
            if norm == g {
                let dir = Direction::from_ints(&cand);
                if is_generic(c, &dir)?.is_generic() {
                    return Ok(dir);
                }
            }
            // odometer increment over the entry order
            let mut pos = len;
            let mut done = false;
            loop {
                if pos == 0 {
                    done = true;
                    break;
                }
                pos -= 1;
                idx[pos] += 1;
                if idx[pos] < order.len() {
                    break;
                }
                idx[pos] = 0;
            }
            if done {
                break;
            }
        }
    }
    Err(CurveError::Internal(
        "no generic direction with entries up to 64 (should be unreachable)".into(),
    ))
}

/// Result of projecting a space curve.
#[derive(Debug, Clone)]
pub struct Projected {
    pub curve: Curve,
    pub verdict: GenericityVerdict,
    pub warnings: Vec<String>,
}

/// Project along a direction. Non-generic directions are allowed; collapses
/// are reported as warnings, but a projection identifying two branches is an
/// error.
pub fn project(c: &SpaceCurve, d: &Direction) -> Result<Projected, CurveError> {
    let verdict = is_generic(c, d)?;
    let mut warnings = Vec::new();
    let mut branches = Vec::new();
    for (bi, b) in c.branches().iter().enumerate() {
        let mut terms: Vec<(u64, GaussianRational)> = Vec::new();
        for i in b.support() {
            let mut coeff = d.pair_sum(b, i);
            if i == b.n {
                coeff = coeff.add(&d.b1);
            }
            if !coeff.is_zero() {
                terms.push((i, coeff));
            }
        }
        if terms.is_empty() && b.n > 1 {
            warnings.push(format!(
                "branch {}: projected onto a multiple cover of the x-axis (non-generic collapse)",
                bi + 1
            ));
        }
        let plane = Branch::new(b.n, terms)?;
        if plane.multiplicity() < b.n && b.n > 1 {
            warnings.push(format!(
                "branch {}: multiplicity dropped from {} to {} (non-generic collapse)",
                bi + 1,
                b.n,
                plane.multiplicity()
            ));
        }
        branches.push(plane);
    }
    let curve = Curve::new(branches)?;
    Ok(Projected { curve, verdict, warnings })
}

/// Complete outer-Lipschitz invariant of the space germ: the canonical code
/// of the carrousel tree of its generic plane projection.
pub fn generic_projection_topology(c: &SpaceCurve) -> Result<CanonicalCode, CurveError> {
    let d = find_generic_direction(c)?;
    let p = project(c, &d)?;
    let t = build_carrousel_tree(&q_map(&p.curve)?)?;
    Ok(carrousel_code(&t))
}

/// Parse a space curve: `param (w^n, p_2(w), …, p_N(w))` lines; plain
/// `y = …` series lines are accepted as plane branches (N = 2). Branches are
/// padded with zero coordinates up to the largest ambient dimension.
pub fn parse_space_curve(text: &str) -> Result<SpaceCurve, CurveError> {
    let mut branches = Vec::new();
    for (idx, raw_line) in text.lines().enumerate() {
        let line = match raw_line.find('#') {
            Some(i) => &raw_line[..i],
            None => raw_line,
        };
        if line.trim().is_empty() {
            continue;
        }
        let mut sc = Scanner::new(line, idx + 1);
        match sc.parse_branch_line()? {
            RawBranch::Param { n, polys } => branches.push(SpaceBranch::new(n, polys)?),
            RawBranch::Series(terms) => {
                let plane = crate::puiseux::normalize_series(terms)?;
                branches.push(SpaceBranch::new(
                    plane.multiplicity(),
                    vec![plane.terms().to_vec()],
                )?);
            }
        }
    }
    SpaceCurve::new(branches)
}

impl std::fmt::Display for SpaceCurve {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for (idx, b) in self.branches.iter().enumerate() {
            if idx > 0 {
                writeln!(f)?;
            }
            write!(f, "param (w^{}", b.n)?;
            for coord in &b.coords {
                if coord.is_empty() {
                    write!(f, ", 0")?;
                } else {
                    let mut parts = Vec::new();
                    for (i, c) in coord {
                        let prefix = if *c == GaussianRational::one() {
                            String::new()
                        } else {
                            format!("{}*", c)
                        };
                        parts.push(format!("{}w^{}", prefix, i));
                    }
                    write!(f, ", {}", parts.join(" + "))?;
                }
            }
            write!(f, ")")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::puiseux::parse_curve;

    fn s1() -> SpaceCurve {
        parse_space_curve("param (w^2, w^3, w^5)").unwrap()
    }

    fn s2() -> SpaceCurve {
        parse_space_curve("param (w^1, w^2, w^2)\nparam (w^1, w^2, -w^2)").unwrap()
    }

    #[test]
    fn s1_essential_exponents() {
        let c = s1();
        let b = &c.branches()[0];
        // 5 is inessential: gcd{2,3} is already 1
        assert_eq!(b.essential_exponents(), vec![3]);
    }

    #[test]
    fn s1_verdicts() {
        let c = s1();
        assert_eq!(
            is_generic(&c, &Direction::from_ints(&[1, 0])).unwrap(),
            GenericityVerdict::Generic
        );
        assert_eq!(
            is_generic(&c, &Direction::from_ints(&[0, 1])).unwrap(),
            GenericityVerdict::FailsBranch { branch: 0, exponent: 3 }
        );
    }

    #[test]
    fn s2_pair_condition() {
        let c = s2();
        assert_eq!(
            is_generic(&c, &Direction::from_ints(&[1, 0])).unwrap(),
            GenericityVerdict::FailsPair { branches: (0, 1), residue: 0, exponent: 2 }
        );
        assert_eq!(
            is_generic(&c, &Direction::from_ints(&[1, 1])).unwrap(),
            GenericityVerdict::Generic
        );
    }

    #[test]
    fn find_direction_s1() {
        // (0, ±1) fail the branch condition at exponent 3; (1, 0) passes
        assert_eq!(find_generic_direction(&s1()).unwrap(), Direction::from_ints(&[1, 0]));
    }

    #[test]
    fn find_direction_s2() {
        // every direction with b_3 ≠ 0 passes both conditions, and the
        // search order reaches (0, 1) first
        let d = find_generic_direction(&s2()).unwrap();
        assert_eq!(d, Direction::from_ints(&[0, 1]));
        assert!(is_generic(&s2(), &d).unwrap().is_generic());
    }

    #[test]
    fn projection_outputs() {
        let p = project(&s1(), &Direction::from_ints(&[1, 0])).unwrap();
        assert!(p.verdict.is_generic());
        assert!(p.warnings.is_empty());
        let cusp = parse_curve("y = x^(3/2)").unwrap();
        assert_eq!(p.curve.branches(), cusp.branches());

        let p = project(&s1(), &Direction::from_ints(&[0, 1])).unwrap();
        assert!(!p.verdict.is_generic());
        let b = &p.curve.branches()[0];
        assert_eq!(b.multiplicity(), 2);
        assert_eq!(b.terms()[0].0, 5);

        let p = project(&s2(), &Direction::from_ints(&[1, 1])).unwrap();
        let expect = parse_curve("y = 2x^2\ny = 0").unwrap();
        assert_eq!(p.curve.branches(), expect.branches());
    }

    #[test]
    fn generic_topology_codes() {
        let cusp = parse_curve("y = x^(3/2)").unwrap();
        let cusp_code =
            carrousel_code(&build_carrousel_tree(&q_map(&cusp).unwrap()).unwrap());
        assert_eq!(generic_projection_topology(&s1()).unwrap(), cusp_code);

        // two smooth branches with contact exponent 2
        let pair = parse_curve("y = 0\ny = x^2").unwrap();
        let pair_code =
            carrousel_code(&build_carrousel_tree(&q_map(&pair).unwrap()).unwrap());
        assert_eq!(generic_projection_topology(&s2()).unwrap(), pair_code);
    }

    #[test]
    fn plane_curve_embeds_trivially() {
        let e_space =
            parse_space_curve("param (w^6, w^9 + w^13, 0)\nparam (w^3, w^7, 0)").unwrap();
        assert_eq!(
            find_generic_direction(&e_space).unwrap(),
            Direction::from_ints(&[1, 0])
        );
        let e = crate::testutil::example_curve();
        let e_code = carrousel_code(&build_carrousel_tree(&q_map(&e).unwrap()).unwrap());
        assert_eq!(generic_projection_topology(&e_space).unwrap(), e_code);
    }

    #[test]
    fn direction_scaling_invariance() {
        let c = s2();
        let d = Direction::from_ints(&[1, 1]);
        for scale in [
            GaussianRational::from_int(3),
            GaussianRational::i(),
            GaussianRational::new(crate::scalar::rat(-2, 5), crate::scalar::rat(1, 3)),
        ] {
            let scaled = Direction {
                b1: GaussianRational::zero(),
                rest: d.rest.iter().map(|c| c.mul(&scale)).collect(),
            };
            assert_eq!(
                is_generic(&c, &d).unwrap().is_generic(),
                is_generic(&c, &scaled).unwrap().is_generic()
            );
        }
    }

    #[test]
    fn non_reduced_space_curve() {
        match parse_space_curve("param (w^2, w^3)\nparam (w^2, -w^3)") {
            Err(CurveError::NonReduced(_)) => {}
            other => panic!("expected non-reduced, got {:?}", other),
        }
    }
}
