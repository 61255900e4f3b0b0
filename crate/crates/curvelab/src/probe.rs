//! Floating-point laboratory.
//!
//! Samples the μ section points of a curve on a grid of section parameters,
//! estimates the contact map by log–log regression on pairwise distances,
//! reconstructs the carrousel tree from metric data alone (rounding the
//! fitted exponents to bounded-denominator rationals), and runs the
//! bilipschitz-ratio experiment: for two curves with matching branch data
//! the distance ratio between conjugate sheet pairs tends to the constant
//! `|a_{i₀}| / |b_{i₀}|` given by the first differing essential coefficient.

use crate::carrousel::{build_from_matrix, CarrouselTree};
use crate::error::CurveError;
use crate::puiseux::Curve;
use crate::scalar::{rat_to_f64, ExtendedRational, Rational};
use num_bigint::BigInt;
use num_complex::Complex64;

/// Strictly decreasing positive section parameters.
#[derive(Debug, Clone)]
pub struct SampleGrid {
    pub ts: Vec<f64>,
}

impl SampleGrid {
    /// Geometric grid from `t_max` down to `t_min`.
    pub fn geometric(t_max: f64, t_min: f64, count: usize) -> Result<SampleGrid, CurveError> {
        if !(t_min > 0.0 && t_max > t_min && count >= 2) {
            return Err(CurveError::Invalid(
                "grid needs 0 < t_min < t_max and at least two points".into(),
            ));
        }
        let ratio = (t_min / t_max).powf(1.0 / (count as f64 - 1.0));
        let ts = (0..count).map(|i| t_max * ratio.powi(i as i32)).collect();
        Ok(SampleGrid { ts })
    }

    /// Default: 20 points from 1e−2 down to 1e−4.
    pub fn default_grid() -> SampleGrid {
        Self::geometric(1e-2, 1e-4, 20).expect("valid default grid")
    }
}

/// Numeric values of all sheet series at `x = t`, in sheet order.
pub fn sample_points(c: &Curve, t: f64) -> Vec<Complex64> {
    c.sheets()
        .iter()
        .map(|s| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (e, coeff) in c.sheet_terms(s) {
                acc += coeff.to_c64() * t.powf(rat_to_f64(&e));
            }
            acc
        })
        .collect()
}

/// Least-squares slope and residual of `ys` against `xs`.
fn fit_slope(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (x, y) in xs.iter().zip(ys.iter()) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = xs
        .iter()
        .zip(ys.iter())
        .map(|(x, y)| {
            let r = y - (intercept + slope * x);
            r * r
        })
        .sum();
    (slope, sse)
}

#[derive(Debug, Clone)]
pub struct EstimatedQMap {
    pub mu: usize,
    /// Fitted exponents; the diagonal holds `f64::INFINITY`.
    pub slopes: Vec<Vec<f64>>,
    /// Total sum of squared log-residuals over all pairs.
    pub residual: f64,
}

/// Fit `log d(p_j(t), p_k(t))` against `log t` for every sheet pair. Pairs
/// whose distance underflows (below 1e−300) at some `t` are fitted on the
/// surviving prefix of the grid.
pub fn estimate_qmap(c: &Curve, grid: &SampleGrid) -> Result<EstimatedQMap, CurveError> {
    let points: Vec<Vec<Complex64>> = grid.ts.iter().map(|t| sample_points(c, *t)).collect();
    estimate_from_points(&points, grid)
}

pub fn estimate_from_points(
    points: &[Vec<Complex64>],
    grid: &SampleGrid,
) -> Result<EstimatedQMap, CurveError> {
    if grid.ts.len() < 3 {
        return Err(CurveError::Invalid("grid needs at least 3 points".into()));
    }
    if points.len() != grid.ts.len() {
        return Err(CurveError::Invalid("one point list per grid value required".into()));
    }
    let mu = points[0].len();
    if points.iter().any(|p| p.len() != mu) {
        return Err(CurveError::Invalid("inconsistent point counts across the grid".into()));
    }
    let mut slopes = vec![vec![f64::INFINITY; mu]; mu];
    let mut residual = 0.0;
    for j in 0..mu {
        for k in (j + 1)..mu {
            let mut xs = Vec::new();
            let mut ys = Vec::new();
            for (ti, t) in grid.ts.iter().enumerate() {
                let d = (points[ti][j] - points[ti][k]).norm();
                if d < 1e-300 {
                    break; // underflow guard: keep the surviving prefix
                }
                xs.push(t.ln());
                ys.push(d.ln());
            }
            if xs.len() < 3 {
                return Err(CurveError::Invalid(format!(
                    "pair ({}, {}) has fewer than 3 usable samples",
                    j, k
                )));
            }
            let (slope, sse) = fit_slope(&xs, &ys);
            slopes[j][k] = slope;
            slopes[k][j] = slope;
            residual += sse;
        }
    }
    Ok(EstimatedQMap { mu, slopes, residual })
}

/// Best rational approximation with bounded denominator via continued
/// fractions (convergents and final semiconvergents).
pub fn best_rational_approx(x: f64, max_den: u64) -> Rational {
    assert!(max_den >= 1);
    assert!(x.is_finite());
    let negative = x < 0.0;
    let mut v = x.abs();
    // convergents p/q of the continued fraction of |x|
    let (mut p0, mut q0, mut p1, mut q1) = (1i128, 0i128, v.floor() as i128, 1i128);
    v -= v.floor();
    while v > 1e-12 && q1 <= max_den as i128 {
        v = 1.0 / v;
        let a = v.floor() as i128;
        v -= v.floor();
        let (p2, q2) = (a * p1 + p0, a * q1 + q0);
        if q2 > max_den as i128 {
            // best semiconvergent still within the bound
            let k = (max_den as i128 - q0) / q1;
            let (ps, qs) = (k * p1 + p0, k * q1 + q0);
            let cand = |p: i128, q: i128| (x.abs() - p as f64 / q as f64).abs();
            let (bp, bq) = if qs >= 1 && 2 * k >= v.floor() as i128 + 1 {
                if cand(ps, qs) < cand(p1, q1) { (ps, qs) } else { (p1, q1) }
            } else {
                (p1, q1)
            };
            let sign = if negative { -1 } else { 1 };
            return Rational::new(BigInt::from(sign * bp), BigInt::from(bq));
        }
        p0 = p1;
        q0 = q1;
        p1 = p2;
        q1 = q2;
    }
    let sign = if negative { -1 } else { 1 };
    Rational::new(BigInt::from(sign * p1), BigInt::from(q1))
}

/// Reconstruct the carrousel tree from raw per-section point lists: fit
/// pairwise exponents, round them to rationals with denominator at most
/// `den_bound`, and build the tree from the rounded matrix.
///
/// The fit runs on the small-`t` half of the grid, where the contribution
/// of deeper series terms to the log-distance slope is negligible; the
/// full-grid fit is biased by a few hundredths, more than the gap between
/// neighboring bounded-denominator rationals. The separation scale at the
/// largest `t` (an eighth of the smallest pairwise distance) guards against
/// coincident points.
pub fn recover_tree_numeric(
    points: &[Vec<Complex64>],
    grid: &SampleGrid,
    den_bound: u64,
) -> Result<(CarrouselTree, Vec<Vec<ExtendedRational>>), CurveError> {
    if den_bound < 1 {
        return Err(CurveError::Invalid("denominator bound must be at least 1".into()));
    }
    let keep = (grid.ts.len() / 2).max(3).min(grid.ts.len());
    let skip = grid.ts.len() - keep;
    let tail_grid = SampleGrid { ts: grid.ts[skip..].to_vec() };
    let tail_points = &points[skip..];
    let est = estimate_from_points(tail_points, &tail_grid)?;
    // cluster separation guard at the largest t
    if est.mu > 1 {
        let first = &points[0];
        let mut min_d = f64::INFINITY;
        for j in 0..est.mu {
            for k in (j + 1)..est.mu {
                min_d = min_d.min((first[j] - first[k]).norm());
            }
        }
        let cluster_radius = min_d / 8.0;
        if !(cluster_radius > 0.0) {
            return Err(CurveError::Invalid(
                "coincident section points at the largest t".into(),
            ));
        }
    }
    let mut matrix = vec![vec![ExtendedRational::Infinity; est.mu]; est.mu];
    for j in 0..est.mu {
        for k in 0..est.mu {
            if j != k {
                matrix[j][k] =
                    ExtendedRational::Finite(best_rational_approx(est.slopes[j][k], den_bound));
            }
        }
    }
    let tree = build_from_matrix(&matrix)?;
    Ok((tree, matrix))
}

/// Per-sheet-pair statistics of the distance-ratio experiment.
#[derive(Debug, Clone)]
pub struct PairRatio {
    pub branch_pair: (usize, usize),
    /// Conjugate sheet indices (k, k') within the branch.
    pub sheet_pair: (u64, u64),
    /// First exponent (on the branch grid) where the two sheets differ.
    pub i0: u64,
    /// Predicted limit `|a_{i0}| / |b_{i0}|` from the exact coefficients.
    pub predicted: f64,
    pub fitted: f64,
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Clone)]
pub struct RatioStats {
    pub pairs: Vec<PairRatio>,
}

/// Distance-ratio experiment between two curves under a branch pairing.
/// Paired branches must have equal multiplicity and equal essential integer
/// exponent sets. For every conjugate sheet pair the ratio
/// `d(p_j¹(t), p_k¹(t)) / d(p_j²(t), p_k²(t))` is tracked along the grid;
/// its limit is the predicted constant.
pub fn bilipschitz_ratio_experiment(
    c1: &Curve,
    c2: &Curve,
    pairing: &[(usize, usize)],
    grid: &SampleGrid,
) -> Result<RatioStats, CurveError> {
    for (b1, b2) in pairing {
        let lhs = c1
            .branches()
            .get(*b1)
            .ok_or_else(|| CurveError::Invalid(format!("no branch {} in the first curve", b1)))?;
        let rhs = c2
            .branches()
            .get(*b2)
            .ok_or_else(|| CurveError::Invalid(format!("no branch {} in the second curve", b2)))?;
        if lhs.multiplicity() != rhs.multiplicity()
            || lhs.essential_exponents() != rhs.essential_exponents()
        {
            return Err(CurveError::Invalid(format!(
                "pairing invalid: branches {} and {} differ in multiplicity or essential exponents",
                b1, b2
            )));
        }
    }

    let mut pairs = Vec::new();
    for (b1, b2) in pairing {
        let lhs = &c1.branches()[*b1];
        let rhs = &c2.branches()[*b2];
        let n = lhs.multiplicity();
        for k1 in 0..n {
            for k2 in (k1 + 1)..n {
                // first exponent with w^i ≠ w'^i, i.e. n ∤ i·(k1 − k2)
                let diff = (k2 - k1) as u128;
                let i0 = lhs
                    .terms()
                    .iter()
                    .map(|(i, _)| *i)
                    .find(|i| (*i as u128 * diff) % n as u128 != 0)
                    .unwrap_or(n);
                let a0 = lhs
                    .coeff(i0)
                    .map(|c| c.to_c64().norm())
                    .unwrap_or(0.0);
                let b0 = rhs
                    .coeff(i0)
                    .map(|c| c.to_c64().norm())
                    .unwrap_or(0.0);
                let predicted = if b0 > 0.0 { a0 / b0 } else { f64::NAN };

                let mut fitted = f64::NAN;
                let mut lo = f64::INFINITY;
                let mut hi = f64::NEG_INFINITY;
                for t in &grid.ts {
                    let eval = |branch: &crate::puiseux::Branch, k: u64| {
                        let mut acc = Complex64::new(0.0, 0.0);
                        for (e, coeff) in branch.sheet_terms(k) {
                            acc += coeff.to_c64() * t.powf(rat_to_f64(&e));
                        }
                        acc
                    };
                    let d1 = (eval(lhs, k1) - eval(lhs, k2)).norm();
                    let d2 = (eval(rhs, k1) - eval(rhs, k2)).norm();
                    if d2 < 1e-300 {
                        continue;
                    }
                    let r = d1 / d2;
                    lo = lo.min(r);
                    hi = hi.max(r);
                    fitted = r; // the grid decreases, so this is the smallest t
                }
                pairs.push(PairRatio {
                    branch_pair: (*b1, *b2),
                    sheet_pair: (k1, k2),
                    i0,
                    predicted,
                    fitted,
                    min: lo,
                    max: hi,
                });
            }
        }
    }
    Ok(RatioStats { pairs })
}

/// CSV rows `t,j,k,distance` of all pairwise distances over the grid.
pub fn distances_csv(c: &Curve, grid: &SampleGrid) -> String {
    let mut out = String::from("t,j,k,distance\n");
    for t in &grid.ts {
        let pts = sample_points(c, *t);
        for j in 0..pts.len() {
            for k in (j + 1)..pts.len() {
                out.push_str(&format!(
                    "{:e},{},{},{:e}\n",
                    t,
                    j,
                    k,
                    (pts[j] - pts[k]).norm()
                ));
            }
        }
    }
    out
}

pub fn ratio_stats_json(r: &RatioStats) -> serde_json::Value {
    serde_json::json!({
        "pairs": r.pairs.iter().map(|p| serde_json::json!({
            "branches": [p.branch_pair.0, p.branch_pair.1],
            "sheets": [p.sheet_pair.0, p.sheet_pair.1],
            "i0": p.i0,
            "predicted": p.predicted,
            "fitted": p.fitted,
            "min": p.min,
            "max": p.max,
        })).collect::<Vec<_>>(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::carrousel::{build_carrousel_tree, carrousel_code};
    use crate::contact::q_map;
    use crate::puiseux::parse_curve;
    use crate::scalar::rat;

    #[test]
    fn sample_point_examples() {
        let c = parse_curve("y = 2x").unwrap();
        let p = sample_points(&c, 0.5);
        assert_eq!(p.len(), 1);
        assert!((p[0] - Complex64::new(1.0, 0.0)).norm() < 1e-12);

        let cusp = parse_curve("y = x^(3/2)").unwrap();
        let p = sample_points(&cusp, 0.04);
        assert_eq!(p.len(), 2);
        let mut re: Vec<f64> = p.iter().map(|z| z.re).collect();
        re.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((re[0] + 0.008).abs() < 1e-12);
        assert!((re[1] - 0.008).abs() < 1e-12);

        let e = crate::testutil::example_curve();
        let p = sample_points(&e, 0.01);
        for z in &p[6..9] {
            assert!((z.norm() - 0.01f64.powf(7.0 / 3.0)).abs() < 1e-8);
        }
    }

    #[test]
    fn estimated_qmap_matches_exact() {
        let e = crate::testutil::example_curve();
        let est = estimate_qmap(&e, &SampleGrid::default_grid()).unwrap();
        let q = q_map(&e).unwrap();
        for j in 0..est.mu {
            for k in 0..est.mu {
                if j != k {
                    let exact = rat_to_f64(q.value(j, k).as_finite().unwrap());
                    assert!(
                        (est.slopes[j][k] - exact).abs() <= 0.05,
                        "pair ({}, {}): {} vs {}",
                        j,
                        k,
                        est.slopes[j][k],
                        exact
                    );
                }
            }
        }
    }

    #[test]
    fn estimated_qmap_simple_cases() {
        let lines = parse_curve("y = x\ny = 2x").unwrap();
        let est = estimate_qmap(&lines, &SampleGrid::default_grid()).unwrap();
        assert!((est.slopes[0][1] - 1.0).abs() <= 0.05);

        let par = parse_curve("y = 0\ny = x^2").unwrap();
        let est = estimate_qmap(&par, &SampleGrid::default_grid()).unwrap();
        assert!((est.slopes[0][1] - 2.0).abs() <= 0.05);
    }

    #[test]
    fn best_rational_approx_examples() {
        assert_eq!(best_rational_approx(1.5, 24), rat(3, 2));
        assert_eq!(best_rational_approx(2.1666667, 24), rat(13, 6));
        assert_eq!(best_rational_approx(2.3333333, 24), rat(7, 3));
        assert_eq!(best_rational_approx(0.99997, 24), rat(1, 1));
        assert_eq!(best_rational_approx(-1.4999, 6), rat(-3, 2));
        assert_eq!(best_rational_approx(std::f64::consts::PI, 1), rat(3, 1));
    }

    #[test]
    fn recover_tree_from_samples() {
        let e = crate::testutil::example_curve();
        let grid = SampleGrid::default_grid();
        let points: Vec<Vec<Complex64>> =
            grid.ts.iter().map(|t| sample_points(&e, *t)).collect();
        let (tree, matrix) = recover_tree_numeric(&points, &grid, 24).unwrap();
        let symbolic = build_carrousel_tree(&q_map(&e).unwrap()).unwrap();
        assert_eq!(carrousel_code(&tree), carrousel_code(&symbolic));
        assert_eq!(matrix[0][1], ExtendedRational::finite(rat(3, 2)));

        // single point per t: a bare root-leaf tree
        let single = parse_curve("y = x").unwrap();
        let pts: Vec<Vec<Complex64>> =
            grid.ts.iter().map(|t| sample_points(&single, *t)).collect();
        let (tree, _) = recover_tree_numeric(&pts, &grid, 24).unwrap();
        assert_eq!(tree.root.children.len(), 1);
        assert!(tree.root.children[0].is_leaf());

        // two tangential smooth branches: root(1) -> v(2) -> 2 leaves
        let tang = parse_curve("y = x\ny = x + x^2").unwrap();
        let pts: Vec<Vec<Complex64>> =
            grid.ts.iter().map(|t| sample_points(&tang, *t)).collect();
        let (tree, _) = recover_tree_numeric(&pts, &grid, 24).unwrap();
        let v = &tree.root.children[0];
        assert_eq!(v.q, ExtendedRational::finite(rat(2, 1)));
        assert_eq!(v.children.len(), 2);
    }

    #[test]
    fn ratio_experiment_examples() {
        let c1 = parse_curve("y = x^(3/2) + x^(13/6)").unwrap();
        let c2 = parse_curve("y = 2x^(3/2) + x^(13/6)").unwrap();
        let stats =
            bilipschitz_ratio_experiment(&c1, &c2, &[(0, 0)], &SampleGrid::default_grid())
                .unwrap();
        for p in &stats.pairs {
            assert!(p.min <= p.fitted && p.fitted <= p.max);
            if p.i0 == 9 {
                // opposite parity: first difference at x^{3/2}, ratio -> 1/2
                assert!((p.fitted - 0.5).abs() <= 0.02, "fitted {}", p.fitted);
                assert!((p.predicted - 0.5).abs() < 1e-12);
            } else {
                // same parity: first difference at x^{13/6}, both coefficients 1
                assert_eq!(p.i0, 13);
                assert!((p.fitted - 1.0).abs() <= 0.02);
            }
        }

        // identical curves: ratio identically 1
        let stats =
            bilipschitz_ratio_experiment(&c1, &c1, &[(0, 0)], &SampleGrid::default_grid())
                .unwrap();
        for p in &stats.pairs {
            assert!((p.fitted - 1.0).abs() < 1e-12);
            assert!((p.min - 1.0).abs() < 1e-12 && (p.max - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn ratio_experiment_rejects_bad_pairing() {
        let c1 = parse_curve("y = x^(3/2)").unwrap();
        let c2 = parse_curve("y = x^(5/2)").unwrap();
        match bilipschitz_ratio_experiment(&c1, &c2, &[(0, 0)], &SampleGrid::default_grid()) {
            Err(CurveError::Invalid(msg)) => assert!(msg.contains("pairing invalid")),
            other => panic!("expected invalid pairing, got {:?}", other),
        }
    }

    #[test]
    fn unit_modulus_rescaling_invariance() {
        // multiplying all coefficients by i leaves distances unchanged
        let a = parse_curve("y = x^(3/2) + x^(13/6)\ny = x^(7/3)").unwrap();
        let b = parse_curve("y = i x^(3/2) + i x^(13/6)\ny = i x^(7/3)").unwrap();
        let grid = SampleGrid::default_grid();
        let ea = estimate_qmap(&a, &grid).unwrap();
        let eb = estimate_qmap(&b, &grid).unwrap();
        for j in 0..ea.mu {
            for k in 0..ea.mu {
                if j != k {
                    assert!((ea.slopes[j][k] - eb.slopes[j][k]).abs() < 1e-12);
                }
            }
        }
    }
}
