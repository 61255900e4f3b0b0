//! Pairwise sheet contact exponents.
//!
//! For sheets `j ≠ k` the distance between the section points `p_j(t)` and
//! `p_k(t)` on `{x = t}` decays like `t^{q(j,k)}`; `q(j,k)` is the least
//! x-exponent at which the two sheet series differ. The full symmetric
//! matrix (with `q(j,j) = ∞`) determines the embedded topology and is the
//! input of the carrousel tree construction.

use crate::error::CurveError;
use crate::puiseux::{Curve, Sheet};
use crate::scalar::{tagged_equal, ExtendedRational, Rational, TaggedScalar};
use num_traits::{One, Zero};
use std::collections::BTreeMap;

/// Symmetric matrix of sheet contact exponents.
#[derive(Debug, Clone)]
pub struct QMap {
    pub sheets: Vec<Sheet>,
    pub values: Vec<Vec<ExtendedRational>>,
}

impl QMap {
    pub fn mu(&self) -> usize {
        self.sheets.len()
    }

    pub fn value(&self, j: usize, k: usize) -> &ExtendedRational {
        &self.values[j][k]
    }

    /// Sorted distinct finite off-diagonal values.
    pub fn finite_values(&self) -> Vec<Rational> {
        let mut out: Vec<Rational> = Vec::new();
        for row in &self.values {
            for v in row {
                if let ExtendedRational::Finite(r) = v {
                    if !out.contains(r) {
                        out.push(r.clone());
                    }
                }
            }
        }
        out.sort();
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        let sheets: Vec<_> = self
            .sheets
            .iter()
            .map(|s| serde_json::json!({ "branch": s.branch, "k": s.k }))
            .collect();
        let rows: Vec<serde_json::Value> = self
            .values
            .iter()
            .map(|row| {
                row.iter()
                    .map(|v| match v {
                        ExtendedRational::Infinity => serde_json::Value::from("inf"),
                        ExtendedRational::Finite(r) => crate::scalar::json_rat(r),
                    })
                    .collect()
            })
            .collect();
        serde_json::json!({ "sheets": sheets, "q": rows })
    }
}

/// Least x-exponent at which the series of two sheets differ (∞ for a sheet
/// against itself). Comparison runs over the common exponent grid with
/// denominator `lcm(n_1, n_2)`; absent terms count as zero.
pub fn sheet_contact(c: &Curve, s1: &Sheet, s2: &Sheet) -> Result<ExtendedRational, CurveError> {
    let mut merged: BTreeMap<Rational, [TaggedScalar; 2]> = BTreeMap::new();
    for (e, coeff) in c.sheet_terms(s1) {
        merged.entry(e).or_insert([TaggedScalar::Zero, TaggedScalar::Zero])[0] = coeff;
    }
    for (e, coeff) in c.sheet_terms(s2) {
        merged.entry(e).or_insert([TaggedScalar::Zero, TaggedScalar::Zero])[1] = coeff;
    }
    for (e, [a, b]) in &merged {
        if !tagged_equal(a, b) {
            return Ok(ExtendedRational::Finite(e.clone()));
        }
    }
    if s1 == s2 {
        Ok(ExtendedRational::Infinity)
    } else {
        Err(CurveError::NonReduced(format!(
            "sheets ({},{}) and ({},{}) have identical series",
            s1.branch, s1.k, s2.branch, s2.k
        )))
    }
}

/// The full contact matrix of a reduced curve.
pub fn q_map(c: &Curve) -> Result<QMap, CurveError> {
    let sheets = c.sheets();
    let mu = sheets.len();
    let mut values = vec![vec![ExtendedRational::Infinity; mu]; mu];
    for j in 0..mu {
        for k in (j + 1)..mu {
            let q = sheet_contact(c, &sheets[j], &sheets[k])?;
            values[j][k] = q.clone();
            values[k][j] = q;
        }
    }
    Ok(QMap { sheets, values })
}

/// Coincidence exponent of two distinct branches: the maximum contact over
/// cross sheet pairs. Always finite on a reduced curve.
pub fn coincidence_exponent(c: &Curve, b1: usize, b2: usize) -> Rational {
    assert_ne!(b1, b2, "coincidence exponent needs two distinct branches");
    let mut best: Option<Rational> = None;
    for k1 in 0..c.branches()[b1].multiplicity() {
        for k2 in 0..c.branches()[b2].multiplicity() {
            let s1 = Sheet { branch: b1, k: k1 };
            let s2 = Sheet { branch: b2, k: k2 };
            match sheet_contact(c, &s1, &s2) {
                Ok(ExtendedRational::Finite(r)) => {
                    if best.as_ref().map_or(true, |b| r > *b) {
                        best = Some(r);
                    }
                }
                Ok(ExtendedRational::Infinity) | Err(_) => {
                    // identical cross-branch sheets: the curve was not reduced
                    panic!("coincidence exponent on a non-reduced curve")
                }
            }
        }
    }
    best.expect("branches have at least one sheet each")
}

/// Intersection multiplicity of two branches: the sum of `q(a, b)` over all
/// cross sheet pairs. The sum is an integer for every pair of distinct
/// branches; a fractional result indicates a bug.
pub fn intersection_multiplicity(c: &Curve, b1: usize, b2: usize) -> Result<u64, CurveError> {
    assert_ne!(b1, b2);
    let mut total = Rational::zero();
    for k1 in 0..c.branches()[b1].multiplicity() {
        for k2 in 0..c.branches()[b2].multiplicity() {
            let s1 = Sheet { branch: b1, k: k1 };
            let s2 = Sheet { branch: b2, k: k2 };
            match sheet_contact(c, &s1, &s2)? {
                ExtendedRational::Finite(r) => total += r,
                ExtendedRational::Infinity => {
                    return Err(CurveError::Internal(
                        "infinite contact across distinct branches".into(),
                    ))
                }
            }
        }
    }
    if !total.denom().is_one() {
        return Err(CurveError::Internal(format!(
            "intersection multiplicity {} is not an integer",
            total
        )));
    }
    use num_traits::ToPrimitive;
    total
        .to_integer()
        .to_u64()
        .ok_or_else(|| CurveError::Internal("intersection multiplicity out of range".into()))
}

/// All triples of distinct sheets on which the minimum of the three pairwise
/// contacts is attained only once. Empty for every matrix produced by
/// [`q_map`].
pub fn verify_ultrametric(q: &QMap) -> Vec<(usize, usize, usize)> {
    verify_ultrametric_matrix(&q.values)
}

pub fn verify_ultrametric_matrix(values: &[Vec<ExtendedRational>]) -> Vec<(usize, usize, usize)> {
    let mu = values.len();
    let mut bad = Vec::new();
    for j in 0..mu {
        for k in (j + 1)..mu {
            for l in (k + 1)..mu {
                let mut v = [&values[j][k], &values[k][l], &values[j][l]];
                v.sort();
                if v[0] < v[1] {
                    bad.push((j, k, l));
                }
            }
        }
    }
    bad
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::puiseux::parse_curve;
    use crate::scalar::rat;

    fn q_of(c: &Curve, j: usize, k: usize) -> ExtendedRational {
        let sheets = c.sheets();
        sheet_contact(c, &sheets[j], &sheets[k]).unwrap()
    }

    #[test]
    fn example_sheet_contacts() {
        let c = crate::testutil::example_curve();
        // branch 1, sheets k=0 and k=2: the 3/2 coefficients agree (both +1),
        // the 13/6 tags differ
        assert_eq!(q_of(&c, 0, 2), ExtendedRational::finite(rat(13, 6)));
        // k=0 vs k=1: signs at 3/2 differ
        assert_eq!(q_of(&c, 0, 1), ExtendedRational::finite(rat(3, 2)));
        // any branch-1 sheet against any branch-2 sheet: 3/2
        for j in 0..6 {
            for k in 6..9 {
                assert_eq!(q_of(&c, j, k), ExtendedRational::finite(rat(3, 2)));
            }
        }
    }

    #[test]
    fn example_q_value_set() {
        let c = crate::testutil::example_curve();
        let q = q_map(&c).unwrap();
        assert_eq!(q.finite_values(), vec![rat(3, 2), rat(13, 6), rat(7, 3)]);
        assert_eq!(q.mu(), 9);
        // symmetry and infinite diagonal
        for j in 0..9 {
            assert_eq!(q.value(j, j), &ExtendedRational::Infinity);
            for k in 0..9 {
                assert_eq!(q.value(j, k), q.value(k, j));
            }
        }
    }

    #[test]
    fn trivial_q_maps() {
        let c = parse_curve("y = 2x").unwrap();
        let q = q_map(&c).unwrap();
        assert_eq!(q.mu(), 1);
        assert_eq!(q.value(0, 0), &ExtendedRational::Infinity);

        let c = parse_curve("y = 0\ny = x^2").unwrap();
        let q = q_map(&c).unwrap();
        assert_eq!(q.value(0, 1), &ExtendedRational::finite(rat(2, 1)));
    }

    #[test]
    fn coincidence_examples() {
        let c = crate::testutil::example_curve();
        assert_eq!(coincidence_exponent(&c, 0, 1), rat(3, 2));
        assert_eq!(coincidence_exponent(&c, 1, 0), rat(3, 2));

        let c = parse_curve("y = x^(3/2)\ny = x^(3/2) + x^(13/6)").unwrap();
        assert_eq!(coincidence_exponent(&c, 0, 1), rat(13, 6));

        let c = parse_curve("y = 0\ny = x^2").unwrap();
        assert_eq!(coincidence_exponent(&c, 0, 1), rat(2, 1));
    }

    #[test]
    fn intersection_multiplicity_examples() {
        let c = crate::testutil::example_curve();
        assert_eq!(intersection_multiplicity(&c, 0, 1).unwrap(), 27);

        let c = parse_curve("y = 0\ny = x^2").unwrap();
        assert_eq!(intersection_multiplicity(&c, 0, 1).unwrap(), 2);

        // oracle for this value: ord_t((t^3 + t^4)^2 − t^6) = 7
        let c = parse_curve("y = x^(3/2)\ny = x^(3/2) + x^2").unwrap();
        assert_eq!(intersection_multiplicity(&c, 0, 1).unwrap(), 7);
    }

    #[test]
    fn ultrametric_clean_and_corrupted() {
        let c = crate::testutil::example_curve();
        let q = q_map(&c).unwrap();
        assert!(verify_ultrametric(&q).is_empty());

        // hand-corrupted: min attained once
        let f = |n: i64, d: i64| ExtendedRational::finite(rat(n, d));
        let inf = ExtendedRational::Infinity;
        let m = vec![
            vec![inf.clone(), f(2, 1), f(5, 1)],
            vec![f(2, 1), inf.clone(), f(3, 1)],
            vec![f(5, 1), f(3, 1), inf.clone()],
        ];
        assert_eq!(verify_ultrametric_matrix(&m), vec![(0, 1, 2)]);
    }

    #[test]
    fn contact_error_on_identical_distinct_sheets() {
        // build a curve bypassing reduction checks to exercise the error
        let b = crate::puiseux::parse_curve("y = x^2").unwrap().branches()[0].clone();
        let c = Curve::new(vec![b]).unwrap();
        let s = Sheet { branch: 0, k: 0 };
        assert_eq!(sheet_contact(&c, &s, &s).unwrap(), ExtendedRational::Infinity);
    }
}
