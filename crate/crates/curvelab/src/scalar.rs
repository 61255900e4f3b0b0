//! Exact arithmetic kernel.
//!
//! Everything downstream runs on big rationals: plain [`Rational`]s for
//! exponents and radii, [`GaussianRational`]s for series coefficients, and
//! [`TaggedScalar`]s of the form `c·ζ_N^m` for coefficients of conjugated
//! Puiseux sheets. The point of the tag is that equality stays decidable:
//! two tagged values agree iff their tag ratio is a root of unity lying in
//! the Gaussian rationals, and such roots have order dividing 4
//! (see [`unity_in_gaussians`]).

use num_bigint::{BigInt, BigUint};
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::fmt;

/// Exact rational number, always stored reduced with positive denominator.
pub type Rational = BigRational;

/// Shorthand constructor from machine integers.
pub fn rat(num: i64, den: i64) -> Rational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn rat_int(n: i64) -> Rational {
    BigRational::from_integer(BigInt::from(n))
}

pub fn rat_u(num: u64, den: u64) -> Rational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Renders `p/q`, or just `p` when the denominator is 1.
pub fn fmt_rat(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// JSON value `[num, den]`; falls back to decimal strings if a component
/// exceeds the i64 range (does not happen at the scales handled here).
pub fn json_rat(r: &Rational) -> serde_json::Value {
    let comp = |b: &BigInt| -> serde_json::Value {
        match b.to_i64() {
            Some(v) => serde_json::Value::from(v),
            None => serde_json::Value::from(b.to_string()),
        }
    };
    serde_json::Value::Array(vec![comp(r.numer()), comp(r.denom())])
}

pub fn rat_to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// A rational or the distinguished value `∞`, with `∞` greater than every
/// rational. Used for the contact map, where `q(j,j) = ∞`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExtendedRational {
    Finite(Rational),
    Infinity,
}

impl ExtendedRational {
    pub fn finite(r: Rational) -> Self {
        ExtendedRational::Finite(r)
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, ExtendedRational::Finite(_))
    }

    pub fn as_finite(&self) -> Option<&Rational> {
        match self {
            ExtendedRational::Finite(r) => Some(r),
            ExtendedRational::Infinity => None,
        }
    }
}

impl PartialOrd for ExtendedRational {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExtendedRational {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        use ExtendedRational::*;
        match (self, other) {
            (Infinity, Infinity) => std::cmp::Ordering::Equal,
            (Infinity, Finite(_)) => std::cmp::Ordering::Greater,
            (Finite(_), Infinity) => std::cmp::Ordering::Less,
            (Finite(a), Finite(b)) => a.cmp(b),
        }
    }
}

impl fmt::Display for ExtendedRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtendedRational::Finite(r) => write!(f, "{}", fmt_rat(r)),
            ExtendedRational::Infinity => write!(f, "inf"),
        }
    }
}

/// Element of Q(i), with exact field operations and exact zero test.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct GaussianRational {
    pub re: Rational,
    pub im: Rational,
}

impl GaussianRational {
    pub fn new(re: Rational, im: Rational) -> Self {
        GaussianRational { re, im }
    }

    pub fn from_rational(re: Rational) -> Self {
        GaussianRational { re, im: Rational::zero() }
    }

    pub fn from_int(n: i64) -> Self {
        Self::from_rational(rat_int(n))
    }

    pub fn zero() -> Self {
        Self::from_int(0)
    }

    pub fn one() -> Self {
        Self::from_int(1)
    }

    pub fn i() -> Self {
        GaussianRational { re: Rational::zero(), im: Rational::one() }
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        GaussianRational { re: self.re.clone(), im: -self.im.clone() }
    }

    /// Squared modulus, an exact rational.
    pub fn norm_sq(&self) -> Rational {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn add(&self, other: &Self) -> Self {
        GaussianRational { re: &self.re + &other.re, im: &self.im + &other.im }
    }

    pub fn sub(&self, other: &Self) -> Self {
        GaussianRational { re: &self.re - &other.re, im: &self.im - &other.im }
    }

    pub fn neg(&self) -> Self {
        GaussianRational { re: -self.re.clone(), im: -self.im.clone() }
    }

    pub fn mul(&self, other: &Self) -> Self {
        GaussianRational {
            re: &self.re * &other.re - &self.im * &other.im,
            im: &self.re * &other.im + &self.im * &other.re,
        }
    }

    pub fn scale(&self, r: &Rational) -> Self {
        GaussianRational { re: &self.re * r, im: &self.im * r }
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let n = self.norm_sq();
        Some(GaussianRational { re: &self.re / &n, im: -(&self.im / &n) })
    }

    pub fn div(&self, other: &Self) -> Option<Self> {
        other.inv().map(|iv| self.mul(&iv))
    }

    pub fn to_c64(&self) -> Complex64 {
        Complex64::new(rat_to_f64(&self.re), rat_to_f64(&self.im))
    }

    pub fn json(&self) -> serde_json::Value {
        serde_json::json!({ "re": json_rat(&self.re), "im": json_rat(&self.im) })
    }
}

impl fmt::Display for GaussianRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_zero() {
            return write!(f, "{}", fmt_rat(&self.re));
        }
        let im_part = |im: &Rational| -> String {
            if im.is_one() {
                "i".to_string()
            } else if (-im.clone()).is_one() {
                "-i".to_string()
            } else {
                format!("{}i", fmt_rat(im))
            }
        };
        if self.re.is_zero() {
            write!(f, "{}", im_part(&self.im))
        } else if self.im.is_positive() {
            write!(f, "({}+{})", fmt_rat(&self.re), im_part(&self.im))
        } else {
            write!(f, "({}{})", fmt_rat(&self.re), im_part(&self.im))
        }
    }
}

/// The root of unity `ζ_N^m` with `ζ_N = exp(2πi/N)`. Stored primitive:
/// the order is reduced so that `gcd(order, residue) = 1` (order 1 for the
/// trivial root).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct RootOfUnityTag {
    pub order: BigUint,
    pub residue: BigUint,
}

impl RootOfUnityTag {
    pub fn new_big(order: BigUint, residue: &BigInt) -> Self {
        assert!(!order.is_zero(), "tag order must be positive");
        let n = BigInt::from(order.clone());
        let m = residue.mod_floor(&n).to_biguint().unwrap();
        if m.is_zero() {
            return RootOfUnityTag { order: BigUint::one(), residue: BigUint::zero() };
        }
        let g = m.gcd(&order);
        RootOfUnityTag { order: &order / &g, residue: &m / &g }
    }

    pub fn new(order: u64, residue: i64) -> Self {
        Self::new_big(BigUint::from(order), &BigInt::from(residue))
    }

    pub fn trivial() -> Self {
        RootOfUnityTag { order: BigUint::one(), residue: BigUint::zero() }
    }

    pub fn is_trivial(&self) -> bool {
        self.order.is_one()
    }

    /// Residue of this tag on the common grid of order `n` (which must be a
    /// multiple of the stored order).
    pub fn residue_at(&self, n: &BigUint) -> BigUint {
        debug_assert!((n % &self.order).is_zero());
        &self.residue * (n / &self.order)
    }

    pub fn mul(&self, other: &Self) -> Self {
        let n = self.order.lcm(&other.order);
        let m = self.residue_at(&n) + other.residue_at(&n);
        Self::new_big(n, &BigInt::from(m))
    }

    pub fn pow(&self, e: u64) -> Self {
        let m = &self.residue * BigUint::from(e);
        Self::new_big(self.order.clone(), &BigInt::from(m))
    }

    pub fn inv(&self) -> Self {
        let m = BigInt::from(self.order.clone()) - BigInt::from(self.residue.clone());
        Self::new_big(self.order.clone(), &m)
    }

    pub fn to_c64(&self) -> Complex64 {
        let theta = 2.0 * std::f64::consts::PI * self.residue.to_f64().unwrap()
            / self.order.to_f64().unwrap();
        Complex64::new(theta.cos(), theta.sin())
    }
}

impl fmt::Display for RootOfUnityTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_trivial() {
            write!(f, "1")
        } else {
            write!(f, "zeta_{}^{}", self.order, self.residue)
        }
    }
}

/// Value of `ζ_N^m` when it lies in the Gaussian rationals.
///
/// The root has multiplicative order `d = N / gcd(N, m mod N)`; it is
/// Gaussian rational exactly when `d` divides 4, in which case it is one of
/// `1, −1, i, −i`. Returns `None` otherwise. Total function.
pub fn unity_in_gaussians(order: &BigUint, residue: &BigInt) -> Option<GaussianRational> {
    let n = BigInt::from(order.clone());
    let m = residue.mod_floor(&n).to_biguint().unwrap();
    if m.is_zero() {
        return Some(GaussianRational::one());
    }
    let g = m.gcd(order);
    let d = order / &g;
    let e = (&m / &g) % &d;
    if d == BigUint::from(2u32) {
        Some(GaussianRational::from_int(-1))
    } else if d == BigUint::from(4u32) {
        if e == BigUint::from(1u32) {
            Some(GaussianRational::i())
        } else {
            Some(GaussianRational::i().neg())
        }
    } else if d.is_one() {
        Some(GaussianRational::one())
    } else {
        None
    }
}

pub fn unity_in_gaussians_u(order: u64, residue: i64) -> Option<GaussianRational> {
    unity_in_gaussians(&BigUint::from(order), &BigInt::from(residue))
}

/// Either zero or a single term `c·ζ_N^m` with `c` a nonzero Gaussian
/// rational. Kept canonical (see [`TaggedScalar::term`]), so the derived
/// structural equality coincides with equality of complex values.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum TaggedScalar {
    Zero,
    Term { tag: RootOfUnityTag, coeff: GaussianRational },
}

impl TaggedScalar {
    /// Canonical constructor. Among the four representations
    /// `(c·u^{-1})·(u·ζ_N^m)`, `u ∈ {1, i, −1, −i}`, the one whose primitive
    /// tag is smallest (by order, then residue) is stored; this pushes every
    /// Gaussian-rational unit factor of the root into the coefficient.
    pub fn term(coeff: GaussianRational, tag: RootOfUnityTag) -> Self {
        if coeff.is_zero() {
            return TaggedScalar::Zero;
        }
        let mut best: Option<(RootOfUnityTag, GaussianRational)> = None;
        for j in 0..4i64 {
            let twist = RootOfUnityTag::new(4, j);
            let cand_tag = tag.mul(&twist);
            let u_inv = unity_in_gaussians_u(4, -j).unwrap();
            let cand_coeff = coeff.mul(&u_inv);
            let replace = match &best {
                None => true,
                Some((t, _)) => (&cand_tag.order, &cand_tag.residue) < (&t.order, &t.residue),
            };
            if replace {
                best = Some((cand_tag, cand_coeff));
            }
        }
        let (tag, coeff) = best.unwrap();
        TaggedScalar::Term { tag, coeff }
    }

    pub fn from_gaussian(c: GaussianRational) -> Self {
        Self::term(c, RootOfUnityTag::trivial())
    }

    pub fn from_int(n: i64) -> Self {
        Self::from_gaussian(GaussianRational::from_int(n))
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, TaggedScalar::Zero)
    }

    /// Squared modulus; tags have modulus 1, so this is exact.
    pub fn norm_sq(&self) -> Rational {
        match self {
            TaggedScalar::Zero => Rational::zero(),
            TaggedScalar::Term { coeff, .. } => coeff.norm_sq(),
        }
    }

    pub fn mul_gaussian(&self, g: &GaussianRational) -> Self {
        match self {
            TaggedScalar::Zero => TaggedScalar::Zero,
            TaggedScalar::Term { tag, coeff } => Self::term(coeff.mul(g), tag.clone()),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        match (self, other) {
            (TaggedScalar::Zero, _) | (_, TaggedScalar::Zero) => TaggedScalar::Zero,
            (
                TaggedScalar::Term { tag: t1, coeff: c1 },
                TaggedScalar::Term { tag: t2, coeff: c2 },
            ) => Self::term(c1.mul(c2), t1.mul(t2)),
        }
    }

    pub fn to_c64(&self) -> Complex64 {
        match self {
            TaggedScalar::Zero => Complex64::new(0.0, 0.0),
            TaggedScalar::Term { tag, coeff } => coeff.to_c64() * tag.to_c64(),
        }
    }

    pub fn json(&self) -> serde_json::Value {
        match self {
            TaggedScalar::Zero => serde_json::json!({ "zero": true }),
            TaggedScalar::Term { tag, coeff } => serde_json::json!({
                "coeff": coeff.json(),
                "root_order": tag.order.to_u64().map(serde_json::Value::from)
                    .unwrap_or_else(|| serde_json::Value::from(tag.order.to_string())),
                "root_residue": tag.residue.to_u64().map(serde_json::Value::from)
                    .unwrap_or_else(|| serde_json::Value::from(tag.residue.to_string())),
            }),
        }
    }
}

impl fmt::Display for TaggedScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TaggedScalar::Zero => write!(f, "0"),
            TaggedScalar::Term { tag, coeff } => {
                if tag.is_trivial() {
                    write!(f, "{}", coeff)
                } else {
                    write!(f, "{}*{}", coeff, tag)
                }
            }
        }
    }
}

/// Exact equality of two tagged scalars as complex numbers.
///
/// Rescaling both tags to the lcm `N` of their orders, `a = b` iff
/// `ζ_N^{m_b − m_a}` is Gaussian rational and equals `c_a / c_b`.
pub fn tagged_equal(a: &TaggedScalar, b: &TaggedScalar) -> bool {
    match (a, b) {
        (TaggedScalar::Zero, TaggedScalar::Zero) => true,
        (TaggedScalar::Zero, _) | (_, TaggedScalar::Zero) => false,
        (
            TaggedScalar::Term { tag: ta, coeff: ca },
            TaggedScalar::Term { tag: tb, coeff: cb },
        ) => {
            let n = ta.order.lcm(&tb.order);
            let delta = BigInt::from(tb.residue_at(&n)) - BigInt::from(ta.residue_at(&n));
            match unity_in_gaussians(&n, &delta) {
                None => false,
                Some(v) => *ca == cb.mul(&v),
            }
        }
    }
}

/// Largest `k/2^s` with square at most `q`, at a fixed dyadic resolution.
/// Used to pick rational radius constants below exact (possibly irrational)
/// moduli; the result is positive whenever `q > 0`.
pub fn rsqrt_under(q: &Rational) -> Rational {
    assert!(q.is_positive(), "rsqrt_under needs a positive argument");
    let mut shift = 16u32;
    loop {
        let scale = BigUint::one() << shift;
        let scaled = q * Rational::from_integer(BigInt::from(&scale * &scale));
        let floor = scaled.floor().numer().to_biguint().unwrap();
        let root = num_integer::Roots::sqrt(&floor);
        if root >= BigUint::from(2u32) || shift >= 512 {
            return Rational::new(BigInt::from(root), BigInt::from(scale));
        }
        shift *= 2;
    }
}

/// Smallest `k/2^s` with square at least `q`, at the same resolution.
pub fn rsqrt_over(q: &Rational) -> Rational {
    if q.is_zero() {
        return Rational::zero();
    }
    let under = rsqrt_under(q);
    if &under * &under == *q {
        under
    } else {
        let denom = under.denom().clone();
        under + Rational::new(BigInt::one(), denom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(re: (i64, i64), im: (i64, i64)) -> GaussianRational {
        GaussianRational::new(rat(re.0, re.1), rat(im.0, im.1))
    }

    #[test]
    fn unity_examples() {
        // ζ_6^3 = e^{πi} = −1
        assert_eq!(unity_in_gaussians_u(6, 3), Some(GaussianRational::from_int(-1)));
        // order 3 does not divide 4
        assert_eq!(unity_in_gaussians_u(3, 1), None);
        // ζ_12^9 has order 4, residue class 3 → −i
        assert_eq!(unity_in_gaussians_u(12, 9), Some(GaussianRational::i().neg()));
        assert_eq!(unity_in_gaussians_u(1, 0), Some(GaussianRational::one()));
        assert_eq!(unity_in_gaussians_u(8, 2), Some(GaussianRational::i()));
        assert_eq!(unity_in_gaussians_u(8, 1), None);
    }

    #[test]
    fn unity_brute_force_against_floats() {
        // For all N ≤ 60: some value is returned iff exp(2πim/N) is within
        // 1e−9 of one of ±1, ±i, and then the value matches that point.
        let pts = [
            (Complex64::new(1.0, 0.0), GaussianRational::one()),
            (Complex64::new(-1.0, 0.0), GaussianRational::from_int(-1)),
            (Complex64::new(0.0, 1.0), GaussianRational::i()),
            (Complex64::new(0.0, -1.0), GaussianRational::i().neg()),
        ];
        for n in 1u64..=60 {
            for m in 0..n {
                let z = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * m as f64 / n as f64);
                let near = pts.iter().find(|(p, _)| (z - p).norm() < 1e-9);
                let got = unity_in_gaussians_u(n, m as i64);
                match near {
                    Some((_, v)) => assert_eq!(got.as_ref(), Some(v), "N={} m={}", n, m),
                    None => assert!(got.is_none(), "N={} m={}", n, m),
                }
            }
        }
    }

    #[test]
    fn tagged_equal_examples() {
        // (1, ζ_6^3) = (−1, ζ_6^0)
        let a = TaggedScalar::term(GaussianRational::one(), RootOfUnityTag::new(6, 3));
        let b = TaggedScalar::from_int(-1);
        assert!(tagged_equal(&a, &b));

        // (c, ζ_3^1) ≠ (c, ζ_3^0) for any nonzero Gaussian rational c
        let c = g((3, 2), (-1, 5));
        let x = TaggedScalar::term(c.clone(), RootOfUnityTag::new(3, 1));
        let y = TaggedScalar::from_gaussian(c);
        assert!(!tagged_equal(&x, &y));

        // (2i, ζ_8^2) = (−2, ζ_8^0): ζ_8^2 = i and 2i·i = −2
        let u = TaggedScalar::term(g((0, 1), (2, 1)), RootOfUnityTag::new(8, 2));
        let v = TaggedScalar::from_int(-2);
        assert!(tagged_equal(&u, &v));
    }

    #[test]
    fn canonical_form_matches_tagged_equal() {
        // Structural equality of canonicalized terms is exactly value equality.
        let cases = [
            (g((1, 1), (0, 1)), RootOfUnityTag::new(6, 3)),
            (g((0, 1), (2, 1)), RootOfUnityTag::new(8, 2)),
            (g((2, 3), (0, 1)), RootOfUnityTag::new(12, 5)),
            (g((1, 2), (1, 3)), RootOfUnityTag::new(5, 2)),
            (g((-1, 1), (1, 1)), RootOfUnityTag::new(12, 4)),
        ];
        for (c1, t1) in &cases {
            for (c2, t2) in &cases {
                let a = TaggedScalar::term(c1.clone(), t1.clone());
                let b = TaggedScalar::term(c2.clone(), t2.clone());
                assert_eq!(a == b, tagged_equal(&a, &b), "{} vs {}", a, b);
            }
        }
        // ζ_12^1 = (−i)·ζ_3^1: two spellings of one value
        let p = TaggedScalar::term(GaussianRational::one(), RootOfUnityTag::new(12, 1));
        let q = TaggedScalar::term(GaussianRational::i().neg(), RootOfUnityTag::new(3, 1));
        assert_eq!(p, q);
        assert!(tagged_equal(&p, &q));
    }

    #[test]
    fn tag_product_rescales_to_lcm() {
        let a = RootOfUnityTag::new(6, 1);
        let b = RootOfUnityTag::new(4, 1);
        let p = a.mul(&b); // ζ_6 ζ_4 = ζ_12^{2+3}
        assert_eq!(p, RootOfUnityTag::new(12, 5));
        assert_eq!(a.mul(&a.inv()), RootOfUnityTag::trivial());
        assert_eq!(a.pow(6), RootOfUnityTag::trivial());
    }

    #[test]
    fn gaussian_field_ops() {
        let a = g((3, 2), (-1, 5));
        let b = g((0, 1), (2, 1));
        assert_eq!(a.mul(&b).div(&b).unwrap(), a);
        assert!(a.mul(&a.inv().unwrap()) == GaussianRational::one());
        assert_eq!(a.norm_sq(), rat(9, 4) + rat(1, 25));
    }

    #[test]
    fn extended_rational_order() {
        let inf = ExtendedRational::Infinity;
        let one = ExtendedRational::finite(rat_int(1));
        let big = ExtendedRational::finite(rat_int(1_000_000));
        assert!(inf > big && big > one);
        assert_eq!(inf.cmp(&ExtendedRational::Infinity), std::cmp::Ordering::Equal);
    }

    #[test]
    fn rsqrt_bounds() {
        for q in [rat(2, 1), rat(1, 3), rat(9, 4), rat(1, 1000000)] {
            let lo = rsqrt_under(&q);
            let hi = rsqrt_over(&q);
            assert!(&lo * &lo <= q, "under bound for {}", q);
            assert!(&hi * &hi >= q, "over bound for {}", q);
            assert!(lo.is_positive());
        }
        assert_eq!(rsqrt_under(&rat(9, 4)), rat(3, 2));
    }
}
