//! Shared test support: seeded random curve generation.

use curvelab::puiseux::{Branch, Curve};
use curvelab::scalar::{rat, GaussianRational};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_gaussian(r: &mut ChaCha8Rng) -> GaussianRational {
    loop {
        let pick = |r: &mut ChaCha8Rng| rat(r.gen_range(-3i64..=3), r.gen_range(1i64..=3));
        let g = GaussianRational::new(pick(r), if r.gen_bool(0.3) { pick(r) } else { rat(0, 1) });
        if !g.is_zero() {
            return g;
        }
    }
}

/// Random primitive branch with multiplicity up to `n_max` and exponents up
/// to `e_max`.
pub fn random_branch(r: &mut ChaCha8Rng, n_max: u64, e_max: u64) -> Branch {
    loop {
        let n = r.gen_range(1..=n_max);
        let extra = r.gen_range(0..=3usize);
        let mut terms = Vec::new();
        if r.gen_bool(0.7) {
            terms.push((n, random_gaussian(r)));
        }
        for _ in 0..extra {
            let hi = e_max.max(n + 1);
            let i = r.gen_range(n..=hi);
            terms.push((i, random_gaussian(r)));
        }
        if let Ok(b) = Branch::new(n, terms) {
            // keep the drawn multiplicity: primitivity reduction means the
            // sample was not primitive as drawn
            if b.multiplicity() == n {
                return b;
            }
        }
    }
}

/// Random reduced curve with up to `branches_max` branches.
pub fn random_curve(r: &mut ChaCha8Rng, branches_max: usize, n_max: u64, e_max: u64) -> Curve {
    loop {
        let count = r.gen_range(1..=branches_max);
        let branches: Vec<Branch> = (0..count).map(|_| random_branch(r, n_max, e_max)).collect();
        if let Ok(c) = Curve::new(branches) {
            return c;
        }
    }
}
