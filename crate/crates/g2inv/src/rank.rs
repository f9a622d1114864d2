//! Numerical functional-independence counts: rank of the Jacobian of an
//! invariant list with respect to the jet-fiber coordinates.

use nalgebra::DMatrix;
use rand::Rng;

use crate::error::{Error, Result};
use crate::invariants::first;
use crate::jet::coeff_count;
use crate::metric::{classify, PointJets, DEFAULT_TOL};
use crate::second::{order2_values, second_invariants};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InvariantSet {
    Fundamental6,
    /// The six fundamentals restricted to `∂₂f₁^k = ∂₁f₂^k`.
    Fundamental6Transitive,
    Order2_20,
}

impl InvariantSet {
    pub const ALL: [InvariantSet; 3] =
        [InvariantSet::Fundamental6, InvariantSet::Fundamental6Transitive, InvariantSet::Order2_20];

    pub fn name(self) -> &'static str {
        match self {
            InvariantSet::Fundamental6 => "fundamental6",
            InvariantSet::Fundamental6Transitive => "fundamental6_transitive",
            InvariantSet::Order2_20 => "order2_20",
        }
    }

    pub fn from_name(s: &str) -> Result<InvariantSet> {
        InvariantSet::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Invalid(format!("unknown invariant set '{s}'")))
    }

    pub fn jet_order(self) -> usize {
        match self {
            InvariantSet::Order2_20 => 2,
            _ => 1,
        }
    }

    /// Generic count of independent invariants in the set.
    pub fn expected_rank(self) -> usize {
        match self {
            InvariantSet::Fundamental6 => 6,
            InvariantSet::Fundamental6Transitive => 4,
            InvariantSet::Order2_20 => 20,
        }
    }

    fn transitive(self) -> bool {
        self == InvariantSet::Fundamental6Transitive
    }
}

/// Index pairs `(dependent, source)` imposing `∂₁f₂^k = ∂₂f₁^k` on an order-1 vector.
fn transitive_links() -> [(usize, usize); 2] {
    let n = coeff_count(1);
    // components: g̃ (0..3), f (3..7) as f_1^1, f_1^2, f_2^1, f_2^2, h (7..10)
    [0, 1].map(|k| ((5 + k) * n + 1, (3 + k) * n + 2))
}

fn apply_links(v: &mut [f64]) {
    for (dep, src) in transitive_links() {
        v[dep] = v[src];
    }
}

pub fn evaluate(set: InvariantSet, point: (f64, f64), v: &[f64]) -> Result<Vec<f64>> {
    let j = PointJets::from_vec(point, set.jet_order(), v)?;
    Ok(match set {
        InvariantSet::Order2_20 => order2_values(&second_invariants(&j, DEFAULT_TOL)?).to_vec(),
        _ => first(&j).six().to_vec(),
    })
}

#[derive(Clone, Debug)]
pub struct RankReport {
    pub set: InvariantSet,
    pub rank: usize,
    pub expected: usize,
    pub singular_values: Vec<f64>,
    pub eps: f64,
    pub notice: Option<String>,
}

/// Numerical rank at the probe `j` (its order must match the set).
pub fn jacobian_rank(set: InvariantSet, j: &PointJets, eps: f64) -> Result<RankReport> {
    if j.order != set.jet_order() {
        return Err(Error::OrderMismatch(set.jet_order(), j.order));
    }
    let mut base = j.to_vec();
    if set.transitive() {
        apply_links(&mut base);
    }
    let deps: Vec<usize> = if set.transitive() { transitive_links().iter().map(|l| l.0).collect() } else { vec![] };
    let free: Vec<usize> = (0..base.len()).filter(|i| !deps.contains(i)).collect();
    let rows = evaluate(set, j.point, &base)?.len();
    let mut jac = DMatrix::<f64>::zeros(rows, free.len());
    for (col, &i) in free.iter().enumerate() {
        let h = 1e-5 * base[i].abs().max(1.0);
        let mut plus = base.clone();
        let mut minus = base.clone();
        plus[i] += h;
        minus[i] -= h;
        if set.transitive() {
            apply_links(&mut plus);
            apply_links(&mut minus);
        }
        let (fp, fm) = (evaluate(set, j.point, &plus)?, evaluate(set, j.point, &minus)?);
        for r in 0..rows {
            jac[(r, col)] = (fp[r] - fm[r]) / (2.0 * h);
        }
    }
    // Row scaling: invariants of very different size should count equally.
    for r in 0..rows {
        let n = jac.row(r).norm();
        if n > 0.0 {
            jac.row_mut(r).scale_mut(1.0 / n);
        }
    }
    let mut sv: Vec<f64> = jac.singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    let smax = sv.first().copied().unwrap_or(0.0);
    let rank = sv.iter().filter(|s| **s > eps * smax).count();
    let flags = classify(j, DEFAULT_TOL);
    let degenerate = if set.transitive() { flags.c_rho_zero } else { !flags.generic };
    let notice = degenerate.then(|| "probe lies on a degenerate stratum".to_string());
    Ok(RankReport { set, rank, expected: set.expected_rank(), singular_values: sv, eps, notice })
}

/// A random jet with nondegenerate `g̃` and `h` and coefficients in `[-1, 1]`.
pub fn random_probe<R: Rng>(rng: &mut R, order: usize) -> PointJets {
    let n = coeff_count(order);
    loop {
        let mut v: Vec<f64> = (0..10 * n).map(|_| rng.random_range(-1.0..1.0)).collect();
        for k in [0, 2, 7, 9] {
            v[k * n] += if rng.random_bool(0.5) { 1.5 } else { -1.5 };
        }
        if let Ok(j) = PointJets::from_vec((0.0, 0.0), order, &v) {
            if j.det_gt.value().abs() > 0.2 && j.det_h.value().abs() > 0.2 && classify(&j, DEFAULT_TOL).generic {
                return j;
            }
        }
    }
}

pub const DEFAULT_EPS: f64 = 1e-7;

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn names_round_trip() {
        for s in InvariantSet::ALL {
            assert_eq!(InvariantSet::from_name(s.name()).unwrap(), s);
        }
        assert!(InvariantSet::from_name("nope").is_err());
    }

    #[test]
    fn order_mismatch() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let j = random_probe(&mut rng, 1);
        assert!(jacobian_rank(InvariantSet::Order2_20, &j, DEFAULT_EPS).is_err());
    }
}
