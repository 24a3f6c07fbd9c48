//! Reduced Dempster-Shafer combination of opinions.
//!
//! Two opinions over the same classes fuse into one by multiplying agreeing
//! masses and discarding the conflicting mass `k`:
//!
//! ```text
//! b_c = (b_c^1 b_c^2 + b_c^1 u^2 + b_c^2 u^1) / (1 - k)
//! u   = u^1 u^2 / (1 - k)
//! k   = sum over i != j of b_i^1 b_j^2
//! ```
//!
//! The focal structure is fixed: each singleton class plus the whole frame
//! (whose mass is the uncertainty). Sequences fuse by a left fold; order
//! independence is a tested property.

use crate::error::{Error, Result};
use crate::evidence::Opinion;

/// When `1 - k` falls at or below this bound the normalizer is numerically
/// meaningless and combination fails with [`Error::TotalConflict`].
pub const CONFLICT_EPSILON: f64 = 1e-12;

/// Amount of conflict between two opinions, in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Conflict(f64);

impl Conflict {
    pub fn value(self) -> f64 {
        self.0
    }
}

fn check_dims(a: &Opinion, b: &Opinion) -> Result<()> {
    if a.class_count() != b.class_count() {
        return Err(Error::DimensionMismatch {
            left: a.class_count(),
            right: b.class_count(),
        });
    }
    Ok(())
}

/// Mass the two opinions assign to incompatible classes:
/// `k = sum_{i != j} b_i^1 b_j^2`.
pub fn conflict(a: &Opinion, b: &Opinion) -> Result<Conflict> {
    check_dims(a, b)?;
    let mut k = 0.0;
    for (i, &ba) in a.beliefs().iter().enumerate() {
        for (j, &bb) in b.beliefs().iter().enumerate() {
            if i != j {
                k += ba * bb;
            }
        }
    }
    Ok(Conflict(k.clamp(0.0, 1.0)))
}

/// Fuses two opinions with the reduced combination rule.
pub fn combine_pair(a: &Opinion, b: &Opinion) -> Result<Opinion> {
    let k = conflict(a, b)?.value();
    let denom = 1.0 - k;
    if denom <= CONFLICT_EPSILON {
        return Err(Error::TotalConflict { conflict: k });
    }
    let (ua, ub) = (a.uncertainty(), b.uncertainty());
    let beliefs: Vec<f64> = a
        .beliefs()
        .iter()
        .zip(b.beliefs())
        .map(|(&ba, &bb)| (ba * bb + ba * ub + bb * ua) / denom)
        .collect();
    let uncertainty = ua * ub / denom;
    // Renormalize so rounding drift cannot accumulate across repeated folds.
    Ok(Opinion::renormalized(beliefs, uncertainty))
}

/// Left fold of [`combine_pair`] over a nonempty sequence.
pub fn combine_many(opinions: &[Opinion]) -> Result<Opinion> {
    let (first, rest) = opinions
        .split_first()
        .ok_or_else(|| Error::InvalidInput("cannot combine an empty sequence".into()))?;
    let mut fused = first.clone();
    for op in rest {
        fused = combine_pair(&fused, op)?;
    }
    Ok(fused)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn assert_close(actual: f64, expected: f64, tol: f64) {
        assert!(
            (actual - expected).abs() <= tol,
            "expected {expected}, got {actual} (tol {tol})"
        );
    }

    fn opinion(beliefs: &[f64], u: f64) -> Opinion {
        Opinion::from_parts(beliefs.to_vec(), u).unwrap()
    }

    /// Independent brute-force Dempster combiner over the focal sets
    /// {each singleton class, whole frame}. The frame's mass is the
    /// uncertainty; singleton intersections follow set semantics.
    fn brute_force_combine(a: &Opinion, b: &Opinion) -> Option<(Vec<f64>, f64)> {
        let classes = a.class_count();
        // Focal set encoding: Some(c) is the singleton {c}, None is the frame.
        let focals = |op: &Opinion| -> Vec<(Option<usize>, f64)> {
            let mut sets: Vec<(Option<usize>, f64)> = op
                .beliefs()
                .iter()
                .enumerate()
                .map(|(c, &mass)| (Some(c), mass))
                .collect();
            sets.push((None, op.uncertainty()));
            sets
        };
        let mut fused = vec![0.0; classes];
        let mut frame_mass = 0.0;
        let mut empty_mass = 0.0;
        for &(set_a, mass_a) in &focals(a) {
            for &(set_b, mass_b) in &focals(b) {
                let product = mass_a * mass_b;
                match (set_a, set_b) {
                    (Some(i), Some(j)) if i == j => fused[i] += product,
                    (Some(_), Some(_)) => empty_mass += product,
                    (Some(i), None) => fused[i] += product,
                    (None, Some(j)) => fused[j] += product,
                    (None, None) => frame_mass += product,
                }
            }
        }
        let norm = 1.0 - empty_mass;
        if norm <= CONFLICT_EPSILON {
            return None;
        }
        for mass in &mut fused {
            *mass /= norm;
        }
        Some((fused, frame_mass / norm))
    }

    fn random_opinion(rng: &mut StdRng, classes: usize) -> Opinion {
        // Dirichlet(1, ..., 1) over beliefs plus uncertainty.
        let mut parts: Vec<f64> = (0..=classes)
            .map(|_| -(rng.random_range(f64::EPSILON..1.0f64)).ln())
            .collect();
        let total: f64 = parts.iter().sum();
        for p in &mut parts {
            *p /= total;
        }
        let uncertainty = parts.pop().unwrap();
        Opinion::renormalized(parts, uncertainty)
    }

    #[test]
    fn vacuous_opinion_produces_zero_conflict() {
        let any = opinion(&[0.6, 0.2], 0.2);
        let k = conflict(&Opinion::vacuous(2), &any).unwrap();
        assert_eq!(k.value(), 0.0);
    }

    #[test]
    fn opposed_certain_opinions_conflict_totally() {
        let a = opinion(&[1.0, 0.0], 0.0);
        let b = opinion(&[0.0, 1.0], 0.0);
        assert_close(conflict(&a, &b).unwrap().value(), 1.0, 1e-15);
        assert!(matches!(
            combine_pair(&a, &b),
            Err(Error::TotalConflict { .. })
        ));
    }

    #[test]
    fn conflict_hand_example() {
        let a = opinion(&[0.6, 0.2], 0.2);
        let b = opinion(&[0.4, 0.4], 0.2);
        // 0.6 * 0.4 + 0.2 * 0.4 = 0.32
        assert_close(conflict(&a, &b).unwrap().value(), 0.32, 1e-15);
    }

    #[test]
    fn conflict_requires_matching_class_counts() {
        let a = opinion(&[0.5, 0.5], 0.0);
        let b = opinion(&[0.3, 0.3, 0.3], 0.1);
        assert!(matches!(
            conflict(&a, &b),
            Err(Error::DimensionMismatch { left: 2, right: 3 })
        ));
    }

    #[test]
    fn vacuous_is_the_identity_element() {
        let x = opinion(&[0.5, 0.25], 0.25);
        let left = combine_pair(&Opinion::vacuous(2), &x).unwrap();
        let right = combine_pair(&x, &Opinion::vacuous(2)).unwrap();
        for fused in [left, right] {
            for (got, want) in fused.beliefs().iter().zip(x.beliefs()) {
                assert_close(*got, *want, 1e-12);
            }
            assert_close(fused.uncertainty(), x.uncertainty(), 1e-12);
        }
    }

    #[test]
    fn combine_pair_hand_example() {
        let a = opinion(&[0.6, 0.2], 0.2);
        let b = opinion(&[0.4, 0.4], 0.2);
        let fused = combine_pair(&a, &b).unwrap();
        assert_close(fused.beliefs()[0], 0.44 / 0.68, 1e-12);
        assert_close(fused.beliefs()[1], 0.20 / 0.68, 1e-12);
        assert_close(fused.uncertainty(), 0.04 / 0.68, 1e-12);
        assert_close(fused.beliefs()[0], 0.647059, 1e-6);
        assert_close(fused.beliefs()[1], 0.294118, 1e-6);
        assert_close(fused.uncertainty(), 0.058824, 1e-6);
    }

    #[test]
    fn certain_opinion_dominates() {
        let a = opinion(&[0.3, 0.3, 0.2], 0.2);
        let certain = opinion(&[0.0, 1.0, 0.0], 0.0);
        let fused = combine_pair(&a, &certain).unwrap();
        assert_close(fused.beliefs()[1], 1.0, 1e-12);
        assert_close(fused.beliefs()[0], 0.0, 1e-15);
        assert_close(fused.beliefs()[2], 0.0, 1e-15);
        assert_close(fused.uncertainty(), 0.0, 1e-15);
    }

    #[test]
    fn zero_conflict_contracts_uncertainty() {
        // Both opinions concentrated on the same class: k = 0.
        let a = opinion(&[0.7, 0.0], 0.3);
        let b = opinion(&[0.5, 0.0], 0.5);
        assert_eq!(conflict(&a, &b).unwrap().value(), 0.0);
        let fused = combine_pair(&a, &b).unwrap();
        assert_close(fused.uncertainty(), 0.3 * 0.5, 1e-12);
        assert!(fused.uncertainty() <= 0.3);
    }

    #[test]
    fn combine_many_single_element_returns_it() {
        let x = opinion(&[0.4, 0.1], 0.5);
        let fused = combine_many(std::slice::from_ref(&x)).unwrap();
        assert_eq!(fused, x);
    }

    #[test]
    fn combine_many_of_vacuous_stays_vacuous() {
        let fused = combine_many(&[
            Opinion::vacuous(3),
            Opinion::vacuous(3),
            Opinion::vacuous(3),
        ])
        .unwrap();
        assert_eq!(fused.beliefs(), &[0.0, 0.0, 0.0]);
        assert_close(fused.uncertainty(), 1.0, 1e-15);
    }

    #[test]
    fn combine_many_rejects_empty_input() {
        assert!(matches!(combine_many(&[]), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn all_fold_orders_agree() {
        let mut rng = StdRng::seed_from_u64(7);
        for _ in 0..50 {
            let ops: Vec<Opinion> = (0..3).map(|_| random_opinion(&mut rng, 3)).collect();
            let orders: [[usize; 3]; 6] = [
                [0, 1, 2],
                [0, 2, 1],
                [1, 0, 2],
                [1, 2, 0],
                [2, 0, 1],
                [2, 1, 0],
            ];
            let reference = combine_many(&ops).unwrap();
            for order in orders {
                let permuted: Vec<Opinion> = order.iter().map(|&i| ops[i].clone()).collect();
                let fused = combine_many(&permuted).unwrap();
                for (got, want) in fused.beliefs().iter().zip(reference.beliefs()) {
                    assert_close(*got, *want, 1e-10);
                }
                assert_close(fused.uncertainty(), reference.uncertainty(), 1e-10);
            }
        }
    }

    #[test]
    fn matches_brute_force_dempster_combiner() {
        let mut rng = StdRng::seed_from_u64(11);
        for round in 0..2000 {
            let classes = 2 + round % 5;
            let a = random_opinion(&mut rng, classes);
            let b = random_opinion(&mut rng, classes);
            let fused = combine_pair(&a, &b).unwrap();
            let (oracle_beliefs, oracle_u) = brute_force_combine(&a, &b).unwrap();
            for (got, want) in fused.beliefs().iter().zip(&oracle_beliefs) {
                assert_close(*got, *want, 1e-12);
            }
            assert_close(fused.uncertainty(), oracle_u, 1e-12);
        }
    }

    #[test]
    fn combination_is_commutative_and_associative() {
        let mut rng = StdRng::seed_from_u64(13);
        for round in 0..2000 {
            let classes = 2 + round % 4;
            let a = random_opinion(&mut rng, classes);
            let b = random_opinion(&mut rng, classes);
            let c = random_opinion(&mut rng, classes);

            let ab = combine_pair(&a, &b).unwrap();
            let ba = combine_pair(&b, &a).unwrap();
            for (x, y) in ab.beliefs().iter().zip(ba.beliefs()) {
                assert_close(*x, *y, 1e-12);
            }
            assert_close(ab.uncertainty(), ba.uncertainty(), 1e-12);

            let left = combine_pair(&ab, &c).unwrap();
            let right = combine_pair(&a, &combine_pair(&b, &c).unwrap()).unwrap();
            for (x, y) in left.beliefs().iter().zip(right.beliefs()) {
                assert_close(*x, *y, 1e-10);
            }
            assert_close(left.uncertainty(), right.uncertainty(), 1e-10);
        }
    }

    #[test]
    fn fused_opinions_stay_normalized() {
        let mut rng = StdRng::seed_from_u64(17);
        for round in 0..2000 {
            let classes = 2 + round % 6;
            let a = random_opinion(&mut rng, classes);
            let b = random_opinion(&mut rng, classes);
            let fused = combine_pair(&a, &b).unwrap();
            let sum: f64 = fused.beliefs().iter().sum::<f64>() + fused.uncertainty();
            assert_close(sum, 1.0, 1e-12);
            assert!(fused.beliefs().iter().all(|&x| x >= 0.0));
        }
    }
}
