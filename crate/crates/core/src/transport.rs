//! Exact first-order Wasserstein distance between equal-size empirical
//! sample sets.
//!
//! For equal-size empirical measures the optimal coupling is an assignment,
//! so `W1 = (1/n) min_sigma sum_i cost(a_i, b_sigma(i))`, solved exactly by
//! an `O(n^3)` Hungarian algorithm with dual potentials. A factorial-time
//! brute force over permutations doubles as the small-instance oracle.

use crate::error::{Error, Result};
use crate::lie::{distance_so3, Rotation};
use crate::samples::SampleSet;
use crate::scalar::{cst, Scalar};

/// Ground cost. Euclidean on `R3` coincides with its geodesic cost (straight
/// lines); on `SO(3)` the geodesic cost is `||log(r0^T r1)||_F` and the
/// Euclidean cost is the chordal Frobenius distance.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CostKind {
    Euclidean,
    Geodesic,
}

impl CostKind {
    pub fn name(self) -> &'static str {
        match self {
            CostKind::Euclidean => "euclidean",
            CostKind::Geodesic => "geodesic",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "euclidean" => Ok(CostKind::Euclidean),
            "geodesic" => Ok(CostKind::Geodesic),
            other => Err(Error::InvalidConfig(format!(
                "unknown cost '{other}' (expected euclidean or geodesic)"
            ))),
        }
    }
}

/// Geodesic transport cost on `SO(3)`.
pub fn so3_cost<S: Scalar>(r0: &Rotation<S>, r1: &Rotation<S>) -> S {
    distance_so3(r0, r1)
}

fn chordal_cost<S: Scalar>(r0: &Rotation<S>, r1: &Rotation<S>) -> S {
    (*r0.matrix() - *r1.matrix()).frobenius_norm()
}

/// Dense pairwise cost matrix; errors on size mismatch, mixed spaces or a
/// non-finite entry.
pub fn cost_matrix<S: Scalar>(
    a: &SampleSet<S>,
    b: &SampleSet<S>,
    cost: CostKind,
) -> Result<Vec<Vec<S>>> {
    if a.len() != b.len() {
        return Err(Error::SizeMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    let n = a.len();
    let mut m = vec![vec![S::zero(); n]; n];
    match (a, b) {
        (SampleSet::R3(xs), SampleSet::R3(ys)) => {
            for (i, x) in xs.iter().enumerate() {
                for (j, y) in ys.iter().enumerate() {
                    m[i][j] = (*x - *y).norm();
                }
            }
        }
        (SampleSet::So3(xs), SampleSet::So3(ys)) => {
            for (i, x) in xs.iter().enumerate() {
                for (j, y) in ys.iter().enumerate() {
                    m[i][j] = match cost {
                        CostKind::Geodesic => so3_cost(x, y),
                        CostKind::Euclidean => chordal_cost(x, y),
                    };
                }
            }
        }
        _ => return Err(Error::SpaceMismatch),
    }
    for (i, row) in m.iter().enumerate() {
        for (j, &c) in row.iter().enumerate() {
            if !c.is_finite() {
                return Err(Error::CostOverflow { i, j });
            }
        }
    }
    Ok(m)
}

/// Minimum-cost perfect assignment on a square cost matrix.
///
/// Hungarian algorithm with dual potentials and shortest augmenting paths,
/// `O(n^3)`. Returns the column assigned to each row and the total cost
/// (re-summed from the original matrix entries).
pub fn solve_assignment<S: Scalar>(cost: &[Vec<S>]) -> (Vec<usize>, S) {
    let n = cost.len();
    assert!(n > 0 && cost.iter().all(|r| r.len() == n));
    let inf = S::infinity();

    // 1-based arrays; p[j] is the row matched to column j.
    let mut u = vec![S::zero(); n + 1];
    let mut v = vec![S::zero(); n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];

    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![inf; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = inf;
            let mut j1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut row_to_col = vec![0usize; n];
    for j in 1..=n {
        row_to_col[p[j] - 1] = j - 1;
    }
    let mut total = S::zero();
    for (i, &j) in row_to_col.iter().enumerate() {
        total += cost[i][j];
    }
    (row_to_col, total)
}

/// Exact W1 between two equal-size sample sets.
pub fn w1_exact<S: Scalar>(a: &SampleSet<S>, b: &SampleSet<S>, cost: CostKind) -> Result<S> {
    let m = cost_matrix(a, b, cost)?;
    let n = m.len();
    let (_, total) = solve_assignment(&m);
    Ok(total / cst::<S>(n as f64))
}

/// Maximum instance size accepted by [`w1_bruteforce`].
pub const BRUTE_FORCE_MAX: usize = 8;

/// Exhaustive minimum over all `n!` permutations, for cross-checking the
/// assignment solver on tiny instances.
pub fn w1_bruteforce<S: Scalar>(a: &SampleSet<S>, b: &SampleSet<S>, cost: CostKind) -> Result<S> {
    let n = a.len();
    if n > BRUTE_FORCE_MAX {
        return Err(Error::TooLarge {
            n,
            max: BRUTE_FORCE_MAX,
        });
    }
    let m = cost_matrix(a, b, cost)?;
    let mut perm: Vec<usize> = (0..n).collect();
    let mut best = S::infinity();
    permute(&mut perm, 0, &mut |p| {
        let mut total = S::zero();
        for (i, &j) in p.iter().enumerate() {
            total += m[i][j];
        }
        if total < best {
            best = total;
        }
    });
    Ok(best / cst::<S>(n as f64))
}

fn permute<F: FnMut(&[usize])>(items: &mut [usize], k: usize, visit: &mut F) {
    if k == items.len() {
        visit(items);
        return;
    }
    for i in k..items.len() {
        items.swap(k, i);
        permute(items, k + 1, visit);
        items.swap(k, i);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::{exp_map, Vec3};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_r3_set(rng: &mut ChaCha8Rng, n: usize) -> SampleSet<f64> {
        SampleSet::R3(
            (0..n)
                .map(|_| {
                    Vec3::new(
                        rng.random_range(-2.0..2.0),
                        rng.random_range(-2.0..2.0),
                        rng.random_range(-2.0..2.0),
                    )
                })
                .collect(),
        )
    }

    fn random_so3_set(rng: &mut ChaCha8Rng, n: usize) -> SampleSet<f64> {
        SampleSet::So3(
            (0..n)
                .map(|_| {
                    let v = Vec3::new(
                        rng.random_range(-1.0..1.0),
                        rng.random_range(-1.0..1.0),
                        rng.random_range(-1.0..1.0),
                    );
                    exp_map(v)
                })
                .collect(),
        )
    }

    #[test]
    fn identical_sets_have_zero_distance() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = random_r3_set(&mut rng, 10);
        assert_eq!(w1_exact(&a, &a, CostKind::Euclidean).unwrap(), 0.0);
        let r = random_so3_set(&mut rng, 10);
        assert_eq!(w1_exact(&r, &r, CostKind::Geodesic).unwrap(), 0.0);
    }

    #[test]
    fn single_pair_distance_is_the_cost() {
        let a = SampleSet::R3(vec![Vec3::new(0.0, 0.0, 0.0)]);
        let b = SampleSet::R3(vec![Vec3::new(3.0, 4.0, 0.0)]);
        assert_eq!(w1_exact(&a, &b, CostKind::Euclidean).unwrap(), 5.0);
        assert_eq!(w1_bruteforce(&a, &b, CostKind::Euclidean).unwrap(), 5.0);
    }

    #[test]
    fn crossing_pair_matches_identity_assignment() {
        let a = SampleSet::R3(vec![Vec3::new(0.0, 0.0, 0.0), Vec3::new(1.0, 0.0, 0.0)]);
        let b = SampleSet::R3(vec![Vec3::new(1.0, 0.0, 0.0), Vec3::new(0.0, 0.0, 0.0)]);
        assert_eq!(w1_exact(&a, &b, CostKind::Euclidean).unwrap(), 0.0);
        assert_eq!(w1_bruteforce(&a, &b, CostKind::Euclidean).unwrap(), 0.0);
    }

    #[test]
    fn exact_agrees_with_brute_force_on_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for case in 0..200 {
            let n = rng.random_range(2..=6);
            let (a, b, cost) = if case % 2 == 0 {
                (
                    random_r3_set(&mut rng, n),
                    random_r3_set(&mut rng, n),
                    CostKind::Euclidean,
                )
            } else {
                (
                    random_so3_set(&mut rng, n),
                    random_so3_set(&mut rng, n),
                    CostKind::Geodesic,
                )
            };
            let exact = w1_exact(&a, &b, cost).unwrap();
            let brute = w1_bruteforce(&a, &b, cost).unwrap();
            assert!(
                (exact - brute).abs() < 1e-12,
                "case {case}: {exact} vs {brute}"
            );
        }
    }

    #[test]
    fn w1_is_symmetric_and_satisfies_triangle_inequality() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let a = random_r3_set(&mut rng, 12);
            let b = random_r3_set(&mut rng, 12);
            let c = random_r3_set(&mut rng, 12);
            let ab = w1_exact(&a, &b, CostKind::Euclidean).unwrap();
            let ba = w1_exact(&b, &a, CostKind::Euclidean).unwrap();
            let ac = w1_exact(&a, &c, CostKind::Euclidean).unwrap();
            let cb = w1_exact(&c, &b, CostKind::Euclidean).unwrap();
            assert!((ab - ba).abs() < 1e-12);
            assert!(ab <= ac + cb + 1e-12);
        }
    }

    #[test]
    fn translation_covariance_in_r3() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let a = random_r3_set(&mut rng, 16);
        let b = random_r3_set(&mut rng, 16);
        let shift = Vec3::new(0.3, -1.2, 0.7);
        let shift_set = |s: &SampleSet<f64>| {
            SampleSet::R3(s.as_r3().unwrap().iter().map(|p| *p + shift).collect())
        };
        let base = w1_exact(&a, &b, CostKind::Euclidean).unwrap();
        let both = w1_exact(&shift_set(&a), &shift_set(&b), CostKind::Euclidean).unwrap();
        assert!((base - both).abs() < 1e-12);

        let one = w1_exact(&a, &shift_set(&b), CostKind::Euclidean).unwrap();
        assert!((one - base).abs() <= shift.norm() + 1e-12);
    }

    #[test]
    fn rotation_invariance_on_so3() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = random_so3_set(&mut rng, 16);
        let b = random_so3_set(&mut rng, 16);
        let g = exp_map(Vec3::new(0.4, 0.9, -0.3));
        let rotate = |s: &SampleSet<f64>| {
            SampleSet::So3(s.as_so3().unwrap().iter().map(|r| g * *r).collect())
        };
        let base = w1_exact(&a, &b, CostKind::Geodesic).unwrap();
        let moved = w1_exact(&rotate(&a), &rotate(&b), CostKind::Geodesic).unwrap();
        assert!((base - moved).abs() < 1e-10);
    }

    #[test]
    fn size_mismatch_and_brute_force_limit_are_rejected() {
        let a = SampleSet::R3(vec![Vec3::new(0.0, 0.0, 0.0)]);
        let b = SampleSet::R3(vec![Vec3::new(0.0, 0.0, 0.0), Vec3::new(1.0, 0.0, 0.0)]);
        assert!(matches!(
            w1_exact(&a, &b, CostKind::Euclidean),
            Err(Error::SizeMismatch { .. })
        ));

        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let big_a = random_r3_set(&mut rng, 9);
        let big_b = random_r3_set(&mut rng, 9);
        assert!(matches!(
            w1_bruteforce(&big_a, &big_b, CostKind::Euclidean),
            Err(Error::TooLarge { .. })
        ));
    }

    #[test]
    fn non_finite_costs_are_detected() {
        let a = SampleSet::R3(vec![Vec3::new(f64::INFINITY, 0.0, 0.0)]);
        let b = SampleSet::R3(vec![Vec3::new(0.0, 0.0, 0.0)]);
        assert!(matches!(
            w1_exact(&a, &b, CostKind::Euclidean),
            Err(Error::CostOverflow { .. })
        ));
    }

    #[test]
    fn mixed_spaces_are_rejected() {
        let a = SampleSet::R3(vec![Vec3::new(0.0, 0.0, 0.0)]);
        let b = SampleSet::<f64>::So3(vec![exp_map(Vec3::new(0.1, 0.0, 0.0))]);
        assert!(matches!(
            w1_exact(&a, &b, CostKind::Euclidean),
            Err(Error::SpaceMismatch)
        ));
    }

    #[test]
    fn assignment_recovers_zero_cost_on_permuted_sets() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 256;
        let points: Vec<Vec3<f64>> = (0..n)
            .map(|_| {
                Vec3::new(
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                )
            })
            .collect();
        let mut shuffled = points.clone();
        for i in (1..n).rev() {
            let j = rng.random_range(0..=i);
            shuffled.swap(i, j);
        }
        let a = SampleSet::R3(points);
        let b = SampleSet::R3(shuffled);
        let w = w1_exact(&a, &b, CostKind::Euclidean).unwrap();
        assert!(w.abs() < 1e-12, "permuted set distance {w}");
    }
}
