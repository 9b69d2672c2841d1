//! k-medoids by alternating assignment and medoid update, with seeded
//! random restarts.
//!
//! Each run minimizes `sum_i d(x_i, c_{a(i)})` over medoid sets `C` drawn
//! from the data: assign every point to its closest medoid, move every
//! medoid to the member with the smallest within-cluster distance sum, and
//! repeat while the assignments keep changing.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::manifold::DistanceMatrix;

/// Safety bound on assign/update rounds per run.
pub const MAX_ITERATIONS: usize = 200;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClusteringResult {
    pub medoids: Vec<usize>,
    /// Cluster index (into `medoids`) of every point.
    pub assignments: Vec<usize>,
    pub objective: f64,
    pub iterations: usize,
    pub seed: u64,
    /// The run stopped at [`MAX_ITERATIONS`] rather than converging.
    pub hit_iteration_cap: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Step {
    Assign,
    Update,
}

/// Objective value after one step of a run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceStep {
    pub step: Step,
    pub objective: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RestartStats {
    pub n_restarts: usize,
    /// Index (0-based) of the restart that produced the returned result.
    pub best_restart: usize,
    pub cap_hits: usize,
    pub objectives: Vec<f64>,
}

/// Nearest medoid of every point; ties go to the lower cluster index.
pub fn assign(d: &DistanceMatrix, medoids: &[usize]) -> Result<Vec<usize>> {
    check_medoids(d, medoids)?;
    Ok(assign_unchecked(d, medoids))
}

fn assign_unchecked(d: &DistanceMatrix, medoids: &[usize]) -> Vec<usize> {
    (0..d.n())
        .map(|i| {
            let row = d.row(i);
            let mut best = 0;
            for (j, &m) in medoids.iter().enumerate().skip(1) {
                if row[m] < row[medoids[best]] {
                    best = j;
                }
            }
            best
        })
        .collect()
}

fn check_medoids(d: &DistanceMatrix, medoids: &[usize]) -> Result<()> {
    if medoids.is_empty() {
        return Err(Error::invalid("no medoids"));
    }
    let mut seen = vec![false; d.n()];
    for &m in medoids {
        if m >= d.n() {
            return Err(Error::IndexOutOfRange(format!("medoid {m} in a {}-point matrix", d.n())));
        }
        if std::mem::replace(&mut seen[m], true) {
            return Err(Error::invalid(format!("duplicate medoid {m}")));
        }
    }
    Ok(())
}

/// Member with the smallest summed distance to its cluster (ties to the lower
/// point index), or `None` for an empty cluster.
fn cluster_medoid(d: &DistanceMatrix, members: &[usize]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for &c in members {
        let row = d.row(c);
        let cost: f64 = members.iter().map(|&i| row[i]).sum();
        if best.is_none_or(|(_, b)| cost < b) {
            best = Some((c, cost));
        }
    }
    best.map(|(c, _)| c)
}

fn members_by_cluster(assignments: &[usize], k: usize) -> Vec<Vec<usize>> {
    let mut members = vec![Vec::new(); k];
    for (i, &a) in assignments.iter().enumerate() {
        members[a].push(i);
    }
    members
}

/// New medoid of each of the `k` clusters. Every cluster must be non-empty.
pub fn update_medoids(d: &DistanceMatrix, assignments: &[usize], k: usize) -> Result<Vec<usize>> {
    if assignments.len() != d.n() {
        return Err(Error::DimensionMismatch(format!(
            "{} assignments for {} points",
            assignments.len(),
            d.n()
        )));
    }
    if let Some(&a) = assignments.iter().find(|&&a| a >= k) {
        return Err(Error::IndexOutOfRange(format!("cluster {a} with k = {k}")));
    }
    members_by_cluster(assignments, k)
        .iter()
        .enumerate()
        .map(|(j, m)| cluster_medoid(d, m).ok_or_else(|| Error::invalid(format!("cluster {j} is empty"))))
        .collect()
}

/// `sum_i d(i, medoids[assignments[i]])`.
pub fn objective(d: &DistanceMatrix, medoids: &[usize], assignments: &[usize]) -> f64 {
    assignments
        .iter()
        .enumerate()
        .map(|(i, &a)| d.get(i, medoids[a]))
        .sum()
}

/// Assignment followed by the empty-cluster repair: an empty cluster's
/// medoid moves to the point farthest from its own medoid, then points are
/// reassigned.
fn assign_with_repair(d: &DistanceMatrix, medoids: &mut [usize]) -> Vec<usize> {
    let k = medoids.len();
    let mut assignments = assign_unchecked(d, medoids);
    for _ in 0..d.n() {
        let mut counts = vec![0usize; k];
        for &a in &assignments {
            counts[a] += 1;
        }
        let Some(empty) = counts.iter().position(|&c| c == 0) else {
            break;
        };
        let far = (0..d.n())
            .filter(|p| !medoids.contains(p))
            .map(|p| (p, d.get(p, medoids[assignments[p]])))
            .fold(None, |best: Option<(usize, f64)>, (p, v)| match best {
                Some((_, b)) if v <= b => best,
                _ => Some((p, v)),
            });
        match far {
            Some((p, v)) if v > 0.0 => medoids[empty] = p,
            // every point already sits on a medoid: nothing can fill the cluster
            _ => break,
        }
        assignments = assign_unchecked(d, medoids);
    }
    assignments
}

fn update_step(d: &DistanceMatrix, assignments: &[usize], medoids: &[usize]) -> Vec<usize> {
    members_by_cluster(assignments, medoids.len())
        .iter()
        .zip(medoids)
        .map(|(m, &old)| cluster_medoid(d, m).unwrap_or(old))
        .collect()
}

fn initial_medoids(n: usize, k: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample(&mut rng, n, k).into_vec()
}

fn check_k(d: &DistanceMatrix, k: usize) -> Result<()> {
    if k < 1 || k > d.n() {
        return Err(Error::invalid(format!("k = {k} must lie in [1, {}]", d.n())));
    }
    Ok(())
}

/// One k-medoids run from `k` medoids sampled uniformly without replacement.
pub fn kmedoids(d: &DistanceMatrix, k: usize, seed: u64) -> Result<ClusteringResult> {
    check_k(d, k)?;
    Ok(run(d, initial_medoids(d.n(), k, seed), seed, None))
}

/// Like [`kmedoids`], also returning the objective after every step.
pub fn kmedoids_traced(d: &DistanceMatrix, k: usize, seed: u64) -> Result<(ClusteringResult, Vec<TraceStep>)> {
    check_k(d, k)?;
    let mut trace = Vec::new();
    let result = run(d, initial_medoids(d.n(), k, seed), seed, Some(&mut trace));
    Ok((result, trace))
}

/// A run from caller-chosen initial medoids.
pub fn kmedoids_from(d: &DistanceMatrix, initial: &[usize]) -> Result<ClusteringResult> {
    check_medoids(d, initial)?;
    Ok(run(d, initial.to_vec(), 0, None))
}

fn run(d: &DistanceMatrix, mut medoids: Vec<usize>, seed: u64, mut trace: Option<&mut Vec<TraceStep>>) -> ClusteringResult {
    let mut record = |step: Step, medoids: &[usize], assignments: &[usize]| {
        if let Some(t) = trace.as_deref_mut() {
            t.push(TraceStep {
                step,
                objective: objective(d, medoids, assignments),
            });
        }
    };
    let mut assignments = assign_with_repair(d, &mut medoids);
    record(Step::Assign, &medoids, &assignments);
    let mut iterations = 0;
    let mut hit_iteration_cap = true;
    while iterations < MAX_ITERATIONS {
        iterations += 1;
        let mut next = update_step(d, &assignments, &medoids);
        record(Step::Update, &next, &assignments);
        let next_assignments = assign_with_repair(d, &mut next);
        record(Step::Assign, &next, &next_assignments);
        medoids = next;
        if next_assignments == assignments {
            hit_iteration_cap = false;
            break;
        }
        assignments = next_assignments;
    }
    if hit_iteration_cap {
        log::warn!("k-medoids run with seed {seed} hit the {MAX_ITERATIONS}-iteration cap");
    }
    ClusteringResult {
        objective: objective(d, &medoids, &assignments),
        medoids,
        assignments,
        iterations,
        seed,
        hit_iteration_cap,
    }
}

/// Best of `n_restarts` runs with seeds `seed, seed + 1, ...` by objective
/// (ties to the earliest restart).
pub fn kmedoids_restarts(d: &DistanceMatrix, k: usize, n_restarts: usize, seed: u64) -> Result<ClusteringResult> {
    kmedoids_restarts_with_stats(d, k, n_restarts, seed).map(|(r, _)| r)
}

pub fn kmedoids_restarts_with_stats(
    d: &DistanceMatrix,
    k: usize,
    n_restarts: usize,
    seed: u64,
) -> Result<(ClusteringResult, RestartStats)> {
    check_k(d, k)?;
    if n_restarts < 1 {
        return Err(Error::invalid("n_restarts must be at least 1"));
    }
    // runs finish in any order; the reduction below is over restart index
    let runs: Vec<ClusteringResult> = (0..n_restarts)
        .into_par_iter()
        .map(|r| run(d, initial_medoids(d.n(), k, seed.wrapping_add(r as u64)), seed.wrapping_add(r as u64), None))
        .collect();
    let mut best_restart = 0;
    for (r, res) in runs.iter().enumerate() {
        if res.objective < runs[best_restart].objective {
            best_restart = r;
        }
    }
    let stats = RestartStats {
        n_restarts,
        best_restart,
        cap_hits: runs.iter().filter(|r| r.hit_iteration_cap).count(),
        objectives: runs.iter().map(|r| r.objective).collect(),
    };
    let best = runs.into_iter().nth(best_restart).expect("at least one restart");
    Ok((best, stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::DistanceKind;

    fn line(points: &[f64]) -> DistanceMatrix {
        let n = points.len();
        let values = (0..n * n)
            .map(|k| (points[k / n] - points[k % n]).abs())
            .collect();
        DistanceMatrix::new(n, values, DistanceKind::L2).unwrap()
    }

    #[test]
    fn assign_on_a_line() {
        let d = line(&[0.0, 1.0, 10.0, 11.0]);
        assert_eq!(assign(&d, &[0, 3]).unwrap(), vec![0, 0, 1, 1]);
    }

    #[test]
    fn medoids_assign_to_themselves() {
        let d = line(&[0.0, 1.0, 10.0, 11.0, 4.0]);
        let medoids = [4, 1, 2];
        let a = assign(&d, &medoids).unwrap();
        for (j, &m) in medoids.iter().enumerate() {
            assert_eq!(a[m], j);
        }
    }

    #[test]
    fn equidistant_point_goes_to_first_cluster() {
        let d = line(&[0.0, 5.0, 10.0]);
        assert_eq!(assign(&d, &[0, 2]).unwrap()[1], 0);
        assert_eq!(assign(&d, &[2, 0]).unwrap()[1], 0);
    }

    #[test]
    fn assign_rejects_bad_medoids() {
        let d = line(&[0.0, 5.0, 10.0]);
        assert!(assign(&d, &[0, 0]).is_err());
        assert!(assign(&d, &[3]).is_err());
        assert!(assign(&d, &[]).is_err());
    }

    #[test]
    fn update_picks_minimum_sum_member() {
        let d = line(&[0.0, 1.0, 10.0]);
        assert_eq!(update_medoids(&d, &[0, 0, 0], 1).unwrap(), vec![1]);
    }

    #[test]
    fn update_singleton_and_ties() {
        let d = line(&[0.0, 1.0, 10.0, 20.0]);
        assert_eq!(update_medoids(&d, &[0, 0, 1, 2], 3).unwrap(), vec![0, 2, 3]);
        assert!(update_medoids(&d, &[0, 0, 0, 0], 2).is_err());
    }

    #[test]
    fn k_equals_n_gives_zero_objective() {
        let d = line(&[0.0, 1.0, 10.0, 11.0, 4.0]);
        let r = kmedoids(&d, 5, 7).unwrap();
        assert_eq!(r.objective, 0.0);
        let mut m = r.medoids.clone();
        m.sort_unstable();
        assert_eq!(m, vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn k_one_is_the_one_median() {
        let d = line(&[0.0, 1.0, 10.0, 11.0, 4.0]);
        let best = (0..5)
            .map(|c| d.row(c).iter().sum::<f64>())
            .fold(f64::INFINITY, f64::min);
        for seed in 0..5 {
            assert_eq!(kmedoids(&d, 1, seed).unwrap().objective, best);
        }
    }

    #[test]
    fn two_pairs_on_a_line() {
        let d = line(&[0.0, 1.0, 10.0, 11.0]);
        let r = kmedoids_restarts(&d, 2, 20, 0).unwrap();
        assert_eq!(r.objective, 2.0);
        let mut m = r.medoids.clone();
        m.sort_unstable();
        assert!([[0, 2], [0, 3], [1, 2], [1, 3]].contains(&[m[0], m[1]]));
    }

    #[test]
    fn k_out_of_range() {
        let d = line(&[0.0, 1.0]);
        assert!(kmedoids(&d, 0, 0).is_err());
        assert!(kmedoids(&d, 3, 0).is_err());
        assert!(kmedoids_restarts(&d, 1, 0, 0).is_err());
    }

    #[test]
    fn single_restart_matches_single_run() {
        let d = line(&[0.0, 1.0, 10.0, 11.0, 4.0, 7.5, 3.2]);
        assert_eq!(kmedoids_restarts(&d, 3, 1, 42).unwrap(), kmedoids(&d, 3, 42).unwrap());
    }

    #[test]
    fn restarts_are_reproducible() {
        let d = line(&(0..30).map(|i| ((i * 37) % 17) as f64 * 1.3).collect::<Vec<_>>());
        let (a, sa) = kmedoids_restarts_with_stats(&d, 4, 25, 9).unwrap();
        let (b, sb) = kmedoids_restarts_with_stats(&d, 4, 25, 9).unwrap();
        assert_eq!(a, b);
        assert_eq!(sa, sb);
        assert_eq!(sa.objectives[sa.best_restart], a.objective);
        assert_eq!(a.seed, 9 + sa.best_restart as u64);
    }

    #[test]
    fn duplicate_points_do_not_stall() {
        // every point identical: clusters beyond the first stay empty
        let d = DistanceMatrix::new(4, vec![0.0; 16], DistanceKind::L2).unwrap();
        let r = kmedoids(&d, 2, 1).unwrap();
        assert_eq!(r.objective, 0.0);
        assert!(!r.hit_iteration_cap);
    }

    #[test]
    fn empty_cluster_is_repaired() {
        // points 0 and 1 coincide; as medoids, cluster 1 starts empty
        let d = line(&[0.0, 0.0, 10.0, 11.0]);
        let r = kmedoids_from(&d, &[0, 1]).unwrap();
        assert_eq!(r.objective, 1.0);
        let a = &r.assignments;
        assert_eq!(a[0], a[1]);
        assert_eq!(a[2], a[3]);
        assert_ne!(a[0], a[2]);
    }

    #[test]
    fn trace_is_monotone() {
        let d = line(&(0..40).map(|i| ((i * 53) % 29) as f64 + 0.1 * i as f64).collect::<Vec<_>>());
        for seed in 0..20 {
            let (r, trace) = kmedoids_traced(&d, 5, seed).unwrap();
            for w in trace.windows(2) {
                assert!(w[1].objective <= w[0].objective + 1e-12);
            }
            assert_eq!(trace.last().unwrap().objective, r.objective);
        }
    }
}
