use proptest::prelude::*;

use gcwssim::cluster::{assign, kmedoids, objective};
use gcwssim::eval::evaluate;
use gcwssim::heatmap::heatmap;
use gcwssim::io::{decode_gdm1, encode_gdm1, matrix_from_text, matrix_to_text};
use gcwssim::manifold::{geodesic_matrix, knn_graph, DistanceKind, DistanceMatrix, GraphOptions};

/// Euclidean distances between random points in the plane.
fn points_matrix() -> impl Strategy<Value = DistanceMatrix> {
    prop::collection::vec((-10.0f64..10.0, -10.0f64..10.0), 3..30).prop_map(|pts| {
        let n = pts.len();
        let mut v = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                v[i * n + j] = (pts[i].0 - pts[j].0).hypot(pts[i].1 - pts[j].1);
            }
        }
        DistanceMatrix::new(n, v, DistanceKind::L2).unwrap()
    })
}

fn labelings() -> impl Strategy<Value = (Vec<usize>, Vec<usize>)> {
    (2usize..120).prop_flat_map(|n| (prop::collection::vec(0usize..6, n), prop::collection::vec(0usize..6, n)))
}

proptest! {
    #[test]
    fn geodesics_are_metric_and_bounded_by_edges(d in points_matrix(), t in 1usize..6) {
        let t = t.min(d.n() - 1);
        let opts = GraphOptions { bridge: true, ..GraphOptions::default() };
        let g = geodesic_matrix(&d, t, &opts).unwrap();
        prop_assert!(g.triangle_violation(1e-9).is_none());
        for (i, j, w) in knn_graph(&d, t).unwrap().edges() {
            prop_assert!(g.get(i, j) <= w + 1e-12);
        }
        for (a, b) in g.values().iter().zip(d.values()) {
            prop_assert!(*a + 1e-9 >= *b);
        }
    }

    #[test]
    fn geodesics_shrink_as_t_grows(d in points_matrix(), t in 1usize..5) {
        let t = t.min(d.n() - 2);
        let opts = GraphOptions::default();
        if let (Ok(small), Ok(large)) = (geodesic_matrix(&d, t, &opts), geodesic_matrix(&d, t + 1, &opts)) {
            for (a, b) in small.values().iter().zip(large.values()) {
                prop_assert!(*b <= a + 1e-9);
            }
        }
    }

    #[test]
    fn kmedoids_result_is_consistent(d in points_matrix(), k in 1usize..4, seed in 0u64..1000) {
        let k = k.min(d.n());
        let r = kmedoids(&d, k, seed).unwrap();
        let mut sorted = r.medoids.clone();
        sorted.sort_unstable();
        sorted.dedup();
        prop_assert_eq!(sorted.len(), k);
        for (j, &m) in r.medoids.iter().enumerate() {
            prop_assert_eq!(r.assignments[m], j);
        }
        prop_assert_eq!(&assign(&d, &r.medoids).unwrap(), &r.assignments);
        prop_assert_eq!(objective(&d, &r.medoids, &r.assignments), r.objective);
        prop_assert!(!r.hit_iteration_cap);
    }

    #[test]
    fn metrics_stay_in_range((a, truth) in labelings()) {
        if let Ok(r) = evaluate(&a, &truth) {
            for v in [r.r_e, r.r_t, r.r_f] {
                prop_assert!((0.0..=100.0).contains(&v));
            }
            prop_assert_eq!(r.n, a.len());
        }
    }

    #[test]
    fn relabeling_clusters_leaves_metrics_unchanged((a, truth) in labelings(), shift in 1usize..50) {
        let renamed: Vec<usize> = a.iter().map(|&c| 5 * c + shift).collect();
        let scores = |labels: &[usize]| evaluate(labels, &truth).ok().map(|r| (r.r_e, r.r_t, r.r_f));
        prop_assert_eq!(scores(&a), scores(&renamed));
    }

    #[test]
    fn matrix_files_round_trip(d in points_matrix()) {
        prop_assert_eq!(&decode_gdm1(&encode_gdm1(&d)).unwrap(), &d);
        prop_assert_eq!(&matrix_from_text(&matrix_to_text(&d), DistanceKind::L2).unwrap(), &d);
    }

    #[test]
    fn heatmap_values_are_normalized(d in points_matrix(), scale in 0.1f64..100.0) {
        let h = heatmap(&d, scale).unwrap();
        prop_assert!(h.values().iter().all(|v| (0.0..=1.0).contains(v)));
        prop_assert!(h.values().contains(&1.0));
        prop_assert!((0..d.n()).all(|i| h.get(i, i) == 0.0));
    }
}
