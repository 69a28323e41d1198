use std::collections::BTreeMap;

use osyclass::degree1::{degree_one_homeomorphic, Deg1Options, PointSet};
use osyclass::metricgh::{
    dgh_structures, eps_of_bijection, ApproxIsometry, FiniteStructure, Relation,
};
use osyclass::unitary::{canonical_form, rigid_equivalent, CircleSet, RigidMotion};
use osyclass::C64;
use proptest::prelude::*;

fn angle_set() -> impl Strategy<Value = Vec<f64>> {
    // Sorted cumulative gaps keep points separated.
    prop::collection::vec(0.2f64..1.0, 3..8).prop_map(|gaps| {
        let total: f64 = gaps.iter().sum();
        let scale = 6.0 / total;
        let mut acc = 0.0;
        gaps.iter()
            .map(|g| {
                acc += g * scale;
                acc
            })
            .collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn canonical_form_ignores_rigid_motions(angles in angle_set(), rot in 0.0f64..6.3, reflect: bool) {
        let s = CircleSet::new(&angles, 1e-9).unwrap();
        let moved = s.apply(&RigidMotion::new(rot, reflect));
        prop_assert!(canonical_form(&s).matches(&canonical_form(&moved), 1e-9));
        let g = rigid_equivalent(&s, &moved, 1e-8).unwrap();
        let back = moved.apply(&g);
        prop_assert!(osyclass::unitary::hausdorff(back.angles(), s.angles()) < 1e-8);
    }

    #[test]
    fn eps_of_bijection_bounded_by_any_entry_per_row(t in prop::collection::vec(prop::collection::vec(0.0f64..3.0, 3), 2..5)) {
        let psi = ApproxIsometry::new(t.clone()).unwrap();
        let eps = eps_of_bijection(&psi);
        for row in &t {
            prop_assert!(row.iter().any(|&v| v <= eps));
        }
        for j in 0..3 {
            prop_assert!(t.iter().any(|r| r[j] <= eps));
        }
    }

    #[test]
    fn dgh_symmetric_and_zero_on_relabeling(
        xs in prop::collection::vec(0.0f64..5.0, 2..5),
        values in prop::collection::vec(-1.0f64..1.0, 5),
        shift in 0usize..5,
    ) {
        let m = xs.len();
        let mut pts = xs.clone();
        pts.sort_by(f64::total_cmp);
        for i in 1..m {
            if pts[i] - pts[i - 1] < 0.1 {
                pts[i] = pts[i - 1] + 0.1;
            }
        }
        let metric: Vec<Vec<f64>> = pts.iter().map(|a| pts.iter().map(|b| (a - b).abs()).collect()).collect();
        let mut rels = BTreeMap::new();
        rels.insert("P".to_string(), Relation { arity: 1, bound: None, values: values[..m].to_vec() });
        let a = FiniteStructure::new(metric, rels, Vec::new(), None).unwrap();
        let perm: Vec<usize> = (0..m).map(|i| (i + shift) % m).collect();
        let b = a.relabeled(&perm).unwrap();
        prop_assert!(dgh_structures(&a, &b, 1, 6).unwrap().value <= 1e-12);
        let line = FiniteStructure::new(
            vec![vec![0.0, 1.0], vec![1.0, 0.0]],
            [("P".to_string(), Relation { arity: 1, bound: None, values: vec![0.0, 0.5] })].into(),
            Vec::new(),
            None,
        ).unwrap();
        let ab = dgh_structures(&a, &line, 1, 6).unwrap().value;
        let ba = dgh_structures(&line, &a, 1, 6).unwrap().value;
        prop_assert!((ab - ba).abs() <= 1e-12);
    }

    #[test]
    fn degree_one_verdict_is_symmetric(re in prop::collection::vec(-2.0f64..2.0, 4), im in prop::collection::vec(-2.0f64..2.0, 4),
                                      re2 in prop::collection::vec(-2.0f64..2.0, 4), im2 in prop::collection::vec(-2.0f64..2.0, 4)) {
        let d: Vec<C64> = re.iter().zip(&im).map(|(&a, &b)| C64::new(a, b)).collect();
        let e: Vec<C64> = re2.iter().zip(&im2).map(|(&a, &b)| C64::new(a, b)).collect();
        let (Ok(d), Ok(e)) = (PointSet::planar(&d, 1e-9), PointSet::planar(&e, 1e-9)) else {
            return Ok(());
        };
        let opts = Deg1Options::default();
        let de = degree_one_homeomorphic(&d, &e, opts).unwrap().homeomorphic;
        let ed = degree_one_homeomorphic(&e, &d, opts).unwrap().homeomorphic;
        prop_assert_eq!(de, ed);
    }
}
