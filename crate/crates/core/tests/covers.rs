use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ramlab_core::covers::{
    closed_lift_count, closed_lift_count_by_fixed_points, sample_cover, sample_matching_model, sample_perm_plus_matching,
    sample_permutation_model, seeded_rng, trial_seed, BasePath, BaseGraph, CoverGraph, MultiGraph,
};
use ramlab_core::growth::closed_paths;
use ramlab_core::{Guards, Permutation};

#[test]
fn permutation_model_is_regular() {
    let mut rng = seeded_rng(1);
    let one = sample_permutation_model(1, 4, &mut rng).unwrap().multigraph();
    assert_eq!((one.num_vertices(), one.num_loops(), one.regular_degree()), (1, 2, Some(4)));
    let big = sample_permutation_model(1000, 4, &mut rng).unwrap();
    assert_eq!(big.multigraph().regular_degree(), Some(4));
    assert!(big.projects_onto_base());
    assert!(sample_permutation_model(10, 3, &mut rng).unwrap_err().to_string().contains("matching"));
}

#[test]
fn identity_covers_are_disjoint_copies() {
    let base = BaseGraph::bouquet(2);
    let ident = CoverGraph::new(base.clone(), vec![Permutation::identity(5); 2]).unwrap();
    let g = ident.multigraph();
    assert_eq!(g.num_loops(), 10);
    assert!(!g.is_connected());
    let theta = BaseGraph::new(2, vec![(0, 1), (0, 1), (0, 1)]).unwrap();
    let copies = CoverGraph::trivial(theta.clone(), 3).multigraph();
    for i in 0..3 {
        assert_eq!(copies.adjacency(i, 3 + i), 3);
    }
    let n1 = sample_cover(&theta, 1, &mut seeded_rng(3)).unwrap().multigraph();
    assert_eq!(n1, theta.multigraph());
}

#[test]
fn dipole_covers_are_bipartite_regular() {
    let mut rng = seeded_rng(4);
    let c = sample_cover(&BaseGraph::dipole(4), 50, &mut rng).unwrap();
    let g = c.multigraph();
    assert_eq!(g.regular_degree(), Some(4));
    for (u, v) in g.edges() {
        assert_ne!(u / 50, v / 50);
    }
}

#[test]
fn matching_models() {
    let mut rng = seeded_rng(5);
    let one = sample_matching_model(2, 1, &mut rng).unwrap();
    assert_eq!(one.edges(), vec![(0, 1)]);
    assert_eq!(sample_matching_model(100, 3, &mut rng).unwrap().regular_degree(), Some(3));
    assert!(sample_matching_model(3, 1, &mut rng).is_err());
    let pm = sample_perm_plus_matching(4, 3, &mut rng).unwrap();
    assert_eq!(pm.regular_degree(), Some(3));
    assert_eq!(sample_perm_plus_matching(2, 1, &mut rng).unwrap().edges(), vec![(0, 1)]);
    assert!(sample_perm_plus_matching(5, 3, &mut rng).is_err());
    for _ in 0..50 {
        let m = sample_perm_plus_matching(10, 1, &mut rng).unwrap();
        assert_eq!(m.num_loops(), 0);
        assert_eq!(m.regular_degree(), Some(1));
    }
}

#[test]
fn matching_loop_mean_matches_enumeration() {
    // all matchings of 4 points, points 0,1 on vertex 0 and 2,3 on vertex 1
    let matchings = [[(0, 1), (2, 3)], [(0, 2), (1, 3)], [(0, 3), (1, 2)]];
    let loops: usize = matchings
        .iter()
        .map(|m| m.iter().filter(|&&(a, b)| a / 2 == b / 2).count())
        .sum();
    let exact = loops as f64 / matchings.len() as f64;
    let mut rng = seeded_rng(6);
    let trials = 30_000;
    let total: usize = (0..trials).map(|_| sample_matching_model(2, 2, &mut rng).unwrap().num_loops()).sum();
    let mean = total as f64 / trials as f64;
    // loops per sample are 0 or 2, so the standard error is below 0.006
    assert!((mean - exact).abs() < 0.03, "{mean} vs {exact}");
}

#[test]
fn lifts_equal_fixed_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let bases = [
        BaseGraph::bouquet(2),
        BaseGraph::dipole(3),
        BaseGraph::new(3, vec![(0, 1), (1, 2), (2, 0), (0, 0)]).unwrap(),
    ];
    let g = Guards::default();
    for base in &bases {
        let paths = closed_paths(base, 4, &g).unwrap();
        for _ in 0..334 {
            let n = rng.gen_range(1..12);
            let cover = sample_cover(base, n, &mut rng).unwrap();
            let (start, letters) = paths[rng.gen_range(0..paths.len())].clone();
            let path = BasePath { start, letters };
            assert_eq!(
                closed_lift_count(&path, &cover).unwrap(),
                closed_lift_count_by_fixed_points(&path, &cover).unwrap()
            );
            let ident = CoverGraph::trivial(base.clone(), n);
            assert_eq!(closed_lift_count(&path, &ident).unwrap(), n);
        }
    }
}

#[test]
fn open_paths_are_rejected() {
    let base = BaseGraph::new(2, vec![(0, 1)]).unwrap();
    let cover = CoverGraph::trivial(base, 2);
    let path = BasePath {
        start: 0,
        letters: vec![ramlab_core::Letter::pos(1)],
    };
    assert!(closed_lift_count(&path, &cover).is_err());
}

#[test]
fn sampling_is_deterministic() {
    let a = sample_permutation_model(50, 4, &mut seeded_rng(trial_seed(9, 3))).unwrap();
    let b = sample_permutation_model(50, 4, &mut seeded_rng(trial_seed(9, 3))).unwrap();
    assert_eq!(a.sigma(), b.sigma());
    assert_ne!(trial_seed(9, 3), trial_seed(9, 4));
}

#[test]
fn json_round_trips() {
    let base = BaseGraph::from_json(r#"{"vertices":["x","y"],"edges":[["x","y"],["y","y"]]}"#).unwrap();
    assert_eq!(base.num_vertices(), 2);
    assert_eq!(base.degree(1), 3);
    let again = BaseGraph::from_json(&base.to_json().to_string()).unwrap();
    assert_eq!(again.edges(), base.edges());
    assert!(BaseGraph::new(3, vec![(0, 1)]).is_err());
    let g = MultiGraph::from_edges(3, &[(0, 1), (1, 1), (1, 2)]).unwrap();
    assert_eq!(g.to_csv(), "u,v\n0,1\n1,1\n1,2\n");
}
