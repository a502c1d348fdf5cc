mod common;

use fairvax::exact_solver::{brute_force_oracle, solve_exact, SolveConfig};
use fairvax::formulation::{check_feasibility, evaluate, SolutionFile};
use fairvax::harness::{compare, CompareConfig};
use fairvax::instance::{self, compute_distances, generate_clustered, GeneratorConfig};
use fairvax::reduced_alloc::{heuristic_solve, HeuristicConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn instance_and_solution_survive_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = GeneratorConfig {
        seed: 12,
        num_clusters: 2,
        zones_per_cluster: vec![3],
        sites: 3,
        ..Default::default()
    };
    let inst = generate_clustered(&cfg).unwrap();
    let path = dir.path().join("inst.json");
    instance::save(&inst, &path).unwrap();
    let loaded = instance::load(&path).unwrap();
    assert_eq!(loaded, inst);

    let dm = compute_distances(&loaded);
    let best = solve_exact(&loaded, &dm, &SolveConfig::default())
        .unwrap()
        .best
        .unwrap();
    let text = serde_json::to_string(&best.to_file(&loaded)).unwrap();
    let back = SolutionFile::from_json_str(&text)
        .unwrap()
        .to_solution(&loaded)
        .unwrap();
    assert_eq!(back, best.solution);
    assert_eq!(evaluate(&loaded, &dm, &back).unwrap(), best);
}

#[test]
fn heuristic_is_deterministic_and_feasible() {
    let inst = generate_clustered(&GeneratorConfig {
        seed: 21,
        ..Default::default()
    })
    .unwrap();
    let cfg = HeuristicConfig {
        seed: 8,
        ..Default::default()
    };
    let a = heuristic_solve(&inst, &cfg).unwrap();
    let b = heuristic_solve(&inst, &cfg).unwrap();
    assert_eq!(a.evaluated, b.evaluated);
    assert_eq!(a.clustering, b.clustering);
    let report = check_feasibility(&inst, &compute_distances(&inst), &a.evaluated.solution).unwrap();
    assert!(report.is_feasible());
    assert!(report.doses_used <= inst.supply());
}

#[test]
fn compare_gap_is_never_negative() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let bounds = common::Bounds {
        max_sites: 3,
        max_zones: 5,
        max_demand: 6,
        max_supply: 25,
    };
    let cfg = CompareConfig {
        heuristic: HeuristicConfig {
            retry_smaller_k: true,
            ..Default::default()
        },
        ..Default::default()
    };
    let mut compared = 0;
    for _ in 0..40 {
        let inst = common::random_instance(&mut rng, &bounds);
        let Ok(report) = compare(&inst, &cfg) else { continue };
        compared += 1;
        assert!(report.gap_abs.unwrap() >= -1e-9);
        let j = report.jaccard.unwrap();
        assert!((0.0..=1.0).contains(&j));
        assert_eq!(report.sites_agree.unwrap(), j == 1.0);
    }
    assert!(compared >= 20, "{compared}");
}

#[test]
fn exact_agrees_with_oracle_on_generated_instances() {
    for seed in 0..6 {
        let cfg = GeneratorConfig {
            seed,
            num_clusters: 2,
            zones_per_cluster: vec![2, 1],
            sites: 2,
            demand: (1, 4),
            capacity: (3, 8),
            ..Default::default()
        };
        let inst = generate_clustered(&cfg).unwrap();
        let dm = compute_distances(&inst);
        let exact = solve_exact(&inst, &dm, &SolveConfig::default()).unwrap();
        let oracle = brute_force_oracle(&inst, &dm).unwrap();
        assert_eq!(
            exact.best.map(|b| b.solution),
            oracle.best.map(|b| b.solution),
            "seed {seed}"
        );
    }
}
