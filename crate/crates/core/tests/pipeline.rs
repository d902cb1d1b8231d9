use sharpsep::expcli::{derive_seed, execute, read_csv, summary_path, Experiment, ExperimentConfig};
use sharpsep::measure::{
    make_device, parse_operator_file, sharpness, Access, Backend, KindSpec, OperatorFile, Povm,
};
use sharpsep::protocols::{collision_test_counted, measure_twice};
use sharpsep::qcore::{sample_haar_unitary, RngStream};
use sharpsep::Real;
use rand::RngCore;

#[test]
fn csv_files_are_reproducible_and_append_safe() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, parallel: bool| {
        let out = dir.path().join(name);
        let mut cfg = ExperimentConfig::new(Experiment::Collision, vec![256]);
        cfg.n_queries = Some(320);
        cfg.trials = 400;
        cfg.seed = 7;
        cfg.parallel = parallel;
        cfg.out = Some(out.clone());
        execute(&cfg).unwrap();
        std::fs::read(out).unwrap()
    };
    let a = run("a.csv", true);
    let b = run("b.csv", true);
    let c = run("c.csv", false);
    assert_eq!(a, b);
    assert_eq!(a, c);

    let out = dir.path().join("a.csv");
    let first = read_csv(&out).unwrap();
    run("a.csv", true);
    let twice = read_csv(&out).unwrap();
    assert_eq!(twice.len(), 2 * first.len());
    assert_eq!(&twice[..first.len()], &first[..]);

    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(summary_path(&out)).unwrap()).unwrap();
    assert_eq!(summary["config"]["seed"], 7);
    assert_eq!(summary["violations"], 0);
}

#[test]
fn sweep_summary_records_exponents() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep.csv");
    let mut cfg = ExperimentConfig::new(Experiment::Sweep, vec![16, 64, 256]);
    cfg.trials = 300;
    cfg.out = Some(out.clone());
    let report = execute(&cfg).unwrap();
    let fits = report.summary.fits.as_ref().unwrap();
    assert!(fits.collision.unwrap().slope > 0.2);
    assert!(fits.measure_twice.unwrap().slope.abs() < 0.2);
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(summary_path(&out)).unwrap()).unwrap();
    assert!(summary["fits"]["collision"]["slope"].is_number());
}

#[test]
fn dense_and_fast_backends_agree_in_law() {
    // same injected unitary: identical outcome tables on |0⟩
    let mut rng = RngStream::new(5, 0);
    let u = sample_haar_unitary::<f64, _>(8, &mut rng).unwrap();
    let dense = make_device(KindSpec::Projective(u.clone()), Access::ClassicalOnly, Backend::Dense, &mut rng).unwrap();
    let fast = make_device(KindSpec::Projective(u), Access::ClassicalOnly, Backend::Fast, &mut rng).unwrap();
    let n = 40;
    let runs = 4000;
    let mean = |dev: &sharpsep::Device, rng: &mut RngStream| {
        (0..runs)
            .map(|_| collision_test_counted(dev, n, rng).unwrap().collisions as f64)
            .sum::<f64>()
            / runs as f64
    };
    let a = mean(&dense, &mut RngStream::new(6, 0));
    let b = mean(&fast, &mut RngStream::new(6, 1));
    // both estimate C(40,2)·Σp² for the same p
    assert!((a - b).abs() / a < 0.05, "{a} vs {b}");
}

#[test]
fn operator_file_round_trip_gives_sharpness() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("povm.json");
    let povm = Povm::<f64>::uniform(4).unwrap();
    std::fs::write(&path, serde_json::to_string(&OperatorFile::from_povm(&povm)).unwrap()).unwrap();
    let parsed = parse_operator_file(&path).unwrap();
    assert!((sharpness(&parsed.povm()) - 0.25).abs() < 1e-12);
}

#[test]
fn single_precision_pipeline() {
    let mut rng = RngStream::new(8, 0);
    let dev = make_device::<f32, _>(KindSpec::ProjectiveHaar { dim: 4 }, Access::WithPostState, Backend::Dense, &mut rng)
        .unwrap();
    assert!((dev.true_sharpness().as_f64() - 1.0).abs() < 1e-5);
    let est = measure_twice(&dev, 200, &mut rng).unwrap();
    assert!(est.mean > 0.99);
}

#[test]
fn derived_streams_do_not_collide() {
    let mut seen = std::collections::HashSet::new();
    for t in 0..10_000 {
        assert!(seen.insert(derive_seed(1, "grid", t).next_u64()));
    }
    let a = derive_seed(1, "collision", 3).next_u64();
    let b = derive_seed(1, "measure-twice", 3).next_u64();
    assert_ne!(a, b);
    assert_eq!(derive_seed(1, "collision", 3).next_u64(), a);
}
