use std::path::Path;
use std::process::Command;

use ctrlnet::dynamics::Activation;
use ctrlnet::experiments::{
    compute_consistency, compute_hum, compute_mf_descent, compute_micro_descent,
    compute_micro_surface, run_decay, run_micro_surface, Experiment, ExperimentConfig, Manifest,
};
use ctrlnet::meanfield::{wasserstein1_cdf, Density1D, SampleSet, Sampler};
use ctrlnet::surrogate::{surrogate_eval, ParamPoint};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

fn config_in(dir: &Path) -> ExperimentConfig {
    ExperimentConfig {
        output_dir: dir.to_path_buf(),
        ..ExperimentConfig::default()
    }
}

fn data_rows(path: &Path) -> usize {
    std::fs::read_to_string(path).unwrap().lines().count() - 1
}

fn assert_manifest_matches_disk(dir: &Path, manifest: &Manifest) {
    assert!(!manifest.files.is_empty());
    let mut on_disk: Vec<String> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n != "manifest.json")
        .collect();
    on_disk.sort();
    let mut listed: Vec<String> = manifest.files.iter().map(|f| f.name.clone()).collect();
    listed.sort();
    assert_eq!(listed, on_disk);
    for f in &manifest.files {
        let bytes = std::fs::read(dir.join(&f.name)).unwrap();
        assert_eq!(bytes.len(), f.bytes);
        assert_eq!(hex::encode(Sha256::digest(&bytes)), f.sha256, "{}", f.name);
    }
    let text = std::fs::read_to_string(dir.join("manifest.json")).unwrap();
    let json: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(json["experiment"], manifest.experiment.as_str());
    assert!(json["library_version"].is_string());
}

#[test]
fn decay_run_writes_listed_files() {
    let tmp = tempfile::tempdir().unwrap();
    let (outcome, manifest) = run_decay(&config_in(tmp.path())).unwrap();
    let dir = tmp.path().join("decay");
    assert_manifest_matches_disk(&dir, &manifest);
    let csv = std::fs::read_to_string(dir.join("decay.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "t,phi_a,phi_b,phi_c");
    assert_eq!(data_rows(&dir.join("decay.csv")), outcome.times.len());
    assert!(outcome.curves.iter().all(|c| c.terminal_error <= 1e-2));
    assert!(manifest.assumptions.keys().any(|k| k.contains("omega")));
}

#[test]
fn micro_surface_files_have_reference_sizes() {
    let tmp = tempfile::tempdir().unwrap();
    let (outcome, manifest) = run_micro_surface(&config_in(tmp.path())).unwrap();
    let dir = tmp.path().join("micro_surface");
    assert_manifest_matches_disk(&dir, &manifest);
    assert_eq!(data_rows(&dir.join("loss_true.csv")), 676);
    assert_eq!(data_rows(&dir.join("loss_surrogate.csv")), 676);
    assert_eq!(data_rows(&dir.join("relerr.csv")), 676);
    assert_eq!(data_rows(&dir.join("nodes.csv")), 20);
    for (k, z) in outcome.node_indices.iter().zip(&outcome.node_values) {
        assert!((outcome.approx[*k] - z).abs() <= 1e-8 * z.abs());
    }
    assert!(outcome.errors.max <= 1e-1);
    assert!(manifest.assumptions.contains_key("node_placement"));
}

#[test]
fn mean_field_descent_lands_near_target_density() {
    let cfg = ExperimentConfig::default();
    let out = compute_mf_descent(&cfg.meanfield, cfg.seed).unwrap();
    assert!(cfg
        .meanfield
        .domain
        .domain()
        .unwrap()
        .contains(out.descent.final_point()));
    assert!(
        out.w1_to_target <= out.w1_bound,
        "{} > {}",
        out.w1_to_target,
        out.w1_bound
    );
    assert!((out.w1_bound - (2.0 * 0.1 + 3.0 * out.loss_stderr)).abs() < 1e-12);
    assert!(out.descent.non_increasing_after(10));
}

#[test]
fn zero_field_consistency_is_pure_sampling_error() {
    let cfg = ExperimentConfig::default();
    let out = compute_consistency(&cfg.meanfield, &cfg.consistency, cfg.seed).unwrap();
    let mf = &cfg.meanfield;
    let cells = Density1D::cell_count(mf.xmin, mf.xmax, mf.dx).unwrap();
    let rho0 = Density1D::gaussian(mf.xmin, mf.xmax, cells, mf.initial_mean, mf.spread()).unwrap();
    let n = *cfg.consistency.sample_sizes.iter().max().unwrap();
    let resampled: Vec<f64> = (0..20)
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(900 + r);
            let s = SampleSet::new(rho0.sample(n, &mut rng).unwrap()).unwrap();
            wasserstein1_cdf(&s, &rho0)
        })
        .collect();
    let mean = resampled.iter().sum::<f64>() / resampled.len() as f64;
    let stderr = (resampled.iter().map(|v| (v - mean).powi(2)).sum::<f64>()
        / (resampled.len() - 1) as f64)
        .sqrt()
        / (resampled.len() as f64).sqrt();
    let spread = stderr.hypot(out.zero_field.stderr);
    assert!(
        (out.zero_field.mean - mean).abs() <= 3.0 * spread,
        "{} vs {mean} ± {spread}",
        out.zero_field.mean
    );
    assert!(out.rows.last().unwrap().w1.mean <= 2.0 * out.dx);
}

#[test]
fn hum_defaults_are_exact_for_unit_gramian() {
    let out = compute_hum(&ExperimentConfig::default().hum).unwrap();
    assert!((out.gramian_condition - 1.0).abs() < 1e-12);
    assert!(out.terminal_error <= 1e-3);
}

#[test]
fn manifests_echo_seed_and_config() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = config_in(tmp.path());
    cfg.seed = 99;
    cfg.static_control.particles = 3;
    let m = Experiment::StaticControl.run(&cfg).unwrap();
    assert_eq!(m.seed, 99);
    assert_eq!(m.config["particles"], 3);
    assert_eq!(
        data_rows(&tmp.path().join("static_control/particles.csv")),
        3
    );
}

#[test]
fn seeds_change_random_experiments_only() {
    let tmp = tempfile::tempdir().unwrap();
    let read = |seed: u64, e: Experiment, file: &str| {
        let mut cfg = config_in(&tmp.path().join(seed.to_string()));
        cfg.seed = seed;
        e.run(&cfg).unwrap();
        std::fs::read(cfg.output_dir.join(e.name().replace('-', "_")).join(file)).unwrap()
    };
    assert_eq!(
        read(1, Experiment::Decay, "decay.csv"),
        read(2, Experiment::Decay, "decay.csv")
    );
    assert_ne!(
        read(1, Experiment::StaticControl, "particles.csv"),
        read(2, Experiment::StaticControl, "particles.csv")
    );
}

#[test]
fn activation_names_parse_from_config() {
    let cfg = ExperimentConfig::load(None, &["meanfield.activation=\"tanh\"".into()]).unwrap();
    assert_eq!(cfg.meanfield.activation, Activation::Tanh);
    assert!(ExperimentConfig::load(None, &["meanfield.activation=\"softsign\"".into()]).is_err());
}

fn cli() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ctrlnet"))
}

#[test]
fn cli_runs_with_flags_and_overrides() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let status = cli()
        .args([
            "--out",
            out.to_str().unwrap(),
            "--seed",
            "5",
            "--threads",
            "2",
        ])
        .args(["--set", "decay.dt=0.005", "decay"])
        .output()
        .unwrap();
    assert!(
        status.status.success(),
        "{}",
        String::from_utf8_lossy(&status.stderr)
    );
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("decay/manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["seed"], 5);
    assert_eq!(manifest["config"]["dt"], 0.005);
    assert_eq!(data_rows(&out.join("decay/decay.csv")), 201);
}

#[test]
fn cli_reads_config_files_and_reports_errors() {
    let tmp = tempfile::tempdir().unwrap();
    let shown = cli().arg("show-config").output().unwrap();
    assert!(shown.status.success());
    let text = String::from_utf8(shown.stdout).unwrap();
    assert_eq!(
        ExperimentConfig::from_toml(&text).unwrap(),
        ExperimentConfig::default()
    );

    let path = tmp.path().join("c.toml");
    std::fs::write(&path, "seed = 3\n[hum]\nweight = [[0.5]]\ny = [2.0]\n").unwrap();
    let run = cli()
        .args([
            "--config",
            path.to_str().unwrap(),
            "--out",
            tmp.path().to_str().unwrap(),
            "hum",
        ])
        .output()
        .unwrap();
    assert!(
        run.status.success(),
        "{}",
        String::from_utf8_lossy(&run.stderr)
    );
    assert!(tmp.path().join("hum/hum.csv").exists());

    let bad = cli()
        .args(["--set", "micro.nodes=oops", "decay"])
        .output()
        .unwrap();
    assert!(!bad.status.success());
    assert!(String::from_utf8_lossy(&bad.stderr).contains("error"));

    let unknown = cli().arg("train").output().unwrap();
    assert!(!unknown.status.success());
}

#[test]
fn cli_reruns_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out = tmp.path().join(name);
        let ok = cli()
            .args([
                "--out",
                out.to_str().unwrap(),
                "--threads",
                if name == "a" { "1" } else { "4" },
                "mf-surface",
            ])
            .output()
            .unwrap();
        assert!(ok.status.success());
        std::fs::read(out.join("mf_surface/loss_true.csv")).unwrap()
    };
    assert_eq!(run("a"), run("b"));
}

#[test]
fn reference_config_file_matches_defaults() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/reference.toml");
    assert_eq!(
        ExperimentConfig::load(Some(&path), &[]).unwrap(),
        ExperimentConfig::default()
    );
}

#[test]
fn particle_descent_ends_near_the_grid_minimum() {
    let cfg = ExperimentConfig::default();
    let surface = compute_micro_surface(&cfg.micro, cfg.seed).unwrap();
    let descent = compute_micro_descent(&cfg.micro, cfg.seed).unwrap().descent;
    let grid = &surface.grid;
    let (best, best_value) = descent.grid_minimum;
    let iw = grid.w.iter().position(|w| *w == best.w).unwrap();
    let ib = grid.b.iter().position(|b| *b == best.b).unwrap();
    let near: Vec<f64> = (iw.saturating_sub(2)..=(iw + 2).min(grid.w.len() - 1))
        .flat_map(|i| (ib.saturating_sub(2)..=(ib + 2).min(grid.b.len() - 1)).map(move |j| (i, j)))
        .map(|(i, j)| surrogate_eval(&surface.surrogate, ParamPoint::new(grid.w[i], grid.b[j])))
        .collect();
    let range = near.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - near.iter().cloned().fold(f64::INFINITY, f64::min);
    let (_, final_value) = descent.trace.last();
    assert!(
        (final_value - best_value).abs() <= range,
        "{final_value} vs {best_value}, range {range}"
    );
}
