use std::path::{Path, PathBuf};
use std::time::Instant;

use aiqt::circuit::parse_qasm;
use aiqt::data::{Resize, Split, SyntheticKind};
use aiqt::encoding::SelectionRule;
use aiqt::harness::*;
use aiqt::transform::{Checkpoint, CheckpointMetadata, ParameterSet, TransformModel};
use aiqt::Error;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn synthetic(n: usize, count: usize, ks: Vec<usize>) -> ExperimentConfig {
    let mut c = ExperimentConfig::new(DatasetSpec::Synthetic { kind: SyntheticKind::Piecewise, n, count, seed: 1 }, ks);
    c.optimizer.epochs = 5;
    c.optimizer.lr_max = 0.05;
    c.seed = 2;
    c
}

fn digits() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/mnist/digits-10k-images-idx3-ubyte.gz")
}

fn save(model: &TransformModel<f64>, path: &Path) {
    Checkpoint::from_model(model, CheckpointMetadata::default()).save(path).unwrap();
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines.map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    (header, rows)
}

#[test]
fn small_training_run_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = synthetic(6, 300, vec![8]);
    cfg.checkpoint_every = Some(2);
    let t = Instant::now();
    let art = run_train(&cfg, dir.path()).unwrap();
    assert!(t.elapsed().as_secs() < 60);
    assert!(art.checkpoint.exists() && art.history.exists());
    assert!(dir.path().join("checkpoint-epoch-0002.json").exists());
    assert!(dir.path().join("checkpoint-epoch-0004.json").exists());
    assert!(!dir.path().join("checkpoint-epoch-0005.json").exists());
    let ck = Checkpoint::load(&art.checkpoint).unwrap();
    assert_eq!(ck.metadata.epoch, 5);
    assert_eq!(ck.metadata.seed, 2);
    assert_eq!(art.rows.len(), 6);
}

#[test]
fn rerun_gives_identical_checkpoint_bytes() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let mut cfg = synthetic(5, 200, vec![6]);
    cfg.depth = 2;
    run_train(&cfg, a.path()).unwrap();
    run_train(&cfg, b.path()).unwrap();
    let read = |d: &Path| std::fs::read(d.join(CHECKPOINT_FILE)).unwrap();
    assert_eq!(read(a.path()), read(b.path()));
    cfg.seed = 3;
    run_train(&cfg, b.path()).unwrap();
    assert_ne!(read(a.path()), read(b.path()));
}

#[test]
fn invalid_budget_fails_before_writing() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("never");
    let cfg = synthetic(5, 200, vec![33]);
    assert!(matches!(run_train(&cfg, &out), Err(Error::InvalidArgument(_))));
    assert!(!out.exists());
}

#[test]
fn fsl_eval_full_budget_and_layout() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = synthetic(6, 100, vec![62]);
    let rows = run_eval(&cfg, &[Method::Fsl], None, dir.path()).unwrap();
    assert_eq!(rows.len(), 1, "FSL reports the validation split only");
    let r = &rows[0].report;
    assert_eq!(r.split, "validation");
    assert_eq!(r.kept, 64);
    assert!(r.mean_crmse < 1e-10);
    assert!(r.mean_fidelity > 1.0 - 1e-10);
    assert_eq!(read_eval_rows(&dir.path().join(EVAL_JSON_FILE)).unwrap(), rows);
    let text = std::fs::read_to_string(dir.path().join(EVAL_TEXT_FILE)).unwrap();
    assert!(text.starts_with("method"));

    let mut all = cfg.clone();
    all.fsl_validation_only = false;
    assert_eq!(run_eval(&all, &[Method::Fsl], None, dir.path()).unwrap().len(), 2);
}

#[test]
fn eval_needs_matching_checkpoint() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = synthetic(6, 100, vec![8]);
    assert!(run_eval(&cfg, &[Method::Aiqt], None, dir.path()).is_err());
    let ck = dir.path().join("n5.json");
    save(&TransformModel::fourier(5).unwrap(), &ck);
    let err = run_eval(&cfg, &[Method::Aiqt], Some(&ck), dir.path()).unwrap_err();
    assert!(err.to_string().contains("N = 32"), "{err}");
}

#[test]
fn trained_model_beats_fourier_at_matched_budget() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = synthetic(6, 400, vec![16]);
    cfg.optimizer.epochs = 20;
    cfg.optimizer.batch_size = 32;
    cfg.rules.fsl = SelectionRule::PlainTopk;
    let art = run_train(&cfg, dir.path()).unwrap();
    let rows = run_eval(&cfg, &[Method::Aiqt, Method::Fsl], Some(&art.checkpoint), dir.path()).unwrap();
    let val = |m: Method| rows.iter().find(|r| r.method == m && r.report.split == "validation").unwrap().report.mean_crmse;
    assert!(val(Method::Aiqt) < val(Method::Fsl), "{} vs {}", val(Method::Aiqt), val(Method::Fsl));

    let sel = SampleSelector { split: Split::Validation, index: 0 };
    let s = run_reconstruct(&cfg, &[Method::Fsl, Method::Aiqt], Some(&art.checkpoint), sel, 16, dir.path()).unwrap();
    assert_eq!(s.results.len(), 2);
}

#[test]
fn powerlaw_from_eval_rows() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = synthetic(7, 200, vec![8, 16, 32, 64]);
    let rows = run_eval(&cfg, &[Method::Fsl], None, dir.path()).unwrap();
    let fits = run_powerlaw(&rows, "validation", dir.path()).unwrap();
    assert_eq!(fits.len(), 1);
    let f = &fits[0];
    assert_eq!(f.k, [8, 16, 32, 64]);
    assert_eq!(f.kept, [10, 18, 34, 66]);
    assert!(f.fit.b < 0.0 && f.fit.a > 0.0);
    assert!((0.0..=1.0).contains(&f.fit.r2));
    let (header, pts) = read_csv(&dir.path().join("powerlaw-fsl.csv"));
    assert_eq!(header, ["k", "crmse", "fit"]);
    assert_eq!(pts.len(), 4);
    assert!(matches!(run_powerlaw(&rows[..2], "validation", dir.path()), Err(Error::FitRefused(_))));
    assert!(matches!(fit_methods(&rows, "train"), Err(Error::FitRefused(_))));
}

#[test]
fn exported_circuits_verify() {
    let dir = tempfile::tempdir().unwrap();
    let ck = dir.path().join("f3.json");
    save(&TransformModel::fourier(3).unwrap(), &ck);
    let out = dir.path().join("sub/f3.qasm");
    let e = export_qasm(&ck, &out).unwrap();
    assert_eq!((e.counts.single_qubit, e.counts.controlled_phase, e.counts.swap), (3, 3, 1));
    assert!(e.max_error < QASM_TOLERANCE);
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("OPENQASM 2.0;"));
    assert_eq!(parse_qasm(&text).unwrap().gates().len(), 7);

    let id = dir.path().join("id.json");
    save(&TransformModel::single(ParameterSet::identity(4).unwrap()), &id);
    assert!(export_qasm(&id, &dir.path().join("id.qasm")).unwrap().max_error < 1e-12);

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let random = TransformModel::new(vec![ParameterSet::random(4, &mut rng).unwrap(); 2]).unwrap();
    let rp = dir.path().join("r.json");
    save(&random, &rp);
    assert!(export_qasm(&rp, &dir.path().join("r.qasm")).unwrap().max_error < QASM_TOLERANCE);
}

#[test]
fn reconstruct_full_budget_and_realness() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = synthetic(5, 50, vec![32]);
    cfg.rules.fsl = SelectionRule::PlainTopk;
    let ck = dir.path().join("ck.json");
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    save(&TransformModel::single(ParameterSet::random(5, &mut rng).unwrap()), &ck);
    let sel = SampleSelector { split: Split::Validation, index: 2 };
    let s = run_reconstruct(&cfg, &[Method::Aiqt], Some(&ck), sel, 32, dir.path()).unwrap();
    let (header, rows) = read_csv(&s.files[0]);
    assert_eq!(header, ["index", "original", "aiqt_re", "aiqt_im"]);
    for r in &rows {
        assert!((r[1] - r[2]).abs() < 1e-10 && r[3].abs() < 1e-10);
    }

    cfg.rules.fsl = SelectionRule::ConjugateSymmetric;
    cfg.k = KSpec::One(8);
    let s = run_reconstruct(&cfg, &[Method::Fsl], None, sel, 8, dir.path()).unwrap();
    let (_, rows) = read_csv(&s.files[0]);
    assert!(rows.iter().all(|r| r[3].abs() < 1e-12));
    assert!(dir.path().join("reconstruct-validation-2-k8.json").exists());

    let far = SampleSelector { split: Split::Validation, index: 10 };
    let err = run_reconstruct(&cfg, &[Method::Fsl], None, far, 8, dir.path()).unwrap_err();
    assert!(err.to_string().contains("out of range"), "{err}");
}

#[test]
fn image_reconstruction_writes_pgm() {
    let dir = tempfile::tempdir().unwrap();
    let spec = DatasetSpec::Mnist { path: digits(), resize: Resize::ZeroPad, split_seed: 0, limit: Some(50) };
    let cfg = ExperimentConfig::new(spec, vec![52]);
    let sel = SampleSelector { split: Split::Validation, index: 0 };
    let s = run_reconstruct(&cfg, &[Method::Fsl], None, sel, 1022, dir.path()).unwrap();
    let names: Vec<String> = s.files.iter().map(|p| p.file_name().unwrap().to_string_lossy().into_owned()).collect();
    assert!(names.contains(&"reconstruct-validation-0-k1022-original.pgm".to_string()));
    assert!(names.contains(&"reconstruct-validation-0-k1022-fsl.pgm".to_string()));
    let a = std::fs::read(dir.path().join("reconstruct-validation-0-k1022-original.pgm")).unwrap();
    let b = std::fs::read(dir.path().join("reconstruct-validation-0-k1022-fsl.pgm")).unwrap();
    assert_eq!(a, b, "full budget reproduces the pixels");
}

#[test]
fn color_reconstruction_writes_ppm() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("batch.bin");
    let mut bytes = Vec::new();
    for rec in 0..10u8 {
        bytes.push(rec);
        for c in 0..3usize {
            bytes.extend((0..1024).map(|p| ((p * (c + 1) + rec as usize) % 256) as u8));
        }
    }
    std::fs::write(&path, bytes).unwrap();
    let spec = DatasetSpec::Cifar { path, mode: aiqt::data::CifarMode::Rgb, split_seed: 0, limit: None };
    let cfg = ExperimentConfig::new(spec, vec![100]);
    let sel = SampleSelector { split: Split::Validation, index: 1 };
    let s = run_reconstruct(&cfg, &[Method::Fsl], None, sel, 100, dir.path()).unwrap();
    let ppm: Vec<&PathBuf> = s.files.iter().filter(|p| p.extension().is_some_and(|e| e == "ppm")).collect();
    assert_eq!(ppm.len(), 2);
    assert_eq!(std::fs::read(ppm[0]).unwrap().len(), b"P6\n32 32\n255\n".len() + 3 * 1024);
}

#[test]
fn rank_profiles_per_method() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = synthetic(5, 60, vec![4]);
    let ck = dir.path().join("ck.json");
    save(&TransformModel::deep_init(5, 2, 1).unwrap(), &ck);
    let files = run_rank_profile(&cfg, &[Method::Fsl, Method::Aiqt], Some(&ck), Split::Train, dir.path()).unwrap();
    assert_eq!(files.len(), 2);
    let (header, rows) = read_csv(&files[0]);
    assert_eq!(header, ["rank", "mean_m", "std_m"]);
    assert_eq!(rows.len(), 32);
    // a near-identity deep start has the Fourier profile
    let (_, other) = read_csv(&files[1]);
    for (a, b) in rows.iter().zip(&other) {
        assert!((a[1] - b[1]).abs() < 1e-12 && (a[2] - b[2]).abs() < 1e-12);
    }
}

#[test]
fn config_file_paths_resolve_relative_to_file() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::create_dir(dir.path().join("d")).unwrap();
    std::fs::copy(digits(), dir.path().join("d/img.gz")).unwrap();
    let cfg_path = dir.path().join("exp.json");
    std::fs::write(&cfg_path, r#"{"dataset": {"source": "mnist", "path": "d/img.gz", "limit": 10}, "k": 52}"#).unwrap();
    let cfg = ExperimentConfig::load(&cfg_path).unwrap();
    assert_eq!(cfg.validate().unwrap(), 10);
    assert_eq!(cfg.load_dataset().unwrap().len(), 10);
}
