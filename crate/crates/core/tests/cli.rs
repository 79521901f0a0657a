use rlab::cli::{emit_plot_data, main_with_args, read_result, run_experiment, ExperimentSpec, Kind, PlotKind, Tier};
use rlab::error::Error;
use std::path::Path;

fn spec(dir: &Path, text: &str) -> ExperimentSpec {
    ExperimentSpec::parse(&format!("out = {:?}\n{text}", dir.display().to_string())).unwrap()
}

fn rlab(args: &[&str]) -> i32 {
    main_with_args(std::iter::once("rlab").chain(args.iter().copied()))
}

#[test]
fn equal_masses_are_non_resonant() {
    let dir = tempfile::tempdir().unwrap();
    let r = run_experiment(&spec(dir.path(), "kind = \"resonance_minimum\"\n[params]\nbig_m = 1.0\nm = 1.0\n")).unwrap();
    assert_eq!(r.labels.get("classification").map(String::as_str), Some("non_resonant"));
    assert!(r.verdict("classification_matches_masses").unwrap().pass);
    // The exact minimum over the default box sits below the 0.1 threshold.
    let min = r.metric("min_value").unwrap();
    assert!((min - (2.0 * 101f64.sqrt() - 401f64.sqrt())).abs() < 1e-9, "{min}");
    assert!(!r.passed);
}

#[test]
fn half_mass_has_antiparallel_zeros() {
    let dir = tempfile::tempdir().unwrap();
    let r = run_experiment(&spec(dir.path(), "kind = \"resonance_minimum\"\n[params]\nbig_m = 0.5\nm = 1.0\n")).unwrap();
    assert_eq!(r.labels.get("classification").map(String::as_str), Some("weakly_resonant"));
    assert!(r.metric("antiparallel_witness_max").unwrap() <= 1e-12);
    assert!(r.passed);
}

#[test]
fn smoke_sweep_writes_fitted_series_and_loglog_csv() {
    let dir = tempfile::tempdir().unwrap();
    let r = run_experiment(&spec(dir.path(), "kind = \"exponent_sweep\"\ntier = \"smoke\"\nseed = 3\n[params]\nlaw = \"radial\"\n")).unwrap();
    assert!(r.verdict("slope_alpha").unwrap().pass);
    assert!(r.verdict("slope_lambda").unwrap().pass);
    assert_eq!(r.params["points"].as_integer(), Some(64));
    assert!(!r.series.is_empty() && r.series.iter().all(|s| s.slope.is_some()));

    let json = dir.path().join("exponent_sweep_s3.json");
    assert!(r.artifacts.contains(&json));
    let back = read_result(&json).unwrap();
    assert_eq!(back.metrics, r.metrics);

    let path = emit_plot_data(&back, PlotKind::Loglog).unwrap();
    assert!(path.starts_with(dir.path()));
    let mut rd = csv::Reader::from_path(&path).unwrap();
    assert_eq!(rd.headers().unwrap(), vec!["series", "x", "y", "fit"]);
    let rows: Vec<csv::StringRecord> = rd.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), r.series.iter().map(|s| s.x.len()).sum::<usize>());
    for row in &rows {
        assert!(row[3].parse::<f64>().unwrap() > 0.0);
    }
    for a in &r.artifacts {
        assert!(a.starts_with(dir.path()) && a.exists(), "{}", a.display());
    }
}

#[test]
fn scalar_results_have_no_loglog_plot_but_a_table() {
    let dir = tempfile::tempdir().unwrap();
    let r = run_experiment(&spec(dir.path(), "kind = \"dirac_identities\"\n[params]\nmodulation_samples = 200\n")).unwrap();
    assert!(matches!(emit_plot_data(&r, PlotKind::Loglog), Err(Error::MissingSeries(_))));
    let path = emit_plot_data(&r, PlotKind::Table).unwrap();
    let mut rd = csv::Reader::from_path(&path).unwrap();
    assert_eq!(rd.headers().unwrap(), vec!["metric", "value"]);
    assert_eq!(rd.records().count(), r.metrics.len());
}

#[test]
fn validation_lists_every_problem() {
    let err = ExperimentSpec::parse("kind = \"resonance_minimum\"\n[params]\nbig_m = \"heavy\"\nbogus = 1\n")
        .and_then(|s| s.resolved_params())
        .unwrap_err();
    let Error::Validation(items) = err else { panic!("expected a validation error, got {err}") };
    assert!(items.iter().any(|i| i.contains("bogus")), "{items:?}");
    assert!(items.iter().any(|i| i.contains("big_m")), "{items:?}");

    assert!(ExperimentSpec::parse("kind = \"no_such_kind\"\n").is_err());
    assert!(ExperimentSpec::parse("kind = \"resonance_minimum\"\ntier = \"huge\"\n").is_err());
}

#[test]
fn integers_widen_to_floats() {
    let s = ExperimentSpec::parse("kind = \"resonance_minimum\"\n[params]\nr_max = 4\n").unwrap();
    assert_eq!(s.resolved_params().unwrap()["r_max"].as_float(), Some(4.0));
}

#[test]
fn tier_parsing_and_env_override() {
    assert_eq!("desk".parse::<Tier>().unwrap(), Tier::Desk);
    assert!("Desk".parse::<Tier>().is_err());
    let mut s = ExperimentSpec::new(Kind::L2Constant, 0, "unused", Tier::Smoke);
    assert_eq!(s.resolved_params().unwrap()["points"].as_integer(), Some(64));
    std::env::set_var("RLAB_TIER", "desk");
    let applied = s.apply_env_tier();
    std::env::remove_var("RLAB_TIER");
    applied.unwrap();
    assert_eq!(s.tier, Tier::Desk);
    assert_eq!(s.resolved_params().unwrap()["points"].as_integer(), Some(256));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let write = |name: &str, text: &str| {
        let p = dir.path().join(name);
        std::fs::write(&p, format!("out = {:?}\n{text}", dir.path().display().to_string())).unwrap();
        p.display().to_string()
    };
    let good = write("good.toml", "kind = \"resonance_minimum\"\n[params]\nbig_m = 0.5\n");
    let failing = write("fail.toml", "kind = \"resonance_minimum\"\n[params]\nbig_m = 1.0\n");
    let bad = write("bad.toml", "kind = \"resonance_minimum\"\n[params]\nbig_n = 1.0\n");

    assert_eq!(rlab(&["validate", &good]), 0);
    assert_eq!(rlab(&["validate", &bad]), 2);
    assert_eq!(rlab(&["run", &good, "--jobs", "1"]), 0);
    assert_eq!(rlab(&["run", &failing]), 1);
    assert_eq!(rlab(&["run", &bad]), 2);
    assert_eq!(rlab(&["frobnicate"]), 2);

    let result = dir.path().join("resonance_minimum_s0.json").display().to_string();
    assert_eq!(rlab(&["plot", &result, "--kind", "table"]), 0);
    assert_eq!(rlab(&["plot", &result]), 2);

    let other = dir.path().join("elsewhere");
    assert_eq!(rlab(&["run", &good, "--seed", "9", "--out", &other.display().to_string()]), 0);
    assert!(other.join("resonance_minimum_s9.json").exists());
}
