use tame_core::bench::{
    self, Format, Profile, RunConfig, Variant, VariantSelection, SCHEMA_VERSION,
};
use tame_core::eta::WindowKind;
use tame_core::stats::Verdict;

fn small() -> RunConfig {
    let mut cfg = RunConfig::profile(Profile::Desk);
    cfg.lattice.n_half = 12;
    cfg.omega0 = 0.03;
    cfg.eta_list = vec![0.0, 0.3];
    cfg.n_standard = 30;
    cfg.n_arbitrate = 30;
    cfg.seeds = vec![4, 5];
    cfg.arbitration.anneal_taus = vec![200.0];
    cfg
}

#[test]
fn rows_cover_every_combination_in_config_order() {
    let cfg = small();
    let report = bench::run(&cfg).unwrap();
    assert_eq!(report.rows.len(), 2 * 2 * 3 * 2);
    let first = &report.rows[0];
    assert_eq!(
        (first.seed, first.variant, first.window, first.eta),
        (4, Variant::I, WindowKind::Low, 0.0)
    );
    let last = report.rows.last().unwrap();
    assert_eq!(
        (last.seed, last.variant, last.window, last.eta),
        (5, Variant::II, WindowKind::High, 0.3)
    );
    for r in &report.rows {
        assert!(r.verdict.is_some() || r.error.is_some());
        if r.starved {
            assert_eq!(r.verdict, Some(Verdict::Negative));
            assert!(r.diagnostic.is_none());
        }
        assert_eq!(r.wall_seconds, 0.0);
    }
    assert_eq!(report.audits.len(), 2);
    assert!(report.audits.iter().all(|a| a.counts.backdoor_calls == 0));
}

#[test]
fn eta_zero_only_gives_one_row_per_variant_and_window() {
    let mut cfg = small();
    cfg.eta_list = vec![0.0];
    cfg.seeds = vec![1];
    cfg.windows = vec![WindowKind::Mid];
    cfg.variant = VariantSelection::One;
    let report = bench::run(&cfg).unwrap();
    assert_eq!(report.rows.len(), 1);
}

#[test]
fn emitted_files_have_the_documented_shape() {
    let cfg = small();
    let report = bench::run(&cfg).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let files = bench::emit(&report, dir.path(), &Format::ALL).unwrap();
    assert_eq!(files.len(), 2 + 2 * 2 * 3);

    let csv = std::fs::read_to_string(dir.path().join("report.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "seed,variant,window,eta,standard_mean,standard_ci_low,standard_ci_high,\
         diagnostic_mean,diagnostic_ci_low,diagnostic_ci_high,verdict,\
         n_accepted_standard,n_accepted_arbitrate,wall_seconds"
    );
    assert_eq!(lines.count(), report.rows.len());

    let back = bench::load_report(&dir.path().join("report.json")).unwrap();
    assert_eq!(back, report);
    assert_eq!(back.config.schema_version, SCHEMA_VERSION);

    let svg = std::fs::read_to_string(dir.path().join("seed4_v2_mid.svg")).unwrap();
    assert!(svg.starts_with("<svg"));
    assert!(svg.trim_end().ends_with("</svg>"));
    assert!(svg.contains("<polygon"));
}

#[test]
fn timings_are_recorded_only_on_request() {
    let mut cfg = small();
    cfg.eta_list = vec![0.0];
    cfg.seeds = vec![1];
    cfg.variant = VariantSelection::One;
    cfg.windows = vec![WindowKind::High];
    cfg.record_timings = true;
    let report = bench::run(&cfg).unwrap();
    assert!(report.rows[0].wall_seconds > 0.0);
}

#[test]
fn config_files_load_by_extension() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small();
    let toml_path = dir.path().join("run.toml");
    std::fs::write(&toml_path, cfg.to_toml()).unwrap();
    assert_eq!(RunConfig::load(&toml_path).unwrap(), cfg);
    let json_path = dir.path().join("run.json");
    std::fs::write(&json_path, cfg.to_json()).unwrap();
    assert_eq!(RunConfig::load(&json_path).unwrap(), cfg);
    let bare = dir.path().join("run");
    std::fs::write(&bare, cfg.to_toml()).unwrap();
    assert_eq!(RunConfig::load(&bare).unwrap(), cfg);

    let bad = dir.path().join("bad.toml");
    std::fs::write(
        &bad,
        cfg.to_toml()
            .replace("schema_version = 1", "schema_version = 9"),
    )
    .unwrap();
    assert!(matches!(
        RunConfig::load(&bad),
        Err(tame_core::Error::Config(_))
    ));
    assert!(RunConfig::load(&dir.path().join("missing.toml")).is_err());
}

#[test]
fn seeds_are_independent_of_each_other() {
    let mut a = small();
    a.seeds = vec![4];
    let mut b = small();
    b.seeds = vec![5, 4];
    let ra = bench::run(&a).unwrap();
    let rb = bench::run(&b).unwrap();
    for r in &ra.rows {
        let other = rb.row(4, r.variant, r.window, r.eta).unwrap();
        assert_eq!(r, other);
    }
}
