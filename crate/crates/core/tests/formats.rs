//! Round trips for every file format the crate reads or writes.

use horolab::averages::AverageSeries;
use horolab::experiments::{Experiment, ExperimentConfig};
use horolab::group::FuchsianGroup;
use horolab::io::{
    atoms_csv, quadrature_csv, read_atoms_csv, read_quadrature_csv, read_series_csv, series_csv,
    write_atomic, Manifest,
};
use horolab::patterson::{build_patterson, PattersonConfig, QuadratureEstimate};

#[test]
fn series_csv_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let a = AverageSeries::new(vec![1.0, 2.5, 1e3], vec![0.1, -0.2, 1.0 / 3.0], 0.125, "equidist:psi0", Some(8)).unwrap();
    let b = AverageSeries::new(vec![0.0, 1.0], vec![f64::MIN_POSITIVE, 7.0], -2.0, "closure", None).unwrap();
    let path = dir.path().join("s.csv");
    write_atomic(&path, &series_csv(&[a.clone(), b.clone()]).unwrap()).unwrap();
    assert_eq!(read_series_csv(&path).unwrap(), vec![a, b]);
}

#[test]
fn atoms_csv_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let g = FuchsianGroup::default_cusped();
    let m = build_patterson(&g, &PattersonConfig::new(0.8, 6).unwrap()).unwrap();
    let path = dir.path().join("atoms.csv");
    write_atomic(&path, &atoms_csv(&m).unwrap()).unwrap();
    let back = read_atoms_csv(&path, 0.8).unwrap();
    assert_eq!(back.len(), m.len());
    for (x, y) in back.atoms().iter().zip(m.atoms()) {
        assert_eq!(x.point, y.point);
        assert!((x.log_weight - y.log_weight).abs() <= 1e-12);
    }
}

#[test]
fn quadrature_csv_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let rows = vec![
        ("psi0".to_string(), QuadratureEstimate { estimate: 0.143, n_cells: 1234, grid_h: 0.05 }),
        ("psi1".to_string(), QuadratureEstimate { estimate: -1e-17, n_cells: 0, grid_h: 0.1 }),
    ];
    let path = dir.path().join("q.csv");
    write_atomic(&path, &quadrature_csv(&rows).unwrap()).unwrap();
    assert_eq!(read_quadrature_csv(&path).unwrap(), rows);
}

#[test]
fn manifest_round_trip_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let mut m = Manifest::default();
    m.set("run", "experiment", "equidist");
    m.set("config", "equidist.bumps", "0 1 1.57 0.75 inf; 2 1.5 1.57 0.9 inf");
    m.set("results", "note", "contains # and = signs");
    let path = dir.path().join("manifest.txt");
    write_atomic(&path, m.render().as_bytes()).unwrap();
    assert_eq!(Manifest::read(&path).unwrap(), m);
}

#[test]
fn group_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    for g in [
        FuchsianGroup::default_schottky(),
        FuchsianGroup::default_cusped(),
        FuchsianGroup::default_parabolic(),
    ] {
        let path = dir.path().join(format!("{}.group", g.name()));
        write_atomic(&path, g.render().as_bytes()).unwrap();
        let back = FuchsianGroup::from_file(&path).unwrap();
        assert_eq!(back.name(), g.name());
        assert_eq!(back.kind(), g.kind());
        assert_eq!(back.cusp_points(), g.cusp_points());
        for (x, y) in back.generators().iter().zip(g.generators()) {
            assert_eq!((&x.label, x.kind, x.domain, x.inverse_domain), (&y.label, y.kind, y.domain, y.inverse_domain));
            assert!(x.matrix.frame_distance(&y.matrix) <= 1e-14);
        }
    }
}

#[test]
fn group_file_errors_point_at_lines() {
    let text = "[group]\nname = g\nkind = with_cusps\n\n[generator]\nlabel = p\nkind = parabolic\nmatrix = 1 4 0\n";
    let err = FuchsianGroup::parse(text, "g.group").unwrap_err().to_string();
    assert!(err.starts_with("g.group:8:"), "{err}");
}

#[test]
fn shipped_configs_load() {
    let root = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let cases = [
        ("schottky.conf", &[Experiment::GroupInfo, Experiment::Exponent, Experiment::Patterson, Experiment::Equidist, Experiment::Mixing][..]),
        ("cusped.conf", &[Experiment::GroupInfo, Experiment::Exponent, Experiment::Equidist, Experiment::Nondiv, Experiment::Closure][..]),
        ("parabolic.conf", &[Experiment::GroupInfo, Experiment::Exponent][..]),
        ("checks.conf", &[Experiment::Checks][..]),
    ];
    for (file, exps) in cases {
        for &e in exps {
            ExperimentConfig::load(&root.join(file), e, &[], None, None, true)
                .unwrap_or_else(|err| panic!("{file} {}: {err}", e.name()));
        }
    }
}

#[test]
fn config_echo_reloads_to_the_same_parameters() {
    let root = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let dir = tempfile::tempdir().unwrap();
    for (file, e) in [("cusped.conf", Experiment::Nondiv), ("schottky.conf", Experiment::Equidist)] {
        let cfg = ExperimentConfig::load(&root.join(file), e, &[], None, None, false).unwrap();
        // rebuild a config file from the echo and read it again
        let mut text = String::new();
        let mut current = String::new();
        for (k, v) in &cfg.echo {
            let (section, key) = k.split_once('.').unwrap();
            if section != current {
                text.push_str(&format!("[{section}]\n"));
                current = section.to_string();
            }
            text.push_str(&format!("{key} = {v}\n"));
        }
        let path = root.join(file).canonicalize().unwrap();
        let copy = dir.path().join(file);
        std::fs::write(&copy, text).unwrap();
        let again = ExperimentConfig::load(&copy, e, &[], None, None, false).unwrap();
        assert_eq!(again.params, cfg.params, "{}", path.display());
        assert_eq!(again.seed, cfg.seed);
        assert_eq!(again.group, cfg.group);
    }
}
