use std::fs;

use bohm_core::config::{load_config, parse_config, Scenario};
use bohm_core::output::{
    read_csv, FIELDS_FILE, FIELDS_HEADER, REPORT_FILE, TRAJECTORIES_FILE, TRAJECTORIES_HEADER,
};
use bohm_core::{run, Error, RunConfig};

fn short_free(dir: &std::path::Path) -> RunConfig {
    let text = format!(
        "scenario = free\nn_steps = 1000\nsnapshot_stride = 100\nnorm_check_stride = 100\ntrajectory_stride = 10\noutput_dir = {}\n",
        dir.display()
    );
    RunConfig::from_assignments(Scenario::Custom, parse_config(&text).unwrap()).unwrap()
}

#[test]
fn load_config_reports_offending_key() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.cfg");
    fs::write(
        &path,
        "# two nodes cannot hold a packet\nscenario = free\nn_points = 2\n",
    )
    .unwrap();
    match load_config(&path) {
        Err(Error::Invalid { name, .. }) => assert_eq!(name, "n_points"),
        other => panic!("{other:?}"),
    }
    fs::write(&path, "scenario = eckart\nV0 = 100\n").unwrap();
    match load_config(&path) {
        Err(e @ Error::UnknownKey { .. }) => assert!(e.to_string().contains("line 2")),
        other => panic!("{other:?}"),
    }
    fs::write(&path, "scenario = eckart\nv0 = 150\n").unwrap();
    let c = load_config(&path).unwrap();
    assert_eq!(
        c.potential,
        bohm_core::PotentialSpec::Eckart {
            v0: 150.0,
            beta: 20.0,
            qv: 0.0
        }
    );
    assert!(matches!(
        load_config(dir.path().join("missing.cfg")),
        Err(Error::Io(_))
    ));
}

#[test]
fn short_free_run_layout_and_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let summary = run(&short_free(dir.path())).unwrap();
    let sim = &summary.simulation;

    let (header, rows) = read_csv(&dir.path().join(FIELDS_FILE)).unwrap();
    assert_eq!(header.join(","), FIELDS_HEADER);
    assert_eq!(rows.len(), 11 * 2500);
    for (k, snap) in sim.snapshots.snapshots.iter().enumerate() {
        let derived = sim.derived(snap);
        for (i, z) in snap.field.values().iter().enumerate() {
            let row = &rows[k * 2500 + i];
            assert_eq!(row[0].to_bits(), snap.time().to_bits());
            assert_eq!(row[1].to_bits(), sim.config.grid.position(i).to_bits());
            assert_eq!(row[2].to_bits(), z.re.to_bits());
            assert_eq!(row[3].to_bits(), z.im.to_bits());
            assert_eq!(row[4].to_bits(), snap.polar.amplitude()[i].to_bits());
            assert_eq!(row[5].to_bits(), snap.polar.phase()[i].to_bits());
            match derived.quantum_potential[i] {
                Some(q) => assert_eq!(row[6].to_bits(), q.to_bits()),
                None => assert!(row[6].is_nan()),
            }
            assert_eq!(row[7], 0.0);
        }
    }

    let (header, rows) = read_csv(&dir.path().join(TRAJECTORIES_FILE)).unwrap();
    assert_eq!(header.join(","), TRAJECTORIES_HEADER);
    let per_traj = 1000 / 10 + 1;
    assert_eq!(rows.len(), 19 * per_traj);
    for (id, traj) in sim.ensemble.trajectories().iter().enumerate() {
        for (k, s) in traj.samples().iter().enumerate() {
            let row = &rows[id * per_traj + k];
            let expected = [
                id as f64,
                s.time,
                s.position,
                s.velocity,
                s.quantum_potential,
                s.quantum_force,
                s.classical_force,
                s.effective_force,
            ];
            for (a, b) in row.iter().zip(expected) {
                assert_eq!(a.to_bits(), b.to_bits());
            }
        }
    }

    let report = fs::read_to_string(dir.path().join(REPORT_FILE)).unwrap();
    assert!(report.contains("onset_time = none"));
    assert_eq!(
        report.lines().filter(|l| l.starts_with("0.")).count() + 1,
        sim.snapshots.norm_history.len()
    );
    assert!(!dir.path().join(".lock").exists());
}

#[test]
fn identical_runs_write_identical_bytes() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    run(&short_free(a.path())).unwrap();
    run(&short_free(b.path())).unwrap();
    for file in [FIELDS_FILE, TRAJECTORIES_FILE, REPORT_FILE] {
        assert_eq!(
            fs::read(a.path().join(file)).unwrap(),
            fs::read(b.path().join(file)).unwrap(),
            "{file}"
        );
    }
}

#[test]
fn locked_directory_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join(".lock"), "1\n").unwrap();
    assert!(matches!(
        run(&short_free(dir.path())),
        Err(Error::Locked(_))
    ));
}
