//! Plain-text artifacts of a run: `fields.csv`, `trajectories.csv` and
//! `report.txt`.
//!
//! Numbers are written with Rust's shortest round-trip formatting, so
//! parsing them back yields the in-memory values bit for bit. Nothing
//! time-dependent goes into the files; identical configs give identical
//! bytes.

use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::analysis::{ScatteringReport, REFERENCE_SCATTERING_TIME};
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::simulation::{simulate, Simulation};

pub const FIELDS_FILE: &str = "fields.csv";
pub const TRAJECTORIES_FILE: &str = "trajectories.csv";
pub const REPORT_FILE: &str = "report.txt";
const LOCK_FILE: &str = ".lock";

pub const FIELDS_HEADER: &str = "t,q,re,im,R,S,Q,V";
pub const TRAJECTORIES_HEADER: &str = "traj_id,t,q,v,Q,FQ,FC,Feff";

/// Exclusive claim on an output directory, released on drop.
#[derive(Debug)]
pub struct DirLock {
    path: PathBuf,
}

impl DirLock {
    pub fn acquire(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir)?;
        let path = dir.join(LOCK_FILE);
        match OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(mut f) => {
                writeln!(f, "{}", std::process::id())?;
                Ok(Self { path })
            }
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => {
                Err(Error::Locked(dir.to_path_buf()))
            }
            Err(e) => Err(e.into()),
        }
    }
}

impl Drop for DirLock {
    fn drop(&mut self) {
        if let Err(e) = fs::remove_file(&self.path) {
            log::warn!("could not remove {}: {e}", self.path.display());
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub simulation: Simulation,
    /// Potential-free companion run, present for scattering scenarios.
    pub baseline: Option<Simulation>,
    pub report: ScatteringReport,
    pub output_dir: PathBuf,
}

/// Runs the configured scenario and writes its artifacts into
/// `config.output_dir`. With a barrier present the free baseline needed for
/// the onset time is propagated alongside on a second thread.
pub fn run(config: &RunConfig) -> Result<RunSummary> {
    let dir = config.output_dir.clone();
    let _lock = DirLock::acquire(&dir)?;
    let (simulation, baseline) = if config.potential.is_free() {
        (simulate(config)?, None)
    } else {
        let free = config.free_baseline();
        let (sim, base) = std::thread::scope(|s| {
            let handle = s.spawn(|| simulate(&free));
            let sim = simulate(config);
            (sim, handle.join().expect("baseline thread panicked"))
        });
        (sim?, Some(base?))
    };
    let report = simulation.report(baseline.as_ref())?;
    write_fields(&simulation, &dir.join(FIELDS_FILE))?;
    write_trajectories(&simulation, &dir.join(TRAJECTORIES_FILE))?;
    write_report(&simulation, &report, &dir.join(REPORT_FILE))?;
    log::info!("wrote results to {}", dir.display());
    Ok(RunSummary {
        simulation,
        baseline,
        report,
        output_dir: dir,
    })
}

fn opt(v: Option<f64>) -> f64 {
    v.unwrap_or(f64::NAN)
}

pub fn write_fields(sim: &Simulation, path: &Path) -> Result<()> {
    let grid = &sim.config.grid;
    let potential = sim.config.potential.sample(grid);
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "{FIELDS_HEADER}")?;
    for snap in &sim.snapshots.snapshots {
        let derived = sim.derived(snap);
        let t = snap.time();
        let (r, s) = (snap.polar.amplitude(), snap.polar.phase());
        for (i, z) in snap.field.values().iter().enumerate() {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{}",
                t,
                grid.position(i),
                z.re,
                z.im,
                r[i],
                s[i],
                opt(derived.quantum_potential[i]),
                potential[i]
            )?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_trajectories(sim: &Simulation, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "{TRAJECTORIES_HEADER}")?;
    for (id, traj) in sim.ensemble.trajectories().iter().enumerate() {
        for s in traj.samples() {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{}",
                id,
                s.time,
                s.position,
                s.velocity,
                s.quantum_potential,
                s.quantum_force,
                s.classical_force,
                s.effective_force
            )?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_report(sim: &Simulation, report: &ScatteringReport, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "scenario = {}", sim.config.scenario)?;
    writeln!(w, "transmission = {}", report.transmission)?;
    writeln!(w, "reflection = {}", report.reflection)?;
    writeln!(w, "split_position = {}", report.split_position)?;
    writeln!(w, "evaluation_time = {}", report.evaluation_time)?;
    writeln!(
        w,
        "ehrenfest_position_residual = {}",
        report.ehrenfest_residuals.0
    )?;
    writeln!(
        w,
        "ehrenfest_momentum_residual = {}",
        report.ehrenfest_residuals.1
    )?;
    match report.onset_time {
        Some(t) => writeln!(w, "onset_time = {t}")?,
        None => writeln!(w, "onset_time = none")?,
    }
    writeln!(w, "onset_threshold = {}", report.onset_threshold)?;
    writeln!(w, "reference_scattering_time = {REFERENCE_SCATTERING_TIME}")?;
    writeln!(
        w,
        "max_norm_deviation = {}",
        sim.snapshots.max_norm_deviation()
    )?;
    writeln!(w)?;
    writeln!(w, "# norm history")?;
    writeln!(w, "t,norm")?;
    for (t, n) in &sim.snapshots.norm_history {
        writeln!(w, "{t},{n}")?;
    }
    w.flush()?;
    Ok(())
}

/// Reads one of the CSV files written here: header columns and numeric rows.
pub fn read_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut lines = BufReader::new(File::open(path)?).lines();
    let header = match lines.next() {
        Some(line) => line?.split(',').map(str::to_string).collect(),
        None => return Ok((Vec::new(), Vec::new())),
    };
    let mut rows = Vec::new();
    for (n, line) in lines.enumerate() {
        let line = line?;
        let row = line
            .split(',')
            .map(|x| x.parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| {
                std::io::Error::new(
                    std::io::ErrorKind::InvalidData,
                    format!("{}:{}: {e}", path.display(), n + 2),
                )
            })?;
        rows.push(row);
    }
    Ok((header, rows))
}
