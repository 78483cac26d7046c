//! One full scenario run: field propagation, diagnostics and trajectories.

use crate::analysis::{ehrenfest_residuals, onset_time, Diagnostics, ScatteringReport};
use crate::bohmian::{advance_trajectories, make_ensemble, FieldDerived, TrajectoryEnsemble};
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::field::{gaussian_packet, polar_decompose, ComplexField};
use crate::propagator::{propagate_observed, Snapshot, SnapshotSet};

#[derive(Debug, Clone)]
pub struct Simulation {
    pub config: RunConfig,
    pub snapshots: SnapshotSet,
    pub ensemble: TrajectoryEnsemble,
    /// Recorded at t = 0, every `norm_check_stride` steps and at the end.
    pub diagnostics: Vec<Diagnostics>,
}

/// Propagates the configured packet and moves the trajectory ensemble
/// along with it.
///
/// Trajectories are sampled every `trajectory_stride` steps (and at the
/// final step) and advanced by one Euler step spanning the interval to the
/// next sample.
pub fn simulate(config: &RunConfig) -> Result<Simulation> {
    let grid = &config.grid;
    let n_steps = grid.n_steps();
    let initial = gaussian_packet(grid, &config.packet)?;
    let mut ensemble = make_ensemble(&config.packet, config.n_traj, config.half_span)?;
    let mut diagnostics = Vec::new();
    let stride = config.trajectory_stride;
    let diag_stride = config.schedule.norm_check_stride;

    let observe = |step: usize, field: &ComplexField| -> Result<()> {
        if step % diag_stride == 0 || step == n_steps {
            diagnostics.push(Diagnostics::measure(
                field,
                grid,
                &config.potential,
                config.split,
            )?);
        }
        if step % stride == 0 || step == n_steps {
            let polar = polar_decompose(field, config.schedule.amplitude_floor);
            let derived = FieldDerived::compute(&polar, grid, config.quantum_potential_stencil);
            if step == n_steps {
                ensemble.record(&derived, &config.potential, grid)?;
            } else {
                let span = stride.min(n_steps - step) as f64 * grid.dt();
                advance_trajectories(&mut ensemble, &derived, &config.potential, grid, span)?;
            }
        }
        Ok(())
    };
    let snapshots = propagate_observed(
        &initial,
        &config.potential,
        grid,
        &config.schedule,
        n_steps,
        observe,
    )?;
    log::info!(
        "{} run finished: {} snapshots, max norm deviation {:e}",
        config.scenario,
        snapshots.snapshots.len(),
        snapshots.max_norm_deviation()
    );
    Ok(Simulation {
        config: config.clone(),
        snapshots,
        ensemble,
        diagnostics,
    })
}

impl Simulation {
    pub fn final_field(&self) -> &ComplexField {
        &self.last_snapshot().field
    }

    pub fn last_snapshot(&self) -> &Snapshot {
        self.snapshots
            .last()
            .expect("a run always stores its initial state")
    }

    pub fn derived(&self, snapshot: &Snapshot) -> FieldDerived {
        FieldDerived::compute(
            &snapshot.polar,
            &self.config.grid,
            self.config.quantum_potential_stencil,
        )
    }

    /// Final transmission plus Ehrenfest residuals; the onset time needs a
    /// `reference` run without the potential.
    pub fn report(&self, reference: Option<&Simulation>) -> Result<ScatteringReport> {
        let last = self
            .diagnostics
            .last()
            .ok_or_else(|| Error::invalid("diagnostics", "run recorded no diagnostics"))?;
        let onset = match reference {
            Some(r) => onset_time(&self.ensemble, &r.ensemble, self.config.onset_threshold)?,
            None => None,
        };
        Ok(ScatteringReport {
            transmission: last.transmission,
            reflection: 1.0 - last.transmission,
            split_position: self.config.split,
            evaluation_time: last.time,
            ehrenfest_residuals: ehrenfest_residuals(&self.diagnostics),
            onset_time: onset,
            onset_threshold: self.config.onset_threshold,
        })
    }
}
