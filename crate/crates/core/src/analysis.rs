//! Scenario-level observables computed from stored fields and trajectories.

use num_complex::Complex64;

use crate::bohmian::{velocity_field, TrajectoryEnsemble};
use crate::error::{Error, Result};
use crate::field::ComplexField;
use crate::grid::Grid;
use crate::potential::PotentialSpec;
use crate::propagator::Snapshot;
use crate::stencil::{first_derivative_at, DerivativeOrder};

/// Time at which the trajectories of the reference Eckart experiment are
/// described as starting to scatter.
pub const REFERENCE_SCATTERING_TIME: f64 = 0.15;

pub const DEFAULT_ONSET_THRESHOLD: f64 = 0.05;

/// Stencil for the momentum functional, matching the compact propagator.
const MOMENTUM_ORDER: DerivativeOrder = DerivativeOrder::Fourth;

/// Stencil for the direct probability current `Im(psi* dpsi/dq)`.
const CURRENT_ORDER: DerivativeOrder = DerivativeOrder::Eighth;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub mean_position: f64,
    pub mean_momentum: f64,
    /// `sqrt(<q^2> - <q>^2)`.
    pub width: f64,
}

/// `<q>`, `<p>` and the position spread, normalised by the discrete norm.
/// `<p> = sum Im(psi* dpsi/dq) dq` with a fourth-order central derivative.
pub fn expectation_values(field: &ComplexField, grid: &Grid) -> Moments {
    let psi = field.values();
    let dq = grid.dq();
    let (mut n, mut q1, mut q2, mut p) = (0.0, 0.0, 0.0, 0.0);
    for (i, z) in psi.iter().enumerate() {
        let rho = z.norm_sqr();
        let q = grid.position(i);
        n += rho;
        q1 += q * rho;
        q2 += q * q * rho;
        if let Some(d) = first_derivative_at(psi, i, dq, MOMENTUM_ORDER) {
            p += (z.conj() * d).im;
        }
    }
    let mean_position = q1 / n;
    Moments {
        mean_position,
        mean_momentum: p / n,
        width: (q2 / n - mean_position * mean_position).max(0.0).sqrt(),
    }
}

/// `<F_C> = sum F_C(q_i) |psi_i|^2 / sum |psi_i|^2`.
pub fn mean_classical_force(field: &ComplexField, grid: &Grid, potential: &PotentialSpec) -> f64 {
    if potential.is_free() {
        return 0.0;
    }
    let (mut n, mut f) = (0.0, 0.0);
    for (i, z) in field.values().iter().enumerate() {
        let rho = z.norm_sqr();
        n += rho;
        f += potential.force(grid.position(i)) * rho;
    }
    f / n
}

/// Probability fractions to the right (transmitted) and left (reflected) of
/// `split`.
pub fn transmission_reflection(
    field: &ComplexField,
    grid: &Grid,
    split: f64,
) -> Result<(f64, f64)> {
    if !(split > grid.q_min() && split < grid.q_max()) {
        return Err(Error::invalid(
            "split",
            format!("{split} is not inside ({}, {})", grid.q_min(), grid.q_max()),
        ));
    }
    let (mut total, mut right) = (0.0, 0.0);
    for (i, z) in field.values().iter().enumerate() {
        let rho = z.norm_sqr();
        total += rho;
        if grid.position(i) > split {
            right += rho;
        }
    }
    if total <= 0.0 {
        return Err(Error::invalid("field", "zero norm"));
    }
    let t = right / total;
    Ok((t, 1.0 - t))
}

/// Observables recorded along a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Diagnostics {
    pub time: f64,
    pub norm: f64,
    pub moments: Moments,
    pub mean_force: f64,
    pub transmission: f64,
}

impl Diagnostics {
    pub fn measure(
        field: &ComplexField,
        grid: &Grid,
        potential: &PotentialSpec,
        split: f64,
    ) -> Result<Self> {
        Ok(Self {
            time: field.time(),
            norm: field.norm(grid),
            moments: expectation_values(field, grid),
            mean_force: mean_classical_force(field, grid, potential),
            transmission: transmission_reflection(field, grid, split)?.0,
        })
    }
}

/// Largest `|d<q>/dt - <p>|` and `|d<p>/dt - <F_C>|` over the interior of
/// the series, with time derivatives taken by centred differences.
pub fn ehrenfest_residuals(series: &[Diagnostics]) -> (f64, f64) {
    let mut position: f64 = 0.0;
    let mut momentum: f64 = 0.0;
    for w in series.windows(3) {
        let dt = w[2].time - w[0].time;
        let dq = (w[2].moments.mean_position - w[0].moments.mean_position) / dt;
        let dp = (w[2].moments.mean_momentum - w[0].moments.mean_momentum) / dt;
        position = position.max((dq - w[1].moments.mean_momentum).abs());
        momentum = momentum.max((dp - w[1].mean_force).abs());
    }
    (position, momentum)
}

/// `J = Im(psi* dpsi/dq)` straight from the complex field (eighth-order
/// derivative); `None` within reach of the ends.
pub fn probability_current(field: &ComplexField, grid: &Grid) -> Vec<Option<f64>> {
    let psi = field.values();
    (0..psi.len())
        .map(|i| {
            first_derivative_at::<Complex64>(psi, i, grid.dq(), CURRENT_ORDER)
                .map(|d| (psi[i].conj() * d).im)
        })
        .collect()
}

/// Largest `|R^2 v - J|` over non-starved interior nodes, relative to the
/// peak `|J|` of the snapshot. `v` comes from the unwrapped phase, `J`
/// directly from `psi`, so a phase-unwrapping slip shows up here.
pub fn continuity_discrepancy(snapshot: &Snapshot, grid: &Grid) -> f64 {
    let polar = &snapshot.polar;
    let v = velocity_field(polar, grid);
    let j = probability_current(&snapshot.field, grid);
    let r = polar.amplitude();
    let mut worst: f64 = 0.0;
    let mut peak: f64 = 0.0;
    for i in 1..r.len() - 1 {
        let Some(ji) = j[i] else { continue };
        if !(polar.is_reliable(i - 1) && polar.is_reliable(i) && polar.is_reliable(i + 1)) {
            continue;
        }
        peak = peak.max(ji.abs());
        worst = worst.max((r[i] * r[i] * v[i] - ji).abs());
    }
    if peak == 0.0 {
        0.0
    } else {
        worst / peak
    }
}

/// First sample time at which the left-edge trajectory's `Q` in `scattered`
/// departs from the same trajectory's `Q` in `reference` by more than
/// `threshold` (relative to the reference value). Both ensembles must start
/// from the same positions and be sampled at the same times.
pub fn onset_time(
    scattered: &TrajectoryEnsemble,
    reference: &TrajectoryEnsemble,
    threshold: f64,
) -> Result<Option<f64>> {
    if scattered.initial_positions() != reference.initial_positions() {
        return Err(Error::MismatchedRuns(
            "ensembles start from different positions".into(),
        ));
    }
    let (a, b) = (scattered.first().samples(), reference.first().samples());
    if a.len() != b.len() || a.iter().zip(b).any(|(x, y)| x.time != y.time) {
        return Err(Error::MismatchedRuns(
            "trajectories are sampled at different times".into(),
        ));
    }
    for (x, y) in a.iter().zip(b) {
        let diff = (x.quantum_potential - y.quantum_potential).abs();
        if diff == 0.0 {
            continue;
        }
        if diff / y.quantum_potential.abs() > threshold {
            return Ok(Some(x.time));
        }
    }
    Ok(None)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScatteringReport {
    pub transmission: f64,
    pub reflection: f64,
    pub split_position: f64,
    pub evaluation_time: f64,
    /// `(position, momentum)` residuals from [`ehrenfest_residuals`].
    pub ehrenfest_residuals: (f64, f64),
    pub onset_time: Option<f64>,
    pub onset_threshold: f64,
}
