//! Quantum potential, quantum force, velocity field and trajectory ensembles.
//!
//! Nodes whose amplitude is below the polar floor are "starved": `Q` and
//! `F_Q` are `None` there rather than a number.

use crate::error::{Error, Result};
use crate::field::{GaussianParams, PolarField};
use crate::grid::{interpolate, Grid};
use crate::potential::PotentialSpec;
use crate::stencil::{second_derivative_3pt, second_derivative_5pt};

/// Stencil for `R''` in `Q = -R''/(2R)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum QuantumPotentialStencil {
    /// `(R[i+1] - 2R[i] + R[i-1]) / dq^2`.
    ThreePoint,
    /// Fourth-order five-point stencil.
    #[default]
    FivePoint,
}

/// `Q_i = -R''_i / (2 R_i)` (hbar = m = 1).
pub fn quantum_potential(
    polar: &PolarField,
    grid: &Grid,
    stencil: QuantumPotentialStencil,
) -> Vec<Option<f64>> {
    let r = polar.amplitude();
    (0..r.len())
        .map(|i| {
            if !polar.is_reliable(i) {
                return None;
            }
            let r2 = match stencil {
                QuantumPotentialStencil::ThreePoint => second_derivative_3pt(r, i, grid.dq()),
                QuantumPotentialStencil::FivePoint => second_derivative_5pt(r, i, grid.dq()),
            }?;
            Some(-0.5 * r2 / r[i])
        })
        .collect()
}

/// `F_Q = -dQ/dq` by central differences; `None` wherever a neighbour is.
pub fn quantum_force(quantum_potential: &[Option<f64>], grid: &Grid) -> Vec<Option<f64>> {
    let n = quantum_potential.len();
    (0..n)
        .map(|i| {
            if i == 0 || i + 1 == n {
                return None;
            }
            let (left, right) = (quantum_potential[i - 1]?, quantum_potential[i + 1]?);
            Some(-(right - left) / (2.0 * grid.dq()))
        })
        .collect()
}

/// Bohmian velocity `v = dS/dq` (m = 1): central differences inside,
/// one-sided at the two ends.
pub fn velocity_field(polar: &PolarField, grid: &Grid) -> Vec<f64> {
    let s = polar.phase();
    let n = s.len();
    let dq = grid.dq();
    let mut v = vec![0.0; n];
    for i in 1..n - 1 {
        v[i] = (s[i + 1] - s[i - 1]) / (2.0 * dq);
    }
    v[0] = (s[1] - s[0]) / dq;
    v[n - 1] = (s[n - 1] - s[n - 2]) / dq;
    v
}

pub fn effective_force(quantum: f64, classical: f64) -> f64 {
    classical + quantum
}

/// Per-node quantities derived from one polar snapshot.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldDerived {
    pub time: f64,
    pub quantum_potential: Vec<Option<f64>>,
    pub quantum_force: Vec<Option<f64>>,
    pub velocity: Vec<f64>,
}

impl FieldDerived {
    pub fn compute(polar: &PolarField, grid: &Grid, stencil: QuantumPotentialStencil) -> Self {
        let q = quantum_potential(polar, grid, stencil);
        let f = quantum_force(&q, grid);
        Self {
            time: polar.time(),
            quantum_force: f,
            quantum_potential: q,
            velocity: velocity_field(polar, grid),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectorySample {
    pub time: f64,
    pub position: f64,
    pub velocity: f64,
    pub quantum_potential: f64,
    pub quantum_force: f64,
    pub classical_force: f64,
    pub effective_force: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    position: f64,
    samples: Vec<TrajectorySample>,
}

impl Trajectory {
    pub fn position(&self) -> f64 {
        self.position
    }

    pub fn samples(&self) -> &[TrajectorySample] {
        &self.samples
    }
}

/// Ensemble of Bohmian trajectories, ordered by initial position.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryEnsemble {
    initial: Vec<f64>,
    trajectories: Vec<Trajectory>,
}

/// `n_traj` (odd) starting points spread evenly over
/// `[q0 - half_span, q0 + half_span]`; the middle one sits exactly on `q0`.
pub fn make_ensemble(
    params: &GaussianParams,
    n_traj: usize,
    half_span: f64,
) -> Result<TrajectoryEnsemble> {
    if n_traj == 0 || n_traj % 2 == 0 {
        return Err(Error::invalid(
            "n_traj",
            format!("must be odd, got {n_traj}"),
        ));
    }
    if !(half_span.is_finite() && half_span > 0.0) {
        return Err(Error::invalid(
            "half_span",
            format!("must be positive, got {half_span}"),
        ));
    }
    let positions = if n_traj == 1 {
        vec![params.q0]
    } else {
        (0..n_traj)
            .map(|j| params.q0 + half_span * (2.0 * j as f64 / (n_traj - 1) as f64 - 1.0))
            .collect()
    };
    TrajectoryEnsemble::from_positions(positions)
}

impl TrajectoryEnsemble {
    pub fn from_positions(initial: Vec<f64>) -> Result<Self> {
        if initial.is_empty() {
            return Err(Error::invalid("n_traj", "ensemble is empty"));
        }
        if initial.iter().any(|q| !q.is_finite()) || initial.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid(
                "ensemble",
                "initial positions must be finite and strictly increasing",
            ));
        }
        let trajectories = initial
            .iter()
            .map(|&q| Trajectory {
                position: q,
                samples: Vec::new(),
            })
            .collect();
        Ok(Self {
            initial,
            trajectories,
        })
    }

    pub fn len(&self) -> usize {
        self.trajectories.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trajectories.is_empty()
    }

    pub fn initial_positions(&self) -> &[f64] {
        &self.initial
    }

    pub fn trajectories(&self) -> &[Trajectory] {
        &self.trajectories
    }

    pub fn positions(&self) -> Vec<f64> {
        self.trajectories.iter().map(|t| t.position).collect()
    }

    pub fn first(&self) -> &Trajectory {
        &self.trajectories[0]
    }

    pub fn center(&self) -> &Trajectory {
        &self.trajectories[self.trajectories.len() / 2]
    }

    pub fn last(&self) -> &Trajectory {
        &self.trajectories[self.trajectories.len() - 1]
    }

    /// Appends a sample at every trajectory's current position, linearly
    /// interpolating the derived fields.
    pub fn record(
        &mut self,
        derived: &FieldDerived,
        potential: &PotentialSpec,
        grid: &Grid,
    ) -> Result<()> {
        let time = derived.time;
        for (index, traj) in self.trajectories.iter_mut().enumerate() {
            let q = traj.position;
            let (i, frac) = match grid.locate(q) {
                Some(cell) if grid.contains(q) => cell,
                _ => {
                    return Err(Error::TrajectoryEscaped {
                        index,
                        time,
                        position: q,
                    })
                }
            };
            let starved = || Error::TrajectoryStarved {
                index,
                time,
                position: q,
            };
            let lerp = |a: f64, b: f64| a + frac * (b - a);
            let qp = lerp(
                derived.quantum_potential[i].ok_or_else(starved)?,
                derived.quantum_potential[i + 1].ok_or_else(starved)?,
            );
            let fq = lerp(
                derived.quantum_force[i].ok_or_else(starved)?,
                derived.quantum_force[i + 1].ok_or_else(starved)?,
            );
            let fc = potential.force(q);
            traj.samples.push(TrajectorySample {
                time,
                position: q,
                velocity: lerp(derived.velocity[i], derived.velocity[i + 1]),
                quantum_potential: qp,
                quantum_force: fq,
                classical_force: fc,
                effective_force: effective_force(fq, fc),
            });
        }
        Ok(())
    }

    /// Euler update `q += v(q) dt` with `v` interpolated linearly; `time` is
    /// only used for error reporting.
    pub fn advance(&mut self, velocity: &[f64], grid: &Grid, dt: f64, time: f64) -> Result<()> {
        for (index, traj) in self.trajectories.iter_mut().enumerate() {
            let q = traj.position;
            let v = interpolate(grid, velocity, q)
                .filter(|_| grid.contains(q))
                .ok_or(Error::TrajectoryEscaped {
                    index,
                    time,
                    position: q,
                })?;
            let next = q + v * dt;
            if !grid.contains(next) {
                return Err(Error::TrajectoryEscaped {
                    index,
                    time: time + dt,
                    position: next,
                });
            }
            traj.position = next;
        }
        Ok(())
    }

    /// Index of the first recorded sample at which two neighbours are out of
    /// order, if any.
    pub fn first_crossing(&self) -> Option<(usize, usize)> {
        let n_samples = self
            .trajectories
            .iter()
            .map(|t| t.samples.len())
            .min()
            .unwrap_or(0);
        for k in 0..n_samples {
            for j in 0..self.trajectories.len().saturating_sub(1) {
                if self.trajectories[j].samples[k].position
                    >= self.trajectories[j + 1].samples[k].position
                {
                    return Some((j, k));
                }
            }
        }
        None
    }
}

/// Records the ensemble at `derived.time` and then moves it forward by `dt`.
pub fn advance_trajectories(
    ensemble: &mut TrajectoryEnsemble,
    derived: &FieldDerived,
    potential: &PotentialSpec,
    grid: &Grid,
    dt: f64,
) -> Result<()> {
    ensemble.record(derived, potential, grid)?;
    ensemble.advance(&derived.velocity, grid, dt, derived.time)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{gaussian_packet, polar_decompose, ComplexField, DEFAULT_AMPLITUDE_FLOOR};
    use num_complex::Complex64;

    fn full_grid() -> Grid {
        Grid::new(-10.0, 10.0, 2500, 4e-6, 100_000).unwrap()
    }

    fn packet() -> GaussianParams {
        GaussianParams::new(2.0, -2.0, 10.0).unwrap()
    }

    fn polar_from(grid: &Grid, amp: impl Fn(f64) -> f64, phase: impl Fn(f64) -> f64) -> PolarField {
        let values: Vec<Complex64> = grid
            .positions()
            .map(|q| Complex64::from_polar(amp(q), phase(q)))
            .collect();
        let mut f = ComplexField::new(grid, values.clone(), 0.0).unwrap();
        f.values_mut().copy_from_slice(&values);
        polar_decompose(&f, DEFAULT_AMPLITUDE_FLOOR)
    }

    #[test]
    fn gaussian_quantum_potential_at_centre_and_half_bohr() {
        let g = full_grid();
        let p = packet();
        let polar = polar_decompose(&gaussian_packet(&g, &p).unwrap(), DEFAULT_AMPLITUDE_FLOOR);
        let dq2 = g.dq() * g.dq();
        for stencil in [
            QuantumPotentialStencil::ThreePoint,
            QuantumPotentialStencil::FivePoint,
        ] {
            let q = quantum_potential(&polar, &g, stencil);
            // q0 = -2 and q0 + 0.5 are nodes up to rounding of the grid
            let i0 = ((p.q0 - g.q_min()) / g.dq()).round() as usize;
            let u0 = g.position(i0) - p.q0;
            let analytic = |u: f64| p.gamma - 2.0 * p.gamma * p.gamma * u * u;
            assert!(
                (q[i0].unwrap() - analytic(u0)).abs() < 10.0 * dq2 * p.gamma.powi(2),
                "{stencil:?}"
            );
            let ih = ((p.q0 + 0.5 - g.q_min()) / g.dq()).round() as usize;
            let uh = g.position(ih) - p.q0;
            assert!(
                (q[ih].unwrap() - analytic(uh)).abs() < 10.0 * dq2 * p.gamma.powi(2),
                "{stencil:?}"
            );
            assert!(analytic(0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn gaussian_quantum_force_is_odd_and_linear() {
        let g = full_grid();
        let p = packet();
        let polar = polar_decompose(&gaussian_packet(&g, &p).unwrap(), DEFAULT_AMPLITUDE_FLOOR);
        let fq = quantum_force(
            &quantum_potential(&polar, &g, QuantumPotentialStencil::FivePoint),
            &g,
        );
        let i0 = ((p.q0 - g.q_min()) / g.dq()).round() as usize;
        let u0 = g.position(i0) - p.q0;
        assert!((fq[i0].unwrap() - 16.0 * u0).abs() < 1e-6);
        for k in 1..100 {
            let (l, r) = (fq[i0 - k].unwrap(), fq[i0 + k].unwrap());
            let u = g.position(i0 + k) - p.q0;
            assert!(
                (r - 4.0 * p.gamma * p.gamma * u).abs() < 10.0 * g.dq().powi(2) * p.gamma.powi(2)
            );
            // antisymmetry about the node nearest q0, up to the offset of that node
            assert!((l + r - 2.0 * 16.0 * u0).abs() < 1e-6);
        }
    }

    #[test]
    fn constant_amplitude_and_phase() {
        let g = Grid::new(0.0, 1.0, 51, 0.1, 1).unwrap();
        let polar = polar_from(&g, |_| 0.7, |_| 1.2);
        for stencil in [
            QuantumPotentialStencil::ThreePoint,
            QuantumPotentialStencil::FivePoint,
        ] {
            let q = quantum_potential(&polar, &g, stencil);
            assert!(q.iter().flatten().all(|&x| x.abs() < 1e-9));
            assert!(quantum_force(&q, &g)
                .iter()
                .flatten()
                .all(|&x| x.abs() < 1e-6));
        }
        assert!(velocity_field(&polar, &g).iter().all(|&v| v.abs() < 1e-12));
    }

    #[test]
    fn constant_q_gives_zero_force() {
        let g = Grid::new(0.0, 1.0, 11, 0.1, 1).unwrap();
        let q = vec![Some(3.5); 11];
        let f = quantum_force(&q, &g);
        assert_eq!(f[0], None);
        assert!(f[1..10].iter().all(|x| *x == Some(0.0)));
    }

    #[test]
    fn starved_nodes_are_not_computed() {
        let g = Grid::new(0.0, 1.0, 11, 0.1, 1).unwrap();
        let polar = polar_from(
            &g,
            |q| if (q - 0.5).abs() < 0.01 { 0.0 } else { 1.0 },
            |_| 0.0,
        );
        let q = quantum_potential(&polar, &g, QuantumPotentialStencil::ThreePoint);
        assert_eq!(q[5], None);
        assert!(q[4].is_some());
        let f = quantum_force(&q, &g);
        assert_eq!(f[4], None);
        assert_eq!(f[6], None);
        assert!(f[3].is_some());
    }

    #[test]
    fn velocity_of_quadratic_phase() {
        let g = Grid::new(-1.0, 1.0, 101, 0.1, 1).unwrap();
        // keep the per-node phase jump below pi
        let polar = polar_from(&g, |_| 1.0, |q| q * q);
        let v = velocity_field(&polar, &g);
        for i in 1..100 {
            assert!((v[i] - 2.0 * g.position(i)).abs() < 1e-12, "{i}");
        }
    }

    #[test]
    fn gaussian_velocity_is_p0() {
        let g = full_grid();
        let polar = polar_decompose(
            &gaussian_packet(&g, &packet()).unwrap(),
            DEFAULT_AMPLITUDE_FLOOR,
        );
        let v = velocity_field(&polar, &g);
        for i in 1..g.n_points() - 1 {
            if polar.is_reliable(i - 1) && polar.is_reliable(i + 1) {
                assert!((v[i] - 10.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn ensemble_layout() {
        let p = packet();
        let e = make_ensemble(&p, 19, 1.0).unwrap();
        let q = e.initial_positions();
        assert_eq!(q.len(), 19);
        assert_eq!(q[9], -2.0);
        assert!((q[0] + 3.0).abs() < 1e-15 && (q[18] + 1.0).abs() < 1e-15);
        for w in q.windows(2) {
            assert!((w[1] - w[0] - 1.0 / 9.0).abs() < 1e-14);
        }
        assert_eq!(
            make_ensemble(&p, 1, 1.0).unwrap().initial_positions(),
            &[-2.0]
        );
        let d = p.delta();
        assert_eq!(
            make_ensemble(&p, 3, d).unwrap().initial_positions(),
            &[-2.0 - d, -2.0, -2.0 + d]
        );
        assert!(matches!(
            make_ensemble(&p, 4, 1.0),
            Err(Error::Invalid { name: "n_traj", .. })
        ));
        assert!(make_ensemble(&p, 3, 0.0).is_err());
    }

    #[test]
    fn uniform_velocity_translates_exactly() {
        let g = Grid::new(-10.0, 10.0, 201, 0.01, 1).unwrap();
        let mut e = make_ensemble(&packet(), 5, 1.0).unwrap();
        let start = e.positions();
        let v = vec![10.0; 201];
        for _ in 0..20 {
            e.advance(&v, &g, 0.01, 0.0).unwrap();
        }
        for (q, q0) in e.positions().iter().zip(start) {
            assert!((q - (q0 + 2.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn escaping_trajectory_reports_index() {
        let g = Grid::new(-3.0, 3.0, 61, 0.01, 1).unwrap();
        let mut e = TrajectoryEnsemble::from_positions(vec![-1.0, 2.95]).unwrap();
        let v = vec![10.0; 61];
        match e.advance(&v, &g, 0.01, 0.5) {
            Err(Error::TrajectoryEscaped { index, time, .. }) => {
                assert_eq!(index, 1);
                assert!((time - 0.51).abs() < 1e-12);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn record_samples_forces() {
        let g = full_grid();
        let p = packet();
        let polar = polar_decompose(&gaussian_packet(&g, &p).unwrap(), DEFAULT_AMPLITUDE_FLOOR);
        let derived = FieldDerived::compute(&polar, &g, QuantumPotentialStencil::FivePoint);
        let mut e = make_ensemble(&p, 3, 0.5).unwrap();
        let eck = PotentialSpec::eckart(200.0, 20.0, 0.0).unwrap();
        e.record(&derived, &eck, &g).unwrap();
        for t in e.trajectories() {
            let s = t.samples()[0];
            assert_eq!(s.effective_force, s.classical_force + s.quantum_force);
            assert_eq!(s.classical_force, eck.force(s.position));
            assert!((s.velocity - 10.0).abs() < 1e-9);
        }
        let c = e.center().samples()[0];
        assert!(c.quantum_force.abs() < 1e-2);
        assert!((c.quantum_potential - 2.0).abs() < 1e-3);
    }

    #[test]
    fn effective_force_sums() {
        assert_eq!(effective_force(1.5, 0.0), 1.5);
        assert_eq!(effective_force(-2.25, 2.25), 0.0);
    }
}
