//! Time propagation of the wavefunction.
//!
//! Two schemes share one contract. [`Scheme::ExplicitFtcs`] is the
//! forward-Euler, centred-space update
//! `psi += dt * (i/2 * D2 psi - i V psi)` with the three-point `D2`. It is
//! only conditionally usable and slowly gains norm. [`Scheme::ImplicitCn`]
//! is Crank-Nicolson, `(1 + i dt/2 H) psi' = (1 - i dt/2 H) psi`, solved
//! with a prefactored tridiagonal (Thomas) sweep. With
//! [`Laplacian::Compact`] the kinetic operator is the Numerov form
//! `-1/2 M^-1 D2`, `M = (1, 10, 1)/12`; multiplying through by `M` keeps the
//! system tridiagonal, and since `M` and `D2` commute under Dirichlet
//! boundaries `H` stays symmetric, so the update is exactly unitary.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{polar_decompose, ComplexField, PolarField, DEFAULT_AMPLITUDE_FLOOR};
use crate::grid::Grid;
use crate::potential::PotentialSpec;

/// Growth factor of `max|psi|` over its initial value treated as blow-up.
pub const DIVERGENCE_FACTOR: f64 = 1e3;

/// Spatial discretisation of the kinetic term in the implicit scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Laplacian {
    /// Fourth-order compact (Numerov) operator.
    Compact,
    /// The same three-point operator the explicit scheme uses.
    ThreePoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    ExplicitFtcs,
    ImplicitCn(Laplacian),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagationSchedule {
    pub scheme: Scheme,
    /// Keep every k-th step as a snapshot.
    pub snapshot_stride: usize,
    /// Record the discrete norm every k-th step.
    pub norm_check_stride: usize,
    /// Relative amplitude floor for the polar decomposition of snapshots.
    pub amplitude_floor: f64,
}

impl PropagationSchedule {
    pub fn new(scheme: Scheme, snapshot_stride: usize, norm_check_stride: usize) -> Self {
        Self {
            scheme,
            snapshot_stride,
            norm_check_stride,
            amplitude_floor: DEFAULT_AMPLITUDE_FLOOR,
        }
    }

    pub fn validate(&self, n_steps: usize) -> Result<()> {
        for (name, stride) in [
            ("snapshot_stride", self.snapshot_stride),
            ("norm_check_stride", self.norm_check_stride),
        ] {
            if stride < 1 || stride > n_steps.max(1) {
                return Err(Error::invalid(
                    name,
                    format!("must be in 1..={n_steps}, got {stride}"),
                ));
            }
        }
        if !(self.amplitude_floor > 0.0 && self.amplitude_floor < 1.0) {
            return Err(Error::invalid("amplitude_floor", "must lie in (0, 1)"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub field: ComplexField,
    pub polar: PolarField,
}

impl Snapshot {
    pub fn time(&self) -> f64 {
        self.field.time()
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SnapshotSet {
    pub snapshots: Vec<Snapshot>,
    /// `(time, sum |psi|^2 dq)`.
    pub norm_history: Vec<(f64, f64)>,
}

impl SnapshotSet {
    pub fn last(&self) -> Option<&Snapshot> {
        self.snapshots.last()
    }

    pub fn max_norm_deviation(&self) -> f64 {
        self.norm_history
            .iter()
            .map(|&(_, n)| (n - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

/// Prefactored constant tridiagonal system `A x = B psi`, where `B` is the
/// element-wise conjugate of `A` (both built from real `M` and `K`).
#[derive(Debug, Clone)]
struct CrankNicolson {
    // A, rows over the interior nodes
    sub: Vec<Complex64>,
    diag: Vec<Complex64>,
    sup: Vec<Complex64>,
    // Thomas forward-sweep products
    sup_reduced: Vec<Complex64>,
    inv_pivot: Vec<Complex64>,
    rhs: Vec<Complex64>,
}

impl CrankNicolson {
    fn new(grid: &Grid, potential: &[f64], laplacian: Laplacian) -> Result<Self> {
        let n = grid.n_points() - 2;
        let (m0, m1) = match laplacian {
            Laplacian::Compact => (10.0 / 12.0, 1.0 / 12.0),
            Laplacian::ThreePoint => (1.0, 0.0),
        };
        let tau = 0.5 * grid.dt();
        let inv_dq2 = 1.0 / (grid.dq() * grid.dq());
        let v = &potential[1..grid.n_points() - 1];

        let entry = |m: f64, k: f64| Complex64::new(m, tau * k);
        let diag: Vec<Complex64> = v.iter().map(|&vi| entry(m0, inv_dq2 + m0 * vi)).collect();
        // A[i][i+1] picks up V at column i+1, A[i][i-1] at column i-1.
        let sup: Vec<Complex64> = (0..n)
            .map(|i| {
                if i + 1 < n {
                    entry(m1, -0.5 * inv_dq2 + m1 * v[i + 1])
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
            .collect();
        let sub: Vec<Complex64> = (0..n)
            .map(|i| {
                if i > 0 {
                    entry(m1, -0.5 * inv_dq2 + m1 * v[i - 1])
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
            .collect();

        let mut sup_reduced = vec![Complex64::new(0.0, 0.0); n];
        let mut inv_pivot = vec![Complex64::new(0.0, 0.0); n];
        for i in 0..n {
            let pivot = if i == 0 {
                diag[0]
            } else {
                diag[i] - sub[i] * sup_reduced[i - 1]
            };
            if !(pivot.norm() > 1e-14 * diag[i].norm()) || !pivot.is_finite() {
                return Err(Error::SingularSystem { row: i + 1 });
            }
            inv_pivot[i] = pivot.inv();
            sup_reduced[i] = sup[i] * inv_pivot[i];
        }

        Ok(Self {
            sub,
            diag,
            sup,
            sup_reduced,
            inv_pivot,
            rhs: vec![Complex64::new(0.0, 0.0); n],
        })
    }

    fn step(&mut self, psi: &mut [Complex64]) {
        let n = self.diag.len();
        let x = &mut psi[1..=n];
        // B = conj(A)
        for i in 0..n {
            let mut r = self.diag[i].conj() * x[i];
            if i > 0 {
                r += self.sub[i].conj() * x[i - 1];
            }
            if i + 1 < n {
                r += self.sup[i].conj() * x[i + 1];
            }
            self.rhs[i] = r;
        }
        self.rhs[0] *= self.inv_pivot[0];
        for i in 1..n {
            self.rhs[i] = (self.rhs[i] - self.sub[i] * self.rhs[i - 1]) * self.inv_pivot[i];
        }
        x[n - 1] = self.rhs[n - 1];
        for i in (0..n - 1).rev() {
            x[i] = self.rhs[i] - self.sup_reduced[i] * x[i + 1];
        }
    }
}

#[derive(Debug, Clone)]
enum Kernel {
    Ftcs {
        potential: Vec<f64>,
        scratch: Vec<Complex64>,
    },
    Cn(CrankNicolson),
}

/// Stateful stepper for one run. Counts steps and enforces the divergence
/// limit when one is set.
#[derive(Debug, Clone)]
pub struct Propagator {
    kernel: Kernel,
    dt: f64,
    dq: f64,
    start_time: f64,
    steps: usize,
    limit: Option<f64>,
}

impl Propagator {
    pub fn new(grid: &Grid, potential: &PotentialSpec, scheme: Scheme) -> Result<Self> {
        potential.validate()?;
        let v = potential.sample(grid);
        let kernel = match scheme {
            Scheme::ExplicitFtcs => Kernel::Ftcs {
                potential: v,
                scratch: vec![Complex64::new(0.0, 0.0); grid.n_points()],
            },
            Scheme::ImplicitCn(laplacian) => Kernel::Cn(CrankNicolson::new(grid, &v, laplacian)?),
        };
        Ok(Self {
            kernel,
            dt: grid.dt(),
            dq: grid.dq(),
            start_time: 0.0,
            steps: 0,
            limit: None,
        })
    }

    /// Fail once `max|psi|` exceeds `DIVERGENCE_FACTOR * reference_max`.
    pub fn with_divergence_limit(mut self, reference_max: f64) -> Self {
        self.limit = Some(DIVERGENCE_FACTOR * reference_max);
        self
    }

    pub fn with_start_time(mut self, t0: f64) -> Self {
        self.start_time = t0;
        self
    }

    pub fn steps_taken(&self) -> usize {
        self.steps
    }

    pub fn step(&mut self, field: &mut ComplexField) -> Result<()> {
        let psi = field.values_mut();
        match &mut self.kernel {
            Kernel::Ftcs { potential, scratch } => {
                ftcs_kernel(psi, scratch, potential, self.dt, self.dq)
            }
            Kernel::Cn(cn) => cn.step(psi),
        }
        self.steps += 1;
        let time = self.start_time + self.steps as f64 * self.dt;
        field.set_time(time);

        let max_sq = field
            .values()
            .iter()
            .map(|z| z.norm_sqr())
            .fold(0.0, f64::max);
        let blown = match self.limit {
            Some(limit) => !(max_sq <= limit * limit),
            None => !max_sq.is_finite(),
        };
        if blown {
            return Err(Error::Divergence {
                step: self.steps,
                time,
                max_amplitude: max_sq.sqrt(),
                limit: self.limit.unwrap_or(f64::INFINITY),
            });
        }
        Ok(())
    }
}

fn ftcs_kernel(
    psi: &mut [Complex64],
    scratch: &mut [Complex64],
    potential: &[f64],
    dt: f64,
    dq: f64,
) {
    let n = psi.len();
    let c = dt / (2.0 * dq * dq);
    scratch[0] = Complex64::new(0.0, 0.0);
    scratch[n - 1] = Complex64::new(0.0, 0.0);
    for i in 1..n - 1 {
        let lap = psi[i + 1] + psi[i - 1] - psi[i] * 2.0;
        // dt * (i/2 * lap/dq^2 - i V psi) = i * w
        let w = lap * c - psi[i] * (dt * potential[i]);
        scratch[i] = psi[i] + Complex64::new(-w.im, w.re);
    }
    psi.copy_from_slice(scratch);
}

/// One explicit (forward-time, centred-space) step. Fails only on
/// non-finite output; the growth limit is enforced by [`propagate`].
pub fn step_ftcs(
    field: &ComplexField,
    potential: &PotentialSpec,
    grid: &Grid,
) -> Result<ComplexField> {
    let mut next = field.clone();
    Propagator::new(grid, potential, Scheme::ExplicitFtcs)?
        .with_start_time(field.time())
        .step(&mut next)?;
    Ok(next)
}

/// One Crank-Nicolson step with the given kinetic discretisation.
pub fn step_implicit(
    field: &ComplexField,
    potential: &PotentialSpec,
    grid: &Grid,
    laplacian: Laplacian,
) -> Result<ComplexField> {
    let mut next = field.clone();
    Propagator::new(grid, potential, Scheme::ImplicitCn(laplacian))?
        .with_start_time(field.time())
        .step(&mut next)?;
    Ok(next)
}

/// Runs `grid.n_steps()` steps; see [`propagate_observed`].
pub fn propagate(
    initial: &ComplexField,
    potential: &PotentialSpec,
    grid: &Grid,
    schedule: &PropagationSchedule,
) -> Result<SnapshotSet> {
    propagate_observed(
        initial,
        potential,
        grid,
        schedule,
        grid.n_steps(),
        |_, _| Ok(()),
    )
}

/// Runs `n_steps` steps of the scheduled scheme, storing the initial state,
/// every `snapshot_stride`-th state and the final state, plus the norm at
/// t = 0, every `norm_check_stride`-th step and the end. `observe` sees the
/// field after every step (and once before the first, with index 0).
pub fn propagate_observed<F>(
    initial: &ComplexField,
    potential: &PotentialSpec,
    grid: &Grid,
    schedule: &PropagationSchedule,
    n_steps: usize,
    mut observe: F,
) -> Result<SnapshotSet>
where
    F: FnMut(usize, &ComplexField) -> Result<()>,
{
    schedule.validate(n_steps)?;
    if initial.len() != grid.n_points() {
        return Err(Error::invalid(
            "initial",
            "field length does not match the grid",
        ));
    }
    let norm0 = initial.norm(grid);
    if !((norm0 - 1.0).abs() <= 1e-4) {
        return Err(Error::invalid(
            "initial",
            format!("field must be normalized (norm = {norm0})"),
        ));
    }

    let mut propagator = Propagator::new(grid, potential, schedule.scheme)?
        .with_divergence_limit(initial.max_amplitude())
        .with_start_time(initial.time());
    let snapshot = |f: &ComplexField| Snapshot {
        field: f.clone(),
        polar: polar_decompose(f, schedule.amplitude_floor),
    };

    let mut out = SnapshotSet::default();
    let mut field = initial.clone();
    out.snapshots.push(snapshot(&field));
    out.norm_history.push((field.time(), norm0));
    observe(0, &field)?;

    for step in 1..=n_steps {
        propagator.step(&mut field)?;
        observe(step, &field)?;
        if step % schedule.snapshot_stride == 0 || step == n_steps {
            out.snapshots.push(snapshot(&field));
        }
        if step % schedule.norm_check_stride == 0 || step == n_steps {
            out.norm_history.push((field.time(), field.norm(grid)));
        }
    }
    if n_steps > 0 {
        log::debug!(
            "propagated {} steps, max norm deviation {:e}",
            n_steps,
            out.max_norm_deviation()
        );
    }
    Ok(out)
}
