//! Wavefunction storage on the grid, the Gaussian initial state and the
//! polar (amplitude/phase) decomposition.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::Grid;

/// Relative amplitude below which `arg(psi)` is treated as meaningless.
pub const DEFAULT_AMPLITUDE_FLOOR: f64 = 1e-10;

/// Complex wavefunction values on every node at one instant. The two
/// boundary nodes are pinned to zero.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexField {
    values: Vec<Complex64>,
    time: f64,
}

impl ComplexField {
    /// Wraps `values`, zeroing the boundary nodes.
    pub fn new(grid: &Grid, mut values: Vec<Complex64>, time: f64) -> Result<Self> {
        if values.len() != grid.n_points() {
            return Err(Error::invalid(
                "field",
                format!(
                    "length {} does not match grid n_points {}",
                    values.len(),
                    grid.n_points()
                ),
            ));
        }
        let n = values.len();
        values[0] = Complex64::new(0.0, 0.0);
        values[n - 1] = Complex64::new(0.0, 0.0);
        Ok(Self { values, time })
    }

    pub fn zeros(grid: &Grid) -> Self {
        Self {
            values: vec![Complex64::new(0.0, 0.0); grid.n_points()],
            time: 0.0,
        }
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub(crate) fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub(crate) fn set_time(&mut self, time: f64) {
        self.time = time;
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Discrete norm `sum |psi_i|^2 dq`.
    pub fn norm(&self, grid: &Grid) -> f64 {
        self.values.iter().map(|z| z.norm_sqr()).sum::<f64>() * grid.dq()
    }

    pub fn max_amplitude(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `a*self + b*other`, at `self`'s time.
    pub fn combine(&self, a: Complex64, other: &ComplexField, b: Complex64) -> ComplexField {
        ComplexField {
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(x, y)| a * x + b * y)
                .collect(),
            time: self.time,
        }
    }
}

/// Parameters of the initial Gaussian packet
/// `(2g/pi)^(1/4) exp[-g (q-q0)^2 + i p0 (q-q0)]`, with `g = 1/(2 delta^2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianParams {
    pub gamma: f64,
    pub q0: f64,
    pub p0: f64,
}

impl GaussianParams {
    pub fn new(gamma: f64, q0: f64, p0: f64) -> Result<Self> {
        let p = Self { gamma, q0, p0 };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma.is_finite() && self.gamma > 0.0) {
            return Err(Error::invalid(
                "gamma",
                format!("must be positive, got {}", self.gamma),
            ));
        }
        if !self.q0.is_finite() {
            return Err(Error::invalid("q0", "must be finite"));
        }
        if !self.p0.is_finite() {
            return Err(Error::invalid("p0", "must be finite"));
        }
        Ok(())
    }

    /// The packet width parameter `delta = 1/sqrt(2 gamma)`.
    pub fn delta(&self) -> f64 {
        (0.5 / self.gamma).sqrt()
    }

    /// Standard deviation of `|psi|^2` at t = 0, `1/(2 sqrt(gamma))`.
    pub fn sigma0(&self) -> f64 {
        0.5 / self.gamma.sqrt()
    }

    pub fn value(&self, q: f64) -> Complex64 {
        let u = q - self.q0;
        let prefactor = (2.0 * self.gamma / PI).powf(0.25);
        Complex64::from_polar(prefactor * (-self.gamma * u * u).exp(), self.p0 * u)
    }
}

/// Samples the Gaussian packet on the grid at t = 0.
pub fn gaussian_packet(grid: &Grid, params: &GaussianParams) -> Result<ComplexField> {
    params.validate()?;
    let values: Vec<Complex64> = grid.positions().map(|q| params.value(q)).collect();
    let peak = (2.0 * params.gamma / PI).powf(0.25);
    let edge = values[0].norm().max(values[values.len() - 1].norm());
    if edge > 1e-12 * peak {
        log::warn!(
            "Gaussian packet not contained: boundary amplitude {:e} is {:e} of peak",
            edge,
            edge / peak
        );
    }
    ComplexField::new(grid, values, 0.0)
}

/// Amplitude `R = |psi|` and spatially unwrapped phase `S = arg psi` (hbar = 1).
#[derive(Debug, Clone, PartialEq)]
pub struct PolarField {
    amplitude: Vec<f64>,
    phase: Vec<f64>,
    time: f64,
    floor: f64,
}

impl PolarField {
    pub fn amplitude(&self) -> &[f64] {
        &self.amplitude
    }

    pub fn phase(&self) -> &[f64] {
        &self.phase
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    /// Absolute amplitude floor used for the decomposition.
    pub fn floor(&self) -> f64 {
        self.floor
    }

    pub fn is_reliable(&self, i: usize) -> bool {
        self.amplitude[i] >= self.floor && self.amplitude[i] > 0.0
    }

    pub fn reconstruct(&self, i: usize) -> Complex64 {
        Complex64::from_polar(self.amplitude[i], self.phase[i])
    }
}

/// Splits `field` into amplitude and unwrapped phase.
///
/// `relative_floor` is scaled by `max R`. Nodes at or above the floor are
/// unwrapped left to right so that neighbouring phases differ by at most pi;
/// the phase across runs of sub-floor nodes is bridged linearly between the
/// enclosing reliable nodes and held constant beyond the outermost ones.
pub fn polar_decompose(field: &ComplexField, relative_floor: f64) -> PolarField {
    let amplitude: Vec<f64> = field.values.iter().map(|z| z.norm()).collect();
    let peak = amplitude.iter().copied().fold(0.0, f64::max);
    let floor = relative_floor * peak;
    let n = amplitude.len();
    let mut phase = vec![0.0; n];

    let reliable: Vec<usize> = (0..n)
        .filter(|&i| amplitude[i] > 0.0 && amplitude[i] >= floor)
        .collect();
    if reliable.is_empty() {
        return PolarField {
            amplitude,
            phase,
            time: field.time,
            floor,
        };
    }

    let mut prev = field.values[reliable[0]].arg();
    phase[reliable[0]] = prev;
    for &i in &reliable[1..] {
        let raw = field.values[i].arg();
        // Keep S_i - raw_i an exact multiple of 2*pi so R e^{iS} reproduces psi.
        let turns = ((prev - raw) / TAU).round();
        let s = raw + turns * TAU;
        phase[i] = s;
        prev = s;
    }

    for pair in reliable.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        if b > a + 1 {
            let slope = (phase[b] - phase[a]) / (b - a) as f64;
            for i in a + 1..b {
                phase[i] = phase[a] + slope * (i - a) as f64;
            }
        }
    }
    let first = reliable[0];
    let last = *reliable.last().unwrap();
    for i in 0..first {
        phase[i] = phase[first];
    }
    for i in last + 1..n {
        phase[i] = phase[last];
    }

    PolarField {
        amplitude,
        phase,
        time: field.time,
        floor,
    }
}
