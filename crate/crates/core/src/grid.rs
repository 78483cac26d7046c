use crate::error::{Error, Result};

/// Uniform 1D lattice over `[q_min, q_max]` (both endpoints are nodes)
/// together with the time-step schedule. Atomic units throughout.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    q_min: f64,
    q_max: f64,
    n_points: usize,
    dq: f64,
    dt: f64,
    n_steps: usize,
}

impl Grid {
    pub fn new(q_min: f64, q_max: f64, n_points: usize, dt: f64, n_steps: usize) -> Result<Self> {
        if !q_min.is_finite() {
            return Err(Error::invalid("q_min", "must be finite"));
        }
        if !q_max.is_finite() {
            return Err(Error::invalid("q_max", "must be finite"));
        }
        if q_min >= q_max {
            return Err(Error::invalid(
                "q_max",
                format!("must exceed q_min ({q_min} >= {q_max})"),
            ));
        }
        if n_points < 3 {
            return Err(Error::invalid(
                "n_points",
                format!("need at least 3 nodes, got {n_points}"),
            ));
        }
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::invalid(
                "dt",
                format!("must be positive and finite, got {dt}"),
            ));
        }
        if n_steps < 1 {
            return Err(Error::invalid("n_steps", "must be at least 1"));
        }
        Ok(Self {
            q_min,
            q_max,
            n_points,
            dq: (q_max - q_min) / (n_points - 1) as f64,
            dt,
            n_steps,
        })
    }

    pub fn q_min(&self) -> f64 {
        self.q_min
    }

    pub fn q_max(&self) -> f64 {
        self.q_max
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn dq(&self) -> f64 {
        self.dq
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    /// Total propagation time `dt * n_steps`.
    pub fn duration(&self) -> f64 {
        self.dt * self.n_steps as f64
    }

    /// Position of node `i`; always computed as `q_min + i*dq` so that every
    /// consumer sees bit-identical coordinates.
    #[inline]
    pub fn position(&self, i: usize) -> f64 {
        self.q_min + i as f64 * self.dq
    }

    pub fn positions(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        (0..self.n_points).map(move |i| self.position(i))
    }

    /// Open-interval membership, the domain in which trajectories may live.
    pub fn contains(&self, q: f64) -> bool {
        q > self.q_min && q < self.q_max
    }

    /// Index `i` of the cell `[q_i, q_{i+1}]` holding `q`, and the fractional
    /// offset within it. `None` outside the closed grid.
    pub fn locate(&self, q: f64) -> Option<(usize, f64)> {
        if !(q >= self.q_min && q <= self.q_max) {
            return None;
        }
        let s = (q - self.q_min) / self.dq;
        let i = (s.floor() as usize).min(self.n_points - 2);
        Some((i, s - i as f64))
    }

    /// Same lattice with a different time schedule.
    pub fn with_schedule(&self, dt: f64, n_steps: usize) -> Result<Self> {
        Self::new(self.q_min, self.q_max, self.n_points, dt, n_steps)
    }
}

/// Linear interpolation of nodal `values` at `q`.
pub(crate) fn interpolate(grid: &Grid, values: &[f64], q: f64) -> Option<f64> {
    let (i, frac) = grid.locate(q)?;
    Some(values[i] + frac * (values[i + 1] - values[i]))
}
