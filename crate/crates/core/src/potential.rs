//! External classical potentials and their analytic forces.

use crate::error::{Error, Result};
use crate::grid::Grid;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PotentialSpec {
    Free,
    /// `V0 e^x / (1 + e^x)^2` with `x = beta (q - qv)`; peak height `V0/4` at `qv`.
    Eckart {
        v0: f64,
        beta: f64,
        qv: f64,
    },
}

impl PotentialSpec {
    pub fn eckart(v0: f64, beta: f64, qv: f64) -> Result<Self> {
        let spec = PotentialSpec::Eckart { v0, beta, qv };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if let PotentialSpec::Eckart { v0, beta, qv } = *self {
            if !(v0.is_finite() && v0 > 0.0) {
                return Err(Error::invalid("v0", format!("must be positive, got {v0}")));
            }
            if !(beta.is_finite() && beta > 0.0) {
                return Err(Error::invalid(
                    "beta",
                    format!("must be positive, got {beta}"),
                ));
            }
            if !qv.is_finite() {
                return Err(Error::invalid("qv", "must be finite"));
            }
        }
        Ok(())
    }

    pub fn is_free(&self) -> bool {
        matches!(self, PotentialSpec::Free)
    }

    /// `V(q)`. The Eckart form is evaluated as `V0/4 sech^2(x/2)`, which
    /// cannot overflow for large `|x|`.
    pub fn value(&self, q: f64) -> f64 {
        match *self {
            PotentialSpec::Free => 0.0,
            PotentialSpec::Eckart { v0, beta, qv } => {
                let sech = sech(0.5 * beta * (q - qv));
                0.25 * v0 * sech * sech
            }
        }
    }

    /// Classical force `-dV/dq`.
    pub fn force(&self, q: f64) -> f64 {
        match *self {
            PotentialSpec::Free => 0.0,
            PotentialSpec::Eckart { v0, beta, qv } => {
                let half = 0.5 * beta * (q - qv);
                let sech = sech(half);
                0.25 * v0 * beta * sech * sech * half.tanh()
            }
        }
    }

    pub fn sample(&self, grid: &Grid) -> Vec<f64> {
        grid.positions().map(|q| self.value(q)).collect()
    }
}

fn sech(x: f64) -> f64 {
    let e = (-x.abs()).exp();
    2.0 * e / (1.0 + e * e)
}

/// `V(q)`; see [`PotentialSpec::value`].
pub fn eval_potential(spec: &PotentialSpec, q: f64) -> f64 {
    spec.value(q)
}

/// `F_C(q) = -dV/dq`; see [`PotentialSpec::force`].
pub fn classical_force(spec: &PotentialSpec, q: f64) -> f64 {
    spec.force(q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const BARRIER: PotentialSpec = PotentialSpec::Eckart {
        v0: 200.0,
        beta: 20.0,
        qv: 0.0,
    };

    // The textbook form, used only as an independent reference.
    fn eckart_direct(q: f64) -> f64 {
        let e = (20.0 * q).exp();
        200.0 * e / (1.0 + e).powi(2)
    }

    fn force_direct(q: f64) -> f64 {
        let e = (20.0 * q).exp();
        -200.0 * 20.0 * e * (1.0 - e) / (1.0 + e).powi(3)
    }

    #[test]
    fn peak_height_is_quarter_v0() {
        assert_eq!(eval_potential(&BARRIER, 0.0), 50.0);
        assert_eq!(classical_force(&BARRIER, 0.0), 0.0);
    }

    #[test]
    fn tails_are_suppressed() {
        assert!(eval_potential(&BARRIER, 10.0) < 1e-4);
        assert!(eval_potential(&BARRIER, -10.0) < 1e-4);
        // no overflow far from the barrier
        assert!(eval_potential(&BARRIER, 1e6).is_finite());
        assert!(classical_force(&BARRIER, -1e6).is_finite());
    }

    #[test]
    fn free_is_zero() {
        for q in [-5.0, 0.0, 3.3] {
            assert_eq!(eval_potential(&PotentialSpec::Free, q), 0.0);
            assert_eq!(classical_force(&PotentialSpec::Free, q), 0.0);
        }
    }

    #[test]
    fn matches_direct_form() {
        for i in -200..=200 {
            let q = i as f64 * 0.005;
            assert!((eval_potential(&BARRIER, q) - eckart_direct(q)).abs() < 1e-12);
            assert!((classical_force(&BARRIER, q) - force_direct(q)).abs() < 1e-10);
        }
    }

    #[test]
    fn force_left_of_barrier_points_away() {
        let f = classical_force(&BARRIER, -0.1);
        assert!(f < 0.0);
        assert!((f - force_direct(-0.1)).abs() < 1e-10);
    }

    #[test]
    fn maximum_by_dense_scan() {
        let grid = Grid::new(-3.0, 3.0, 6001, 1.0, 1).unwrap();
        let (imax, vmax) = grid
            .positions()
            .map(|q| eval_potential(&BARRIER, q))
            .enumerate()
            .fold(
                (0, f64::MIN),
                |acc, (i, v)| if v > acc.1 { (i, v) } else { acc },
            );
        assert!((vmax - 50.0).abs() < 1e-9);
        assert!(grid.position(imax).abs() <= grid.dq());
    }

    #[test]
    fn invalid_eckart_parameters() {
        assert!(PotentialSpec::eckart(0.0, 20.0, 0.0).is_err());
        assert!(PotentialSpec::eckart(200.0, -1.0, 0.0).is_err());
        assert!(PotentialSpec::eckart(200.0, 20.0, f64::NAN).is_err());
    }

    proptest! {
        #[test]
        fn symmetric_about_centre(s in -5.0f64..5.0, qv in -2.0f64..2.0) {
            let spec = PotentialSpec::eckart(200.0, 20.0, qv).unwrap();
            prop_assert!((spec.value(qv + s) - spec.value(qv - s)).abs() <= 1e-12 * spec.value(qv + s).max(1e-300));
            prop_assert!((spec.force(qv + s) + spec.force(qv - s)).abs() <= 1e-12 * spec.force(qv + s).abs().max(1e-300));
        }

        #[test]
        fn force_is_minus_gradient(q in -1.0f64..1.0, qv in -0.5f64..0.5) {
            // Relative to the peak force: the pointwise ratio is ill-posed where F_C -> 0.
            let spec = PotentialSpec::eckart(200.0, 20.0, qv).unwrap();
            let peak = spec.force(qv - 2.0 * (1.0 / 3.0f64.sqrt()).atanh() / 20.0).abs();
            let h = 1e-4;
            let fd = -(spec.value(q + h) - spec.value(q - h)) / (2.0 * h);
            prop_assert!((fd - spec.force(q)).abs() < 1e-6 * peak, "q={q} fd={fd}");
        }
    }
}
