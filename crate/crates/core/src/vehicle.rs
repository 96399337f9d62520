//! Speed-scheduled linear path-tracking model.
//!
//! State order is (side slip β, yaw rate r, heading error at the preview
//! point Δψ, lateral error at the preview point e_y).

use nalgebra::{Matrix4, RowVector4, Vector4};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::tf::RationalTF;
use crate::{poly, Direction};

/// The model divides by V and V², so it is never scheduled below this speed.
pub const V_FLOOR: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VehicleParams {
    /// Front cornering stiffness, N/rad.
    pub cf: f64,
    /// Rear cornering stiffness, N/rad.
    pub cr: f64,
    /// CG to front axle, m.
    pub lf: f64,
    /// CG to rear axle, m.
    pub lr: f64,
    /// kg
    pub mass: f64,
    /// Yaw inertia, kg·m².
    pub iz: f64,
}

impl Default for VehicleParams {
    fn default() -> Self {
        Self {
            cf: 3e5,
            cr: 3e5,
            lf: 2.0,
            lr: 2.0,
            mass: 3000.0,
            iz: 5113.0,
        }
    }
}

impl VehicleParams {
    pub fn validate(&self) -> Result<()> {
        let v = [self.cf, self.cr, self.lf, self.lr, self.mass, self.iz];
        if v.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
            return invalid("vehicle parameters must be finite and positive");
        }
        Ok(())
    }

    /// Front and rear axle quantities exchanged, as seen when reversing.
    pub fn swapped(&self) -> Self {
        Self {
            cf: self.cr,
            cr: self.cf,
            lf: self.lr,
            lr: self.lf,
            ..*self
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlantModel {
    pub a: Matrix4<f64>,
    pub b_steer: Vector4<f64>,
    pub b_rho: Vector4<f64>,
    pub b_mzd: Vector4<f64>,
    pub v: f64,
    pub ls: f64,
    pub direction: Direction,
}

/// Builds the model at speed `v` with preview distance `ls`.
///
/// Reversing is modelled as a rear-steered vehicle driving forward with the
/// axle parameters swapped, so the active input is the rear-steer column.
pub fn assemble_model(params: &VehicleParams, v: f64, ls: f64, direction: Direction) -> Result<PlantModel> {
    params.validate()?;
    if !(v >= V_FLOOR) || !v.is_finite() {
        return invalid(format!("speed {v} below the model floor {V_FLOOR}"));
    }
    if !(ls >= 0.0) || !ls.is_finite() {
        return invalid(format!("preview distance {ls} must be non-negative"));
    }
    let p = match direction {
        Direction::Forward => *params,
        Direction::Backward => params.swapped(),
    };
    let VehicleParams { cf, cr, lf, lr, mass, iz } = p;
    let mv = mass * v;
    #[rustfmt::skip]
    let a = Matrix4::new(
        -(cf + cr) / mv, -1.0 + (cr * lr - cf * lf) / (mv * v), 0.0, 0.0,
        (cr * lr - cf * lf) / iz, -(cf * lf * lf + cr * lr * lr) / (iz * v), 0.0, 0.0,
        0.0, 1.0, 0.0, 0.0,
        v, ls, v, 0.0,
    );
    let front = Vector4::new(cf / mv, cf * lf / iz, 0.0, 0.0);
    let rear = Vector4::new(cr / mv, cr * lr / iz, 0.0, 0.0);
    let b_steer = match direction {
        Direction::Forward => front,
        Direction::Backward => rear,
    };
    Ok(PlantModel {
        a,
        b_steer,
        b_rho: Vector4::new(0.0, 0.0, -v, -ls * v),
        b_mzd: Vector4::new(0.0, 1.0 / iz, 0.0, 0.0),
        v,
        ls,
        direction,
    })
}

impl PlantModel {
    /// Output row selecting e_y.
    pub fn output(&self) -> RowVector4<f64> {
        RowVector4::new(0.0, 0.0, 0.0, 1.0)
    }

    /// `ẋ = A x + B_steer δ + B_rho ρ + B_Mzd M_zd`
    pub fn derivative(&self, x: &Vector4<f64>, delta: f64, rho: f64, mzd: f64) -> Vector4<f64> {
        self.a * x + self.b_steer * delta + self.b_rho * rho + self.b_mzd * mzd
    }

    /// Monic characteristic polynomial of A, descending powers.
    pub fn characteristic_polynomial(&self) -> Vec<f64> {
        faddeev_leverrier(&self.a).1
    }
}

/// Faddeev–LeVerrier recursion. Returns the adjugate coefficient matrices
/// `M_1..M_n`, with `adj(sI − A) = Σ M_k s^(n−k)`, and the monic characteristic
/// polynomial in descending powers.
///
/// Characteristic coefficients below the recursion's rounding floor
/// (`n·ε·‖A‖ᵏ`) are set to zero, so exact integrators come out exact.
pub fn faddeev_leverrier(a: &Matrix4<f64>) -> (Vec<Matrix4<f64>>, Vec<f64>) {
    let n = 4;
    let norm = a.norm();
    let mut c = vec![1.0];
    let mut ms = Vec::with_capacity(n);
    let mut m = Matrix4::zeros();
    for k in 1..=n {
        m = a * m + Matrix4::identity() * c[k - 1];
        ms.push(m);
        let am = a * m;
        let mut ck = -am.trace() / k as f64;
        if ck.abs() <= 16.0 * n as f64 * f64::EPSILON * norm.powi(k as i32) {
            ck = 0.0;
        }
        c.push(ck);
    }
    (ms, c)
}

/// Steering angle to e_y transfer function from the resolvent of A.
pub fn steering_to_error_tf(plant: &PlantModel) -> Result<RationalTF> {
    let (ms, den) = faddeev_leverrier(&plant.a);
    let c = plant.output();
    let num: Vec<f64> = ms.iter().map(|m| (c * m * plant.b_steer)[0]).collect();
    if num.iter().chain(&den).any(|v| !v.is_finite()) {
        return Err(Error::Numerical(format!(
            "characteristic recursion produced non-finite coefficients at V = {} (max |A| = {:.3e})",
            plant.v,
            plant.a.amax()
        )));
    }
    // The first Markov parameter C·B is zero by construction; drop it so the
    // relative degree shows up structurally.
    let num = poly::trim_leading(&num, 0.0);
    RationalTF::new(&num, &den)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table_plant(v: f64, dir: Direction) -> PlantModel {
        assemble_model(&VehicleParams::default(), v, 0.5 * v, dir).unwrap()
    }

    #[test]
    fn hand_checked_entries() {
        let p = table_plant(1.0, Direction::Forward);
        assert_eq!(p.a[(0, 0)], -200.0);
        assert_eq!(p.a[(1, 0)], 0.0);
        assert_eq!(p.a[(0, 1)], -1.0);
        assert_eq!(p.a[(3, 1)], 0.5);
        assert_eq!(p.b_steer[2], 0.0);
        assert_eq!(p.b_steer[3], 0.0);
    }

    #[test]
    fn symmetric_vehicle_reverses_identically() {
        let f = table_plant(0.55, Direction::Forward);
        let b = table_plant(0.55, Direction::Backward);
        assert_eq!(f.a, b.a);
        assert_eq!(f.b_steer, b.b_steer);
    }

    #[test]
    fn below_floor_is_rejected() {
        assert!(assemble_model(&VehicleParams::default(), 0.05, 0.0, Direction::Forward).is_err());
        assert!(assemble_model(&VehicleParams::default(), 0.1, 0.05, Direction::Forward).is_ok());
    }

    #[test]
    fn tf_degrees() {
        let g = steering_to_error_tf(&table_plant(1.0, Direction::Forward)).unwrap();
        assert_eq!(g.den_degree(), 4);
        assert_eq!(g.num_degree(), 2);
        assert_eq!(g.relative_degree(), 2);
    }

    #[test]
    fn swap_twice_is_identity() {
        let p = VehicleParams { cf: 1.0, cr: 2.0, lf: 3.0, lr: 4.0, mass: 5.0, iz: 6.0 };
        assert_eq!(p.swapped().swapped(), p);
    }
}
