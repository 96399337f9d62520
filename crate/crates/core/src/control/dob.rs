use serde::{Deserialize, Serialize};

use super::discrete::{bilinear, DiscreteFilter};
use super::qfilter::{make_q_filter, QFilter, NOMINAL_SCALE};
use crate::error::{invalid, Error, Result};
use crate::poly;
use crate::tf::RationalTF;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DobSettings {
    /// Q filter bandwidth, rad/s.
    pub omega_n: f64,
    pub xi: f64,
    /// Filter sample time, s.
    pub dt: f64,
    /// Nominal model gain relative to the plant.
    pub nominal_scale: f64,
    /// Scheduled-speed change that triggers re-discretisation, m/s.
    pub retune_step: f64,
}

impl Default for DobSettings {
    fn default() -> Self {
        Self {
            omega_n: 100.0,
            xi: 0.707,
            dt: 1e-3,
            nominal_scale: NOMINAL_SCALE,
            retune_step: 0.01,
        }
    }
}

impl DobSettings {
    pub fn validate(&self) -> Result<()> {
        self.q_filter()?;
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return invalid("DOB sample time must be positive");
        }
        if !(self.nominal_scale > 0.0 && self.nominal_scale.is_finite()) {
            return invalid("nominal scale must be positive");
        }
        if !(self.retune_step >= 0.0) {
            return invalid("retune step must be non-negative");
        }
        Ok(())
    }

    pub fn q_filter(&self) -> Result<QFilter> {
        make_q_filter(self.omega_n, self.xi)
    }

    pub fn nominal(&self, g: &RationalTF) -> RationalTF {
        g.scaled(self.nominal_scale)
    }
}

/// `Q/G_n` as a single rational function.
pub fn inverse_branch(g_n: &RationalTF, q: &QFilter) -> Result<RationalTF> {
    let num = poly::mul(&q.num(), g_n.den());
    let den = poly::mul(g_n.num(), &q.den());
    let tf = RationalTF::new(&num, &den)?;
    if !tf.is_proper() {
        return invalid(format!(
            "Q/G_n is improper (relative degree {}); the Q filter order is too low",
            tf.relative_degree()
        ));
    }
    Ok(tf)
}

/// Discrete realisation of `u = u_n − (Q/G_n) y + Q u`.
#[derive(Debug, Clone)]
pub struct DobCompensator {
    pub branch_y: DiscreteFilter,
    pub branch_u: DiscreteFilter,
    pub dt: f64,
    q: QFilter,
}

pub fn synthesize_dob(g_n: &RationalTF, q: &QFilter, dt: f64) -> Result<DobCompensator> {
    let inv = inverse_branch(g_n, q)?;
    Ok(DobCompensator {
        branch_y: DiscreteFilter::from_tf(&inv, dt)?,
        branch_u: DiscreteFilter::from_tf(&q.tf(), dt)?,
        dt,
        q: *q,
    })
}

impl DobCompensator {
    /// Re-discretises the `Q/G_n` branch for a new nominal model, keeping filter state.
    pub fn retune(&mut self, g_n: &RationalTF) -> Result<()> {
        let (b, a) = bilinear(&inverse_branch(g_n, &self.q)?, self.dt)?;
        if a.len() != self.branch_y.coefficients().1.len() {
            return Err(Error::Numerical("nominal model changed order during retune".into()));
        }
        self.branch_y.retune(b, a);
        Ok(())
    }

    /// One sample: solves the algebraic loop through Q's feedthrough, clamps
    /// to `±limit` and feeds the applied command back into the Q branch.
    pub fn step(&mut self, u_n: f64, y: f64, limit: f64) -> f64 {
        let fy = self.branch_y.step(y);
        let raw = (u_n - fy + self.branch_u.pending()) / (1.0 - self.branch_u.feedthrough());
        let u = raw.clamp(-limit, limit);
        self.branch_u.step(u);
        u
    }
}

/// Closed-loop maps of the DOB loop from reference command `u_n`, output
/// disturbance `d` and sensor noise `n` to the output `y`.
#[derive(Debug, Clone)]
pub struct DobLoop {
    pub t_un: RationalTF,
    pub t_d: RationalTF,
    pub t_n: RationalTF,
}

/// With `G = N/D`, `G_n = N_n/D_n`, `Q = N_q/D_q`, every map shares the
/// denominator `N_n (D_q − N_q) D + N N_q D_n`.
pub fn dob_loop_tfs(g: &RationalTF, g_n: &RationalTF, q: &QFilter) -> Result<DobLoop> {
    let (n, d) = (g.num(), g.den());
    let (nn, dn) = (g_n.num(), g_n.den());
    let (nq, dq) = (q.num(), q.den());
    let dq_nq = poly::sub(&dq, &nq);
    let common = poly::add(&poly::mul(&poly::mul(nn, &dq_nq), d), &poly::mul(&poly::mul(n, &nq), dn));
    let scale = common.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    if !(scale > 0.0) || !scale.is_finite() {
        return Err(Error::Numerical(format!(
            "DOB loop denominator vanished (max coefficient {scale:.3e})"
        )));
    }
    let t_un = RationalTF::new(&poly::mul(&poly::mul(nn, n), &dq), &common)?;
    let t_d = RationalTF::new(&poly::mul(&poly::mul(nn, &dq_nq), d), &common)?;
    let t_n = RationalTF::new(&poly::scale(&poly::mul(&poly::mul(n, &nq), dn), -1.0), &common)?;
    Ok(DobLoop { t_un, t_d, t_n })
}
