use nalgebra::{SVector, Vector4};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::scenario::{ControllerKind, Scenario};
use crate::control::{synthesize_dob, DiscretePid, DobCompensator};
use crate::error::{Error, Result};
use crate::vehicle::{assemble_model, steering_to_error_tf, PlantModel};
use crate::Direction;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySample {
    pub t: f64,
    pub s: f64,
    pub beta: f64,
    pub r: f64,
    pub dpsi: f64,
    pub ey: f64,
    pub delta: f64,
    pub delta_rate: f64,
    pub v: f64,
    pub kappa: f64,
}

/// Global pose integrated from the true speed and yaw rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoseSample {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub psi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub controller: ControllerKind,
    pub direction: Direction,
    pub dt: f64,
    pub samples: Vec<TrajectorySample>,
    pub pose: Vec<PoseSample>,
}

/// Error states plus (x, y, ψ).
type Full = SVector<f64, 7>;

const DIVERGENCE: f64 = 1e6;

/// Fixed-step closed-loop run along the speed profile until the path end.
///
/// The controller samples e_y once per step and holds δ; the plant is
/// integrated with classical RK4 on enough substeps to keep the fast lateral
/// modes resolved, with speed, curvature and model coefficients evaluated at
/// each stage time.
pub fn simulate(sc: &Scenario) -> Result<Trajectory> {
    sc.validate()?;
    let timing = sc.speed.timing()?;
    let dt = sc.dt;
    let steps = (timing.duration() / dt).ceil() as usize;
    let sched = |v: f64| v.max(sc.v_floor);
    let plant_at = |v: f64| assemble_model(&sc.params, sched(v), sc.preview_gain * sched(v), sc.direction);

    let mut state = Full::zeros();
    for i in 0..4 {
        state[i] = sc.initial_state[i];
    }
    state[4] = sc.initial_pose.x;
    state[5] = sc.initial_pose.y;
    state[6] = sc.initial_pose.heading;

    let mut pid = DiscretePid::new();
    let (_, v0) = timing.at(0.0);
    let mut dob: Option<(DobCompensator, f64)> = if sc.controller.uses_dob() {
        let vs = sched(v0);
        let gn = sc.dob.nominal(&steering_to_error_tf(&plant_at(vs)?)?);
        Some((synthesize_dob(&gn, &sc.dob.q_filter()?, dt)?, vs))
    } else {
        None
    };
    let mut rng = ChaCha8Rng::seed_from_u64(sc.noise.seed);
    let noise = if sc.noise.std_dev > 0.0 {
        Some(Normal::new(0.0, sc.noise.std_dev).map_err(|e| Error::InvalidInput(e.to_string()))?)
    } else {
        None
    };

    let mut samples = Vec::with_capacity(steps + 1);
    let mut pose = Vec::with_capacity(steps + 1);
    let mut prev_delta = 0.0;
    for k in 0..=steps {
        let t = k as f64 * dt;
        let (s, v) = timing.at(t);
        let vs = sched(v);
        let ey = state[3];
        let measured = ey + noise.map_or(0.0, |d| d.sample(&mut rng));

        let u_n = match (&sc.schedule, sc.controller.uses_pid()) {
            (Some(schedule), true) => pid.step(measured, &schedule.gains_at(vs), dt),
            _ => 0.0,
        };
        let delta = match dob.as_mut() {
            Some((comp, v_tuned)) => {
                if (vs - *v_tuned).abs() > sc.dob.retune_step {
                    comp.retune(&sc.dob.nominal(&steering_to_error_tf(&plant_at(vs)?)?))?;
                    *v_tuned = vs;
                }
                comp.step(u_n, measured, sc.steer_limit)
            }
            None => u_n.clamp(-sc.steer_limit, sc.steer_limit),
        };
        let delta_rate = if k == 0 { 0.0 } else { (delta - prev_delta) / dt };
        prev_delta = delta;
        samples.push(TrajectorySample {
            t,
            s,
            beta: state[0],
            r: state[1],
            dpsi: state[2],
            ey,
            delta,
            delta_rate,
            v,
            kappa: sc.curvature.kappa_at(s),
        });
        pose.push(PoseSample { t, x: state[4], y: state[5], psi: state[6] });
        if k == steps {
            break;
        }

        let rhs = |tau: f64, x: &Full| -> Result<Full> {
            let (s, v) = timing.at(tau);
            let plant = plant_at(v)?;
            let e = Vector4::new(x[0], x[1], x[2], x[3]);
            // The reference heading turns at ds/dt·κ, so curvature enters with
            // the true speed even while the model coefficients sit on the floor.
            let rho = sc.curvature.kappa_at(s) * v / plant.v;
            let de = plant.derivative(&e, delta, rho, 0.0);
            let psi = x[6];
            Ok(Full::from_column_slice(&[de[0], de[1], de[2], de[3], v * psi.cos(), v * psi.sin(), x[1]]))
        };
        let sub = substeps(&plant_at(v)?, dt);
        let h = dt / sub as f64;
        for j in 0..sub {
            let tau = t + j as f64 * h;
            let k1 = rhs(tau, &state)?;
            let k2 = rhs(tau + h / 2.0, &(state + k1 * (h / 2.0)))?;
            let k3 = rhs(tau + h / 2.0, &(state + k2 * (h / 2.0)))?;
            let k4 = rhs(tau + h, &(state + k3 * h))?;
            state += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
        }
        if (0..4).any(|i| !(state[i].abs() <= DIVERGENCE)) {
            return Err(Error::Divergence { step: k + 1 });
        }
    }
    Ok(Trajectory {
        controller: sc.controller,
        direction: sc.direction,
        dt,
        samples,
        pose,
    })
}

/// RK4 substeps per sample so that `h · ρ(A_lat) ≤ 1`, bounding the spectral
/// radius of the lateral block by its row sums.
fn substeps(plant: &PlantModel, dt: f64) -> usize {
    let a = &plant.a;
    let bound = (a[(0, 0)].abs() + a[(0, 1)].abs()).max(a[(1, 0)].abs() + a[(1, 1)].abs());
    ((dt * bound).ceil() as usize).max(1)
}
