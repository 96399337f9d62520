use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::waypoints::WaypointSet;
use crate::error::{invalid, Error, Result};

/// Piecewise polynomial path; segment `i` is
/// `x_i(λ) = Σ_k coeffs_x[i][k] λ^k`, `λ ∈ [0, 1]`, and likewise for y.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathSpline {
    pub m: usize,
    pub p: usize,
    pub q: usize,
    pub coeffs_x: Vec<Vec<f64>>,
    pub coeffs_y: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolveMethod {
    Kkt,
    Nullspace,
}

/// Derivative mismatch `d^j/dλ^j` across one interior joint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JointMismatch {
    pub joint: usize,
    pub order: usize,
    pub dx: f64,
    pub dy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    /// Sum of squared residuals over x and y.
    pub objective: f64,
    /// Same data fitted segment by segment without joint constraints.
    pub unconstrained_objective: f64,
    /// Max |ΓΘ| of the column-scaled, row-normalised constraints.
    pub constraint_residual: f64,
    /// Max entry of the Lagrangian gradient in scaled variables.
    pub stationarity_residual: f64,
    pub condition_estimate: f64,
    pub method: SolveMethod,
    pub joints: Vec<JointMismatch>,
}

fn falling_factorial(k: usize, j: usize) -> f64 {
    (k - j + 1..=k).map(|v| v as f64).product()
}

/// Continuity constraints `ΓΘ = 0` for derivative orders `0..=q` at the
/// `m - 1` interior joints, with Θ the stacked per-segment coefficients.
pub fn build_constraint_matrix(m: usize, p: usize, q: usize) -> DMatrix<f64> {
    assert!(q <= p, "continuity order exceeds polynomial order");
    let rows = (q + 1) * m.saturating_sub(1);
    let mut g = DMatrix::zeros(rows, (p + 1) * m);
    for i in 0..m.saturating_sub(1) {
        for j in 0..=q {
            let r = i * (q + 1) + j;
            for k in j..=p {
                g[(r, i * (p + 1) + k)] = falling_factorial(k, j);
            }
            g[(r, (i + 1) * (p + 1) + j)] = -falling_factorial(j, j);
        }
    }
    g
}

const COND_LIMIT: f64 = 1e12;

/// Fits with chord-length λ inside each segment.
pub fn fit_path(wps: &WaypointSet, p: usize, q: usize) -> Result<PathSpline> {
    fit_path_with_lambdas(wps, &wps.chord_lambdas(), p, q).map(|(s, _)| s)
}

/// Equality-constrained least squares fit of every segment at once, x and y
/// solved independently, with caller-supplied λ per waypoint.
pub fn fit_path_with_lambdas(
    wps: &WaypointSet,
    lambdas: &[f64],
    p: usize,
    q: usize,
) -> Result<(PathSpline, FitReport)> {
    if q > p {
        return invalid(format!("continuity order q = {q} exceeds polynomial order p = {p}"));
    }
    if lambdas.len() != wps.len() {
        return invalid("one λ per waypoint required");
    }
    if lambdas.iter().any(|l| !(0.0..=1.0).contains(l)) {
        return invalid("λ must lie in [0, 1]");
    }
    let segs = wps.segments();
    if segs.iter().any(|r| r.len() < p + 1) {
        return invalid(format!("every segment needs at least {} points", p + 1));
    }
    let m = segs.len();
    let n = wps.len();
    let cols = (p + 1) * m;

    let mut phi = DMatrix::zeros(n, cols);
    for (i, r) in segs.iter().enumerate() {
        for row in r.clone() {
            let mut v = 1.0;
            for k in 0..=p {
                phi[(row, i * (p + 1) + k)] = v;
                v *= lambdas[row];
            }
        }
    }
    let col_scale: Vec<f64> = (0..cols)
        .map(|j| {
            let c = phi.column(j).norm();
            if c > 0.0 { 1.0 / c } else { 1.0 }
        })
        .collect();
    let s = DVector::from_vec(col_scale.clone());
    let phi_s = &phi * DMatrix::from_diagonal(&s);
    let mut gam_s = build_constraint_matrix(m, p, q) * DMatrix::from_diagonal(&s);
    for mut row in gam_s.row_iter_mut() {
        let nrm = row.amax();
        if nrm > 0.0 {
            row /= nrm;
        }
    }
    let nc = gam_s.nrows();

    let mut kkt = DMatrix::zeros(cols + nc, cols + nc);
    let hess = phi_s.transpose() * &phi_s * 2.0;
    kkt.view_mut((0, 0), (cols, cols)).copy_from(&hess);
    kkt.view_mut((0, cols), (cols, nc)).copy_from(&gam_s.transpose());
    kkt.view_mut((cols, 0), (nc, cols)).copy_from(&gam_s);
    let sv = kkt.clone().singular_values();
    let smax = sv.max();
    let smin = sv.min();
    let cond = if smin > 0.0 { smax / smin } else { f64::INFINITY };

    // Solve on centred data and restore the offset through the constant
    // terms, which every constraint order above zero ignores.
    let centre = |c: usize| wps.points.iter().map(|p| p[c]).sum::<f64>() / n as f64;
    let (cx, cy) = (centre(0), centre(1));
    let xs = DVector::from_iterator(n, wps.points.iter().map(|p| p[0] - cx));
    let ys = DVector::from_iterator(n, wps.points.iter().map(|p| p[1] - cy));

    let (method, tx, ty) = if cond.is_finite() && cond <= COND_LIMIT {
        let lu = kkt.clone().lu();
        let solve = |rhs_data: &DVector<f64>| -> Result<DVector<f64>> {
            let mut rhs = DVector::zeros(cols + nc);
            rhs.rows_mut(0, cols).copy_from(&(phi_s.transpose() * rhs_data * 2.0));
            lu.solve(&rhs)
                .map(|z| z.rows(0, cols).into_owned())
                .ok_or(Error::SingularFit { cond })
        };
        (SolveMethod::Kkt, solve(&xs)?, solve(&ys)?)
    } else {
        let z = nullspace(&gam_s, cols);
        let reduced = &phi_s * &z;
        let rsv = reduced.clone().singular_values();
        let rcond = if rsv.min() > 0.0 { rsv.max() / rsv.min() } else { f64::INFINITY };
        if !rcond.is_finite() || rcond > COND_LIMIT {
            return Err(Error::SingularFit { cond });
        }
        let svd = reduced.svd(true, true);
        let solve = |rhs: &DVector<f64>| -> Result<DVector<f64>> {
            svd.solve(rhs, 0.0)
                .map(|w| &z * w)
                .map_err(|_| Error::SingularFit { cond })
        };
        (SolveMethod::Nullspace, solve(&xs)?, solve(&ys)?)
    };

    let constraint_residual = (&gam_s * &tx).amax().max((&gam_s * &ty).amax());
    let stationarity_residual = stationarity(&phi_s, &gam_s, &tx, &xs).max(stationarity(&phi_s, &gam_s, &ty, &ys));
    let objective = (&phi_s * &tx - &xs).norm_squared() + (&phi_s * &ty - &ys).norm_squared();
    let unconstrained_objective = segs
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let block = phi_s.view((r.start, i * (p + 1)), (r.len(), p + 1)).into_owned();
            let svd = block.clone().svd(true, true);
            let mut total = 0.0;
            for data in [&xs, &ys] {
                let d = data.rows(r.start, r.len()).into_owned();
                if let Ok(c) = svd.solve(&d, 1e-14) {
                    total += (&block * c - &d).norm_squared();
                }
            }
            total
        })
        .sum();

    let unscale = |t: &DVector<f64>, offset: f64| -> Vec<Vec<f64>> {
        (0..m)
            .map(|i| {
                (0..=p)
                    .map(|k| t[i * (p + 1) + k] * col_scale[i * (p + 1) + k] + if k == 0 { offset } else { 0.0 })
                    .collect()
            })
            .collect()
    };
    let spline = PathSpline {
        m,
        p,
        q,
        coeffs_x: unscale(&tx, cx),
        coeffs_y: unscale(&ty, cy),
    };
    if spline.coeffs_x.iter().chain(&spline.coeffs_y).flatten().any(|c| !c.is_finite()) {
        return Err(Error::SingularFit { cond });
    }
    let joints = spline.joint_mismatches();
    Ok((
        spline,
        FitReport {
            objective,
            unconstrained_objective,
            constraint_residual,
            stationarity_residual,
            condition_estimate: cond,
            method,
            joints,
        },
    ))
}

/// Orthonormal basis of the null space of `g` (all of R^cols when `g` is empty).
fn nullspace(g: &DMatrix<f64>, cols: usize) -> DMatrix<f64> {
    if g.nrows() == 0 {
        return DMatrix::identity(cols, cols);
    }
    let gram = g.transpose() * g;
    let eig = gram.symmetric_eigen();
    let top = eig.eigenvalues.amax();
    let keep: Vec<usize> = (0..cols)
        .filter(|&i| eig.eigenvalues[i] <= 1e-10 * top)
        .collect();
    DMatrix::from_fn(cols, keep.len(), |r, c| eig.eigenvectors[(r, keep[c])])
}

fn stationarity(phi: &DMatrix<f64>, gam: &DMatrix<f64>, theta: &DVector<f64>, data: &DVector<f64>) -> f64 {
    let grad = phi.transpose() * (phi * theta - data) * 2.0;
    if gam.nrows() == 0 {
        return grad.amax();
    }
    // least-squares multipliers: min ‖grad + Γᵀμ‖
    let gt = gam.transpose();
    match gt.clone().svd(true, true).solve(&(-&grad), 1e-14) {
        Ok(mu) => (grad + gt * mu).amax(),
        Err(_) => f64::INFINITY,
    }
}

impl PathSpline {
    /// Mismatch of every derivative order `0..=q` at each interior joint.
    pub fn joint_mismatches(&self) -> Vec<JointMismatch> {
        let mut out = Vec::new();
        for i in 0..self.m.saturating_sub(1) {
            for j in 0..=self.q {
                let l = |c: &[f64]| poly_deriv(c, 1.0, j);
                let r = |c: &[f64]| poly_deriv(c, 0.0, j);
                out.push(JointMismatch {
                    joint: i,
                    order: j,
                    dx: l(&self.coeffs_x[i]) - r(&self.coeffs_x[i + 1]),
                    dy: l(&self.coeffs_y[i]) - r(&self.coeffs_y[i + 1]),
                });
            }
        }
        out
    }

    pub fn start_point(&self) -> (f64, f64) {
        (self.coeffs_x[0][0], self.coeffs_y[0][0])
    }

    pub fn end_point(&self) -> (f64, f64) {
        let last = self.m - 1;
        (self.coeffs_x[last].iter().sum(), self.coeffs_y[last].iter().sum())
    }

    /// Largest coefficient magnitude, used to scale continuity tolerances.
    pub fn coefficient_scale(&self) -> f64 {
        self.coeffs_x
            .iter()
            .chain(&self.coeffs_y)
            .flatten()
            .fold(0.0f64, |m, c| m.max(c.abs()))
    }
}

/// `order`-th derivative of `Σ c_k λ^k` at `lam`, Horner style.
pub(crate) fn poly_deriv(c: &[f64], lam: f64, order: usize) -> f64 {
    let p = c.len() - 1;
    if order > p {
        return 0.0;
    }
    let mut acc = 0.0;
    for k in (order..=p).rev() {
        acc = acc * lam + c[k] * falling_factorial(k, order);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smallest_constraint_matrix() {
        let g = build_constraint_matrix(2, 1, 0);
        assert_eq!(g.shape(), (1, 4));
        assert_eq!(g.row(0).iter().copied().collect::<Vec<_>>(), vec![1.0, 1.0, -1.0, 0.0]);
        assert_eq!(build_constraint_matrix(1, 6, 3).shape(), (0, 7));
        assert_eq!(build_constraint_matrix(4, 6, 3).shape(), (12, 28));
    }

    #[test]
    fn factorial_entries() {
        let g = build_constraint_matrix(2, 6, 3);
        // third derivative row: k!/(k-3)! for k >= 3, then -3! on the next block
        let row: Vec<f64> = g.row(3).iter().copied().collect();
        assert_eq!(&row[..7], &[0.0, 0.0, 0.0, 6.0, 24.0, 60.0, 120.0]);
        assert_eq!(row[7 + 3], -6.0);
    }

    #[test]
    fn horner_derivatives() {
        let c = [0.0, 0.0, 1.0];
        assert_eq!(poly_deriv(&c, 0.5, 1), 1.0);
        assert_eq!(poly_deriv(&c, 0.5, 2), 2.0);
        assert_eq!(poly_deriv(&c, 0.5, 3), 0.0);
    }

    #[test]
    fn rejects_bad_orders() {
        let w = WaypointSet::new((0..10).map(|i| [i as f64, 0.0]).collect()).unwrap();
        assert!(fit_path(&w, 3, 3).is_ok());
        assert!(fit_path(&w, 3, 4).is_err());
    }
}
