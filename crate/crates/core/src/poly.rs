//! Dense real polynomials stored with descending powers, `[c_n, ..., c_1, c_0]`.

use nalgebra::DMatrix;
use num_complex::Complex64;

pub fn eval(p: &[f64], x: f64) -> f64 {
    p.iter().fold(0.0, |acc, &c| acc * x + c)
}

pub fn eval_complex(p: &[f64], s: Complex64) -> Complex64 {
    p.iter().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * s + c)
}

pub fn mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Sum with right-aligned powers.
pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    let n = a.len().max(b.len());
    let mut out = vec![0.0; n];
    for (i, &x) in a.iter().enumerate() {
        out[n - a.len() + i] += x;
    }
    for (i, &x) in b.iter().enumerate() {
        out[n - b.len() + i] += x;
    }
    out
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    add(a, &scale(b, -1.0))
}

pub fn scale(a: &[f64], k: f64) -> Vec<f64> {
    a.iter().map(|c| c * k).collect()
}

pub fn derivative(p: &[f64]) -> Vec<f64> {
    let n = p.len();
    if n <= 1 {
        return vec![0.0];
    }
    p[..n - 1]
        .iter()
        .enumerate()
        .map(|(i, &c)| c * (n - 1 - i) as f64)
        .collect()
}

/// Drops leading coefficients with magnitude `<= tol * max|c|`. Keeps at least one entry.
pub fn trim_leading(p: &[f64], tol: f64) -> Vec<f64> {
    let big = p.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    let first = p.iter().position(|c| c.abs() > tol * big);
    match first {
        Some(i) => p[i..].to_vec(),
        None => vec![0.0],
    }
}

pub fn degree(p: &[f64]) -> usize {
    p.iter().position(|&c| c != 0.0).map_or(0, |i| p.len() - 1 - i)
}

/// `q(t) = p(t + a)` by repeated synthetic division.
pub fn taylor_shift(p: &[f64], a: f64) -> Vec<f64> {
    let mut c = p.to_vec();
    let n = c.len();
    for i in 0..n {
        for j in 1..n - i {
            c[j] += a * c[j - 1];
        }
    }
    c
}

/// Routh test: true iff every root of `p` lies strictly in the open left half
/// plane. Any zero in the first column counts as failure.
pub fn is_hurwitz(p: &[f64]) -> bool {
    let lead = match p.iter().position(|&c| c != 0.0) {
        Some(i) => i,
        None => return false,
    };
    let p = &p[lead..];
    let sign = p[0].signum();
    if p.iter().any(|&c| !(c * sign > 0.0)) {
        return false;
    }
    let n = p.len();
    let mut r0: Vec<f64> = p.iter().step_by(2).map(|c| c * sign).collect();
    let mut r1: Vec<f64> = p.iter().skip(1).step_by(2).map(|c| c * sign).collect();
    for _ in 2..n {
        if !(r1[0] > 0.0) {
            return false;
        }
        let next: Vec<f64> = (0..r0.len().saturating_sub(1))
            .map(|k| r0[k + 1] - r0[0] * r1.get(k + 1).copied().unwrap_or(0.0) / r1[0])
            .collect();
        r0 = std::mem::replace(&mut r1, next);
        if r1.is_empty() {
            return true;
        }
    }
    r1.first().map_or(true, |&v| v > 0.0)
}

/// Roots of `p` from the eigenvalues of its balanced companion matrix, each
/// polished by a couple of Newton steps on the original coefficients.
pub fn roots(p: &[f64]) -> Vec<Complex64> {
    let lead = match p.iter().position(|&c| c != 0.0) {
        Some(i) => i,
        None => return Vec::new(),
    };
    let p = &p[lead..];
    let zeros_at_origin = p.iter().rev().take_while(|&&c| c == 0.0).count();
    let core = &p[..p.len() - zeros_at_origin];
    let mut out = vec![Complex64::new(0.0, 0.0); zeros_at_origin];
    let n = core.len() - 1;
    if n == 0 {
        return out;
    }
    if n == 1 {
        out.push(Complex64::new(-core[1] / core[0], 0.0));
        return out;
    }
    let mut c = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        c[(0, j)] = -core[j + 1] / core[0];
    }
    for i in 1..n {
        c[(i, i - 1)] = 1.0;
    }
    balance(&mut c);
    let d = derivative(core);
    for z in c.complex_eigenvalues().iter() {
        out.push(polish(core, &d, *z));
    }
    out
}

fn polish(p: &[f64], d: &[f64], mut z: Complex64) -> Complex64 {
    let mut fz = eval_complex(p, z).norm();
    for _ in 0..3 {
        let dp = eval_complex(d, z);
        if dp.norm() == 0.0 {
            break;
        }
        let cand = z - eval_complex(p, z) / dp;
        let fc = eval_complex(p, cand).norm();
        if !(fc < fz) {
            break;
        }
        z = cand;
        fz = fc;
    }
    z
}

/// Diagonal similarity scaling by powers of two so that row and column norms match.
fn balance(a: &mut DMatrix<f64>) {
    let n = a.nrows();
    let mut done = false;
    while !done {
        done = true;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += a[(j, i)].abs();
                    r += a[(i, j)].abs();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut g = r / 2.0;
            while c < g {
                f *= 2.0;
                c *= 4.0;
            }
            g = r * 2.0;
            while c > g {
                f /= 2.0;
                c /= 4.0;
            }
            if (c + r) / f < 0.95 * s {
                done = false;
                for j in 0..n {
                    a[(i, j)] /= f;
                    a[(j, i)] *= f;
                }
            }
        }
    }
}
