//! Damped Newton iteration for small square systems with a forward-difference
//! Jacobian.

use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum NewtonStatus {
    Converged,
    /// Iteration budget spent or no descent direction found.
    Stalled,
    /// The residual could not be evaluated at the starting point.
    Undefined,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct NewtonResult<const N: usize> {
    pub x: [f64; N],
    pub residual: [f64; N],
    pub status: NewtonStatus,
}

pub(crate) struct NewtonOptions<const N: usize> {
    pub max_iter: usize,
    pub tol: f64,
    pub max_halvings: usize,
    /// Finite-difference step per coordinate given the current point.
    pub step: fn(&[f64; N]) -> [f64; N],
}

pub(crate) fn norm<const N: usize>(r: &[f64; N]) -> f64 {
    r.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Solve `F(x) = 0` from `x0`. Residual evaluation errors inside a line
/// search are treated as an infinite residual, so the step is shortened.
pub(crate) fn solve<const N: usize, F>(f: F, x0: [f64; N], opts: &NewtonOptions<N>) -> NewtonResult<N>
where
    F: Fn(&[f64; N]) -> Result<[f64; N]>,
{
    let finite = |r: &Result<[f64; N]>| matches!(r, Ok(v) if v.iter().all(|c| c.is_finite()));
    let first = f(&x0);
    if !finite(&first) {
        return NewtonResult { x: x0, residual: [f64::NAN; N], status: NewtonStatus::Undefined };
    }
    let (mut x, mut r) = (x0, first.unwrap());
    let mut rn = norm(&r);

    for _ in 0..opts.max_iter {
        if rn <= opts.tol {
            return NewtonResult { x, residual: r, status: NewtonStatus::Converged };
        }
        let h = (opts.step)(&x);
        let mut jac = [[0.0; N]; N];
        let mut ok = true;
        for j in 0..N {
            let mut xp = x;
            xp[j] += h[j];
            match f(&xp) {
                Ok(rp) if rp.iter().all(|c| c.is_finite()) => {
                    for i in 0..N {
                        jac[i][j] = (rp[i] - r[i]) / h[j];
                    }
                }
                _ => ok = false,
            }
        }
        let Some(dx) = ok.then(|| linear_solve(jac, r.map(|v| -v))).flatten() else {
            break;
        };

        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..=opts.max_halvings {
            let mut trial = x;
            for i in 0..N {
                trial[i] += t * dx[i];
            }
            if let Ok(rt) = f(&trial) {
                let tn = norm(&rt);
                if tn.is_finite() && tn < rn {
                    (x, r, rn) = (trial, rt, tn);
                    accepted = true;
                    break;
                }
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    let status = if rn <= opts.tol { NewtonStatus::Converged } else { NewtonStatus::Stalled };
    NewtonResult { x, residual: r, status }
}

/// Gaussian elimination with partial pivoting; `None` when singular.
pub(crate) fn linear_solve<const N: usize>(mut a: [[f64; N]; N], mut b: [f64; N]) -> Option<[f64; N]> {
    for col in 0..N {
        let pivot = (col..N).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if !(a[pivot][col].abs() > 0.0) {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..N {
            let factor = a[row][col] / a[col][col];
            for k in col..N {
                a[row][k] -= factor * a[col][k];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = [0.0; N];
    for row in (0..N).rev() {
        let tail: f64 = (row + 1..N).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - tail) / a[row][row];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}
