//! Nelder–Mead simplex minimization with the standard coefficients
//! (reflection 1, expansion 2, contraction 1/2, shrink 1/2).

#[derive(Debug, Clone, Copy)]
pub(crate) struct SimplexOptions {
    /// Largest vertex distance from the best vertex, per coordinate.
    pub xtol: f64,
    /// Spread of objective values over the simplex, relative to `1 + |best|`.
    pub ftol: f64,
    pub max_evals: usize,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self { xtol: 1e-8, ftol: 1e-10, max_evals: 2000 }
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct SimplexResult<const N: usize> {
    pub x: [f64; N],
    pub value: f64,
    pub converged: bool,
    #[cfg_attr(not(test), allow(dead_code))]
    pub evals: usize,
}

/// Minimize `f` from `start`, with the initial simplex spanned by `step`
/// along each axis. Non-finite objective values count as `+∞`.
pub(crate) fn minimize<const N: usize, F>(
    f: F,
    start: [f64; N],
    step: [f64; N],
    opts: SimplexOptions,
) -> SimplexResult<N>
where
    F: Fn(&[f64; N]) -> f64,
{
    let evals = std::cell::Cell::new(0usize);
    let eval = |x: &[f64; N]| {
        evals.set(evals.get() + 1);
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };

    let mut simplex: Vec<([f64; N], f64)> = Vec::with_capacity(N + 1);
    simplex.push((start, eval(&start)));
    for i in 0..N {
        let mut x = start;
        x[i] += step[i];
        let v = eval(&x);
        simplex.push((x, v));
    }

    let mut converged = false;
    loop {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let (best, worst) = (simplex[0].1, simplex[N].1);
        let size = simplex[1..]
            .iter()
            .flat_map(|(x, _)| x.iter().zip(simplex[0].0.iter()).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        if size <= opts.xtol && (worst - best).abs() <= opts.ftol * (1.0 + best.abs()) {
            converged = true;
            break;
        }
        if evals.get() >= opts.max_evals {
            break;
        }

        let mut centroid = [0.0; N];
        for (x, _) in &simplex[..N] {
            for (c, xi) in centroid.iter_mut().zip(x) {
                *c += xi / N as f64;
            }
        }
        let along = |t: f64| {
            let mut y = [0.0; N];
            for i in 0..N {
                y[i] = centroid[i] + t * (simplex[N].0[i] - centroid[i]);
            }
            y
        };

        let reflected = along(-1.0);
        let fr = eval(&reflected);
        if fr < best {
            let expanded = along(-2.0);
            let fe = eval(&expanded);
            simplex[N] = if fe < fr { (expanded, fe) } else { (reflected, fr) };
            continue;
        }
        if fr < simplex[N - 1].1 {
            simplex[N] = (reflected, fr);
            continue;
        }
        // contraction, outside if the reflection improved on the worst point
        let (contracted, limit) = if fr < worst { (along(-0.5), fr) } else { (along(0.5), worst) };
        let fc = eval(&contracted);
        if fc < limit {
            simplex[N] = (contracted, fc);
            continue;
        }
        let anchor = simplex[0].0;
        for (x, v) in simplex.iter_mut().skip(1) {
            for i in 0..N {
                x[i] = anchor[i] + 0.5 * (x[i] - anchor[i]);
            }
            *v = eval(x);
        }
    }

    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    SimplexResult { x: simplex[0].0, value: simplex[0].1, converged, evals: evals.get() }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rosenbrock() {
        let f = |x: &[f64; 2]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let opts = SimplexOptions { xtol: 1e-10, ftol: 1e-16, max_evals: 5000 };
        let r = minimize(f, [-1.2, 1.0], [0.1, 0.1], opts);
        assert!(r.converged);
        assert!((r.x[0] - 1.0).abs() < 1e-6 && (r.x[1] - 1.0).abs() < 1e-6, "{:?}", r.x);
    }

    #[test]
    fn quadratic_three_dims() {
        let f = |x: &[f64; 3]| (x[0] - 1.0).powi(2) + 3.0 * (x[1] + 2.0).powi(2) + 0.5 * (x[2] - 0.5).powi(2);
        let r = minimize(f, [0.0; 3], [0.5; 3], SimplexOptions::default());
        assert!(r.converged);
        for (got, want) in r.x.iter().zip([1.0, -2.0, 0.5]) {
            assert!((got - want).abs() < 1e-6);
        }
    }

    #[test]
    fn infeasible_region_is_avoided() {
        let f = |x: &[f64; 1]| if x[0] < 0.0 { f64::NAN } else { (x[0] - 0.1).powi(2) };
        let r = minimize(f, [1.0], [-2.0], SimplexOptions::default());
        assert!((r.x[0] - 0.1).abs() < 1e-6);
    }

    #[test]
    fn budget_is_respected() {
        let f = |x: &[f64; 2]| x[0].abs() + x[1].abs();
        let opts = SimplexOptions { max_evals: 20, ..SimplexOptions::default() };
        let r = minimize(f, [5.0, 5.0], [1.0, 1.0], opts);
        assert!(!r.converged);
        assert!(r.evals <= 20 + 3);
    }
}
