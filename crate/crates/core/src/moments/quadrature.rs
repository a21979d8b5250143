//! Adaptive Gauss–Kronrod (10/21) quadrature over finite and infinite
//! intervals, for scalar and small fixed-size vector integrands.
//!
//! Infinite ranges are mapped onto bounded ones: `x = c + s·u/(1-u²)` on
//! `(-1, 1)` for the whole line, `x = a + s·u/(1-u)` on `[0, 1)` for a
//! half-line. The interval with the largest error estimate is bisected
//! until the summed error meets the tolerance or the subdivision budget runs
//! out.

use crate::error::{Result, TsnError};
use crate::sn_core::TruncationWindow;

/// Kronrod abscissae on `[0, 1]`, outermost first; the last entry is the
/// centre. Odd positions (1, 3, ...) are the 10-point Gauss nodes.
#[allow(clippy::excessive_precision)]
pub(crate) const KRONROD21_NODES: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

#[allow(clippy::excessive_precision)]
pub(crate) const KRONROD21_WEIGHTS: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

/// Gauss weights for the nodes `KRONROD21_NODES[1], [3], ..., [9]`.
#[allow(clippy::excessive_precision)]
const GAUSS10_WEIGHTS: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// Stopping rule for [`integrate_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub rel: f64,
    pub abs: f64,
    pub max_subdivisions: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self { rel: 1e-10, abs: 0.0, max_subdivisions: 200 }
    }
}

/// Where to centre and how to stretch the map of an infinite range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scaling {
    pub center: f64,
    pub scale: f64,
}

impl Default for Scaling {
    fn default() -> Self {
        Self { center: 0.0, scale: 1.0 }
    }
}

/// Integrate `f` over the window with the default tolerance
/// (relative `1e-10`, at most 200 subdivisions).
///
/// ```
/// use tsn::{integrate, std_normal_pdf, TruncationWindow};
/// let whole = integrate(std_normal_pdf, TruncationWindow::unbounded()).unwrap();
/// assert!((whole - 1.0).abs() < 1e-12);
/// let half = integrate(std_normal_pdf, TruncationWindow::new(0.0, f64::INFINITY).unwrap()).unwrap();
/// assert!((half - 0.5).abs() < 1e-12);
/// ```
pub fn integrate<F>(f: F, window: TruncationWindow) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let scaling = Scaling { center: window.finite_anchor(), scale: 1.0 };
    integrate_with(|x| [f(x)], window.lower(), window.upper(), scaling, Tolerance::default()).map(|[v]| v)
}

/// Integrate a vector-valued function over `[lower, upper]`.
///
/// The tolerance applies to every component relative to the largest
/// component magnitude, so components that integrate to (nearly) zero do not
/// stall the refinement.
pub fn integrate_with<const N: usize, F>(
    f: F,
    lower: f64,
    upper: f64,
    scaling: Scaling,
    tol: Tolerance,
) -> Result<[f64; N]>
where
    F: Fn(f64) -> [f64; N],
{
    if lower.is_nan() || upper.is_nan() {
        return Err(TsnError::InvalidArgument("NaN integration bound".into()));
    }
    if lower == upper {
        return Ok([0.0; N]);
    }
    if lower > upper {
        let mut v = integrate_with(f, upper, lower, scaling, tol)?;
        v.iter_mut().for_each(|x| *x = -*x);
        return Ok(v);
    }

    let Scaling { center, scale } = scaling;
    match (lower.is_finite(), upper.is_finite()) {
        (true, true) => adapt(&f, &[(lower, upper)], tol),
        (true, false) => {
            let g = |u: f64| {
                let om = 1.0 - u;
                let x = lower + scale * u / om;
                weighted(&f, x, scale / (om * om))
            };
            adapt(&g, &split(0.0, 1.0, 4), tol)
        }
        (false, true) => {
            let g = |u: f64| {
                let om = 1.0 - u;
                let x = upper - scale * u / om;
                weighted(&f, x, scale / (om * om))
            };
            adapt(&g, &split(0.0, 1.0, 4), tol)
        }
        (false, false) => {
            let g = |u: f64| {
                let om = 1.0 - u * u;
                let x = center + scale * u / om;
                weighted(&f, x, scale * (1.0 + u * u) / (om * om))
            };
            adapt(&g, &split(-1.0, 1.0, 8), tol)
        }
    }
}

#[inline]
fn weighted<const N: usize, F: Fn(f64) -> [f64; N]>(f: &F, x: f64, jacobian: f64) -> [f64; N] {
    if !x.is_finite() || !jacobian.is_finite() {
        return [0.0; N];
    }
    let mut v = f(x);
    for c in v.iter_mut() {
        *c *= jacobian;
    }
    v
}

fn split(a: f64, b: f64, pieces: usize) -> Vec<(f64, f64)> {
    let w = (b - a) / pieces as f64;
    (0..pieces).map(|i| (a + i as f64 * w, if i + 1 == pieces { b } else { a + (i + 1) as f64 * w })).collect()
}

struct Segment<const N: usize> {
    a: f64,
    b: f64,
    value: [f64; N],
    error: [f64; N],
}

impl<const N: usize> Segment<N> {
    fn worst(&self) -> f64 {
        self.error.iter().copied().fold(0.0, f64::max)
    }
}

fn adapt<const N: usize, F>(f: &F, initial: &[(f64, f64)], tol: Tolerance) -> Result<[f64; N]>
where
    F: Fn(f64) -> [f64; N],
{
    let mut segments: Vec<Segment<N>> = initial
        .iter()
        .map(|&(a, b)| {
            let (value, error) = kronrod21(f, a, b);
            Segment { a, b, value, error }
        })
        .collect();

    loop {
        let mut total = [0.0; N];
        let mut error = [0.0; N];
        for s in &segments {
            for k in 0..N {
                total[k] += s.value[k];
                error[k] += s.error[k];
            }
        }
        let magnitude = total.iter().map(|v| v.abs()).fold(0.0, f64::max);
        let allowed = tol.abs.max(tol.rel * magnitude);
        let worst_component = error.iter().copied().fold(0.0, f64::max);
        if worst_component <= allowed {
            return Ok(total);
        }
        if segments.len() >= tol.max_subdivisions {
            return Err(TsnError::QuadratureNotConverged { subdivisions: segments.len(), error: worst_component });
        }

        let idx = segments
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.worst().total_cmp(&y.1.worst()))
            .map(|(i, _)| i)
            .expect("non-empty segment list");
        let seg = segments.swap_remove(idx);
        let mid = 0.5 * (seg.a + seg.b);
        if !(mid > seg.a && mid < seg.b) {
            // Interval can no longer be split in floating point.
            return Err(TsnError::QuadratureNotConverged { subdivisions: segments.len() + 1, error: worst_component });
        }
        for (a, b) in [(seg.a, mid), (mid, seg.b)] {
            let (value, error) = kronrod21(f, a, b);
            segments.push(Segment { a, b, value, error });
        }
    }
}

/// One 21-point Kronrod panel with a QUADPACK-style error estimate per
/// component.
fn kronrod21<const N: usize, F>(f: &F, a: f64, b: f64) -> ([f64; N], [f64; N])
where
    F: Fn(f64) -> [f64; N],
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);

    let mut fv_lo = [[0.0; N]; 10];
    let mut fv_hi = [[0.0; N]; 10];
    let fc = f(center);

    let mut kronrod = [0.0; N];
    let mut gauss = [0.0; N];
    let mut res_abs = [0.0; N];
    for k in 0..N {
        kronrod[k] = KRONROD21_WEIGHTS[10] * fc[k];
        res_abs[k] = kronrod[k].abs();
    }
    for j in 0..10 {
        let dx = half * KRONROD21_NODES[j];
        let lo = f(center - dx);
        let hi = f(center + dx);
        for k in 0..N {
            kronrod[k] += KRONROD21_WEIGHTS[j] * (lo[k] + hi[k]);
            res_abs[k] += KRONROD21_WEIGHTS[j] * (lo[k].abs() + hi[k].abs());
            if j % 2 == 1 {
                gauss[k] += GAUSS10_WEIGHTS[j / 2] * (lo[k] + hi[k]);
            }
        }
        fv_lo[j] = lo;
        fv_hi[j] = hi;
    }

    let mut value = [0.0; N];
    let mut error = [0.0; N];
    for k in 0..N {
        let mean = 0.5 * kronrod[k];
        let mut res_asc = KRONROD21_WEIGHTS[10] * (fc[k] - mean).abs();
        for j in 0..10 {
            res_asc += KRONROD21_WEIGHTS[j] * ((fv_lo[j][k] - mean).abs() + (fv_hi[j][k] - mean).abs());
        }
        value[k] = kronrod[k] * half;
        error[k] = rescale_error((kronrod[k] - gauss[k]) * half, res_abs[k] * half.abs(), res_asc * half.abs());
    }
    (value, error)
}

fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut scaled = err.abs();
    if res_asc != 0.0 && scaled != 0.0 {
        let factor = (200.0 * scaled / res_asc).powf(1.5);
        scaled = if factor < 1.0 { res_asc * factor } else { res_asc };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        scaled = scaled.max(50.0 * f64::EPSILON * res_abs);
    }
    scaled
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    #[test]
    fn rule_weights_are_consistent() {
        let k: f64 = 2.0 * KRONROD21_WEIGHTS[..10].iter().sum::<f64>() + KRONROD21_WEIGHTS[10];
        let g: f64 = 2.0 * GAUSS10_WEIGHTS.iter().sum::<f64>();
        assert_abs_diff_eq!(k, 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(g, 2.0, epsilon = 1e-15);
    }

    #[test]
    fn kronrod_is_exact_for_high_degree_polynomials() {
        // degree 30 monomial on [0, 1]
        let ([v], _) = kronrod21(&|x: f64| [x.powi(30)], 0.0, 1.0);
        assert_abs_diff_eq!(v, 1.0 / 31.0, epsilon = 1e-15);
    }

    #[test]
    fn gaussian_integrals() {
        let phi = |x: f64| (-0.5 * x * x).exp() / (2.0 * PI).sqrt();
        let cases = [
            (f64::NEG_INFINITY, f64::INFINITY, 1.0),
            (0.0, f64::INFINITY, 0.5),
            (f64::NEG_INFINITY, 0.0, 0.5),
            (-1.0, 1.0, 0.682_689_492_137_085_9),
        ];
        for (lo, hi, want) in cases {
            let got = integrate_with(|x| [phi(x)], lo, hi, Scaling::default(), Tolerance::default()).unwrap()[0];
            assert_abs_diff_eq!(got, want, epsilon = 1e-12);
        }
    }

    #[test]
    fn vector_components_share_nodes() {
        let [m0, m1, m2] = integrate_with(
            |x: f64| {
                let p = (-0.5 * x * x).exp() / (2.0 * PI).sqrt();
                [p, x * p, x * x * p]
            },
            f64::NEG_INFINITY,
            f64::INFINITY,
            Scaling::default(),
            Tolerance::default(),
        )
        .unwrap();
        assert_abs_diff_eq!(m0, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(m1, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(m2, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn reversed_and_empty_ranges() {
        let f = |x: f64| [x];
        assert_eq!(integrate_with(f, 1.0, 1.0, Scaling::default(), Tolerance::default()).unwrap(), [0.0]);
        let v = integrate_with(f, 2.0, 0.0, Scaling::default(), Tolerance::default()).unwrap()[0];
        assert_abs_diff_eq!(v, -2.0, epsilon = 1e-14);
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let tol = Tolerance { rel: 1e-14, abs: 0.0, max_subdivisions: 3 };
        let err = integrate_with(|x: f64| [(1.0 / x).sin()], 1e-4, 1.0, Scaling::default(), tol).unwrap_err();
        assert!(matches!(err, TsnError::QuadratureNotConverged { .. }));
    }

    #[test]
    fn shifted_scaled_map() {
        // narrow bump far from the origin
        let f = |x: f64| [(-0.5 * ((x - 100.0) / 0.01).powi(2)).exp() / (0.01 * (2.0 * PI).sqrt())];
        let s = Scaling { center: 100.0, scale: 0.01 };
        let v = integrate_with(f, f64::NEG_INFINITY, f64::INFINITY, s, Tolerance::default()).unwrap()[0];
        assert_abs_diff_eq!(v, 1.0, epsilon = 1e-10);
    }
}
