//! Numerical kernels shared by the rest of the crate: adaptive Gauss-Kronrod
//! quadrature, quadrature across inverse-square-root endpoint singularities,
//! bracketed root refinement, bracketed minimisation and central differences.

use crate::error::{Error, Result};

/// Tolerances for the adaptive quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Maximum number of panels the adaptive scheme may create.
    pub max_subdivisions: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-14,
            max_subdivisions: 60,
        }
    }
}

impl QuadratureConfig {
    pub fn new(rel_tol: f64, abs_tol: f64, max_subdivisions: usize) -> Result<Self> {
        let cfg = Self {
            rel_tol,
            abs_tol,
            max_subdivisions,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0) || !(self.abs_tol > 0.0) || self.max_subdivisions < 4 {
            return Err(Error::InvalidArgument(format!(
                "quadrature config needs rel_tol > 0, abs_tol > 0, max_subdivisions >= 4 (got {self:?})"
            )));
        }
        Ok(())
    }

    /// Same configuration with both tolerances halved.
    pub fn halved(&self) -> Self {
        Self {
            rel_tol: self.rel_tol * 0.5,
            abs_tol: self.abs_tol * 0.5,
            max_subdivisions: self.max_subdivisions,
        }
    }
}

/// Value of an integral together with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

/// Which end of the interval carries the singularity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SingularEnd {
    Lower,
    Upper,
}

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689,
    0.973_906_528_517_171_720_077_964_012_084,
    0.930_157_491_355_708_226_001_207_180_060,
    0.865_063_366_688_984_510_732_096_688_423,
    0.780_817_726_586_416_897_063_717_578_345,
    0.679_409_568_299_024_406_234_327_365_115,
    0.562_757_134_668_604_683_339_000_099_273,
    0.433_395_394_129_247_190_799_265_943_166,
    0.294_392_862_701_460_198_131_126_603_104,
    0.148_874_338_981_631_210_884_826_001_130,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062,
    0.032_558_162_307_964_727_478_818_972_459,
    0.054_755_896_574_351_996_031_381_300_245,
    0.075_039_674_810_919_952_767_043_140_916,
    0.093_125_454_583_697_605_535_065_465_083,
    0.109_387_158_802_297_641_899_210_590_326,
    0.123_491_976_262_065_851_077_208_175_187,
    0.134_709_217_311_473_325_928_054_001_772,
    0.142_775_938_577_060_080_797_094_273_139,
    0.147_739_104_901_338_491_374_841_515_972,
    0.149_445_554_002_916_905_664_936_468_390,
];

// Gauss weights for the odd Kronrod nodes XGK[1], XGK[3], ..., XGK[9].
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893,
    0.149_451_349_150_580_593_145_776_339_658,
    0.219_086_362_515_982_043_995_534_934_228,
    0.269_266_719_309_996_355_091_226_921_569,
    0.295_524_224_714_752_870_173_892_994_651,
];

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn gk21<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Result<Panel> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    if !fc.is_finite() {
        return Err(Error::EvaluationFailed(center));
    }
    let mut kronrod = fc * WGK[10];
    let mut gauss = 0.0;
    let mut abs_sum = fc.abs() * WGK[10];
    let mut samples = [(0.0_f64, 0.0_f64); 10];
    for (j, sample) in samples.iter_mut().enumerate() {
        let dx = half * XGK[j];
        let lo = f(center - dx);
        let hi = f(center + dx);
        if !lo.is_finite() {
            return Err(Error::EvaluationFailed(center - dx));
        }
        if !hi.is_finite() {
            return Err(Error::EvaluationFailed(center + dx));
        }
        kronrod += WGK[j] * (lo + hi);
        abs_sum += WGK[j] * (lo.abs() + hi.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (lo + hi);
        }
        *sample = (lo, hi);
    }
    let mean = 0.5 * kronrod;
    let mut asc = WGK[10] * (fc - mean).abs();
    for (j, (lo, hi)) in samples.iter().enumerate() {
        asc += WGK[j] * ((lo - mean).abs() + (hi - mean).abs());
    }
    let scale = half.abs();
    let value = kronrod * half;
    let abs_sum = abs_sum * scale;
    let asc = asc * scale;
    let mut error = ((kronrod - gauss) * half).abs();
    if asc != 0.0 && error != 0.0 {
        error = asc * (200.0 * error / asc).powf(1.5).min(1.0);
    }
    if abs_sum > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * abs_sum);
    }
    Ok(Panel { a, b, value, error })
}

/// Globally adaptive 21-point Gauss-Kronrod quadrature of a smooth integrand.
pub fn integrate_adaptive<F>(mut f: F, a: f64, b: f64, cfg: &QuadratureConfig) -> Result<Estimate>
where
    F: FnMut(f64) -> f64,
{
    if a == b {
        return Ok(Estimate {
            value: 0.0,
            error: 0.0,
        });
    }
    let mut panels = vec![gk21(&mut f, a, b)?];
    loop {
        let value: f64 = panels.iter().map(|p| p.value).sum();
        let error: f64 = panels.iter().map(|p| p.error).sum();
        if error <= cfg.abs_tol.max(cfg.rel_tol * value.abs()) {
            return Ok(Estimate { value, error });
        }
        if panels.len() >= cfg.max_subdivisions {
            return Err(Error::ToleranceNotReached {
                value,
                error,
                subdivisions: panels.len(),
            });
        }
        let (worst, _) = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .expect("at least one panel");
        let p = panels.swap_remove(worst);
        let mid = 0.5 * (p.a + p.b);
        if mid <= p.a.min(p.b) || mid >= p.a.max(p.b) {
            // panel can no longer be split in floating point
            return Err(Error::ToleranceNotReached {
                value,
                error,
                subdivisions: panels.len() + 1,
            });
        }
        panels.push(gk21(&mut f, p.a, mid)?);
        panels.push(gk21(&mut f, mid, p.b)?);
    }
}

/// Integrates `f` over `[lower, upper]` where `f` diverges like an inverse
/// square root at one end.
///
/// With `x = x_s ∓ t²` the integrand becomes `2 t f(x_s ∓ t²)`, which is
/// smooth in `t` whenever `f(x)·√|x − x_s|` extends continuously to `x_s`.
pub fn integrate_inverse_sqrt_endpoint<F>(
    mut f: F,
    lower: f64,
    upper: f64,
    singular_end: SingularEnd,
    cfg: &QuadratureConfig,
) -> Result<Estimate>
where
    F: FnMut(f64) -> f64,
{
    if !(lower < upper) {
        return Err(Error::InvalidArgument(format!(
            "need lower < upper, got [{lower}, {upper}]"
        )));
    }
    cfg.validate()?;
    let t_max = (upper - lower).sqrt();
    let mut g = |t: f64| {
        let x = match singular_end {
            SingularEnd::Lower => lower + t * t,
            SingularEnd::Upper => upper - t * t,
        };
        2.0 * t * f(x)
    };
    // the transformed integrand must stay bounded as t -> 0; growth by a
    // factor ~10 per decade means at least a 1/t divergence
    let near = g(1e-6 * t_max);
    let nearer = g(1e-7 * t_max);
    if !near.is_finite() || !nearer.is_finite() || nearer.abs() > 9.5 * near.abs() + f64::MIN_POSITIVE {
        let x_s = match singular_end {
            SingularEnd::Lower => lower,
            SingularEnd::Upper => upper,
        };
        return Err(Error::NonIntegrable(x_s));
    }
    integrate_adaptive(g, 0.0, t_max, cfg)
}

/// Tolerances for bracketed root finding.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootConfig {
    /// Relative bracket width at termination.
    pub x_rel: f64,
    /// Length scale the relative width refers to, in addition to `|x|`.
    pub scale: f64,
    pub max_iter: usize,
}

impl Default for RootConfig {
    fn default() -> Self {
        Self {
            x_rel: 1e-13,
            scale: 1.0,
            max_iter: 200,
        }
    }
}

impl RootConfig {
    pub fn with_scale(scale: f64) -> Self {
        Self {
            scale,
            ..Self::default()
        }
    }
}

/// Brent's method on a sign-changing bracket.
pub fn find_root_bracketed<G>(mut g: G, bracket: (f64, f64), cfg: &RootConfig) -> Result<f64>
where
    G: FnMut(f64) -> f64,
{
    let (mut a, mut b) = bracket;
    let mut fa = g(a);
    let mut fb = g(b);
    if fa.is_nan() {
        return Err(Error::EvaluationFailed(a));
    }
    if fb.is_nan() {
        return Err(Error::EvaluationFailed(b));
    }
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::NoSignChange { lo: a, hi: b });
    }
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;
    for _ in 0..cfg.max_iter {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 0.5 * cfg.x_rel * b.abs().max(cfg.scale) + 2.0 * f64::EPSILON * b.abs();
        let m = 0.5 * (c - b);
        if m.abs() <= tol || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(m) };
        fb = g(b);
        if fb.is_nan() {
            return Err(Error::EvaluationFailed(b));
        }
    }
    Err(Error::ConvergenceFailure(format!(
        "Brent iteration limit reached near x = {b}"
    )))
}

/// Brent minimisation of `g` on `[a, b]`; returns `(x_min, g(x_min))`.
pub fn minimize_bracketed<G>(mut g: G, a: f64, b: f64, x_rel: f64) -> (f64, f64)
where
    G: FnMut(f64) -> f64,
{
    const GOLD: f64 = 0.381_966_011_250_105_1;
    let (mut a, mut b) = if a < b { (a, b) } else { (b, a) };
    let mut x = a + GOLD * (b - a);
    let mut w = x;
    let mut v = x;
    let mut fx = g(x);
    let mut fw = fx;
    let mut fv = fx;
    let mut d: f64 = 0.0;
    let mut e: f64 = 0.0;
    let scale = (b - a).abs();
    for _ in 0..200 {
        let xm = 0.5 * (a + b);
        let tol1 = x_rel * scale + 1e-300;
        let tol2 = 2.0 * tol1;
        if (x - xm).abs() <= tol2 - 0.5 * (b - a) {
            break;
        }
        let mut golden = true;
        if e.abs() > tol1 {
            let r = (x - w) * (fx - fv);
            let mut q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if q > 0.0 {
                p = -p;
            }
            q = q.abs();
            let etemp = e;
            e = d;
            if p.abs() < (0.5 * q * etemp).abs() && p > q * (a - x) && p < q * (b - x) {
                d = p / q;
                let u = x + d;
                if u - a < tol2 || b - u < tol2 {
                    d = tol1.copysign(xm - x);
                }
                golden = false;
            }
        }
        if golden {
            e = if x >= xm { a - x } else { b - x };
            d = GOLD * e;
        }
        let u = if d.abs() >= tol1 {
            x + d
        } else {
            x + tol1.copysign(d)
        };
        let fu = g(u);
        if fu <= fx {
            if u >= x {
                a = x;
            } else {
                b = x;
            }
            v = w;
            fv = fw;
            w = x;
            fw = fx;
            x = u;
            fx = fu;
        } else {
            if u < x {
                a = u;
            } else {
                b = u;
            }
            if fu <= fw || w == x {
                v = w;
                fv = fw;
                w = u;
                fw = fu;
            } else if fu <= fv || v == x || v == w {
                v = u;
                fv = fu;
            }
        }
    }
    (x, fx)
}

/// Step used by [`derivative_central`]: `max(1e-6, 1e-6·|x|)·scale`.
pub fn central_step(x: f64, scale: f64) -> f64 {
    1e-6_f64.max(1e-6 * x.abs()) * scale
}

/// Five-point central difference with one Richardson extrapolation step.
///
/// Evaluates `g` on `[x − 2h, x + 2h]` with `h` from [`central_step`].
pub fn derivative_central<G>(mut g: G, x: f64, scale: f64) -> Result<f64>
where
    G: FnMut(f64) -> Result<f64>,
{
    let h = central_step(x, scale);
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::InvalidArgument(format!("bad difference step {h}")));
    }
    let mut five_point = |h: f64| -> Result<f64> {
        let f2p = g(x + 2.0 * h)?;
        let f1p = g(x + h)?;
        let f1m = g(x - h)?;
        let f2m = g(x - 2.0 * h)?;
        Ok((f2m - 8.0 * f1m + 8.0 * f1p - f2p) / (12.0 * h))
    };
    let coarse = five_point(h)?;
    let fine = five_point(0.5 * h)?;
    let d = (16.0 * fine - coarse) / 15.0;
    if d.is_finite() {
        Ok(d)
    } else {
        Err(Error::EvaluationFailed(x))
    }
}
