//! Proximal operators for every objective term used by the benchmarks, plus
//! the Moreau identity (conjugate prox) and the composition rule for tight
//! frames `A A* = alpha I`.

#[allow(unused_imports)] // inherent float methods win whenever std is linked
use num_traits::Float;
use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::linops::LinOp;
use crate::{Error, Result};

/// A map `v -> prox_{step f}(v)`.
pub trait Prox: Send + Sync {
    fn prox_into(&self, step: f64, v: &[f64], out: &mut [f64]) -> Result<()>;

    fn label(&self) -> String;

    fn prox(&self, step: f64, v: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; v.len()];
        self.prox_into(step, v, &mut out)?;
        Ok(out)
    }
}

/// A closed convex function with an evaluable value and a proximal operator.
pub trait ProxFn: Prox {
    /// `f(x)`; `f64::INFINITY` outside the domain.
    fn value(&self, x: &[f64]) -> f64;

    /// True when `f` is the indicator of a set, so that `prox` is a projection.
    fn is_indicator(&self) -> bool {
        false
    }
}

fn check_step(step: f64, who: &str) -> Result<()> {
    if step > 0.0 && step.is_finite() {
        Ok(())
    } else {
        Err(Error::Parameter(format!("{who}: prox step must be positive, got {step}")))
    }
}

fn check_len(who: &str, expected: usize, v: &[f64], out: &[f64]) -> Result<()> {
    if v.len() != expected {
        return Err(Error::dim(who, expected, v.len()));
    }
    if out.len() != expected {
        return Err(Error::dim(format!("{who} output"), expected, out.len()));
    }
    Ok(())
}

/// `f(x) = ||x - b||^2 / 2`
#[derive(Clone, Debug)]
pub struct SqL2Dist {
    b: Vec<f64>,
}

pub fn sq_l2(b: Vec<f64>) -> SqL2Dist {
    SqL2Dist { b }
}

impl Prox for SqL2Dist {
    fn prox_into(&self, step: f64, v: &[f64], out: &mut [f64]) -> Result<()> {
        check_step(step, "sq_l2")?;
        check_len("sq_l2", self.b.len(), v, out)?;
        let s = 1.0 / (1.0 + step);
        for ((o, vi), bi) in out.iter_mut().zip(v).zip(&self.b) {
            *o = (vi + step * bi) * s;
        }
        Ok(())
    }
    fn label(&self) -> String {
        "0.5*||x - b||^2".into()
    }
}

impl ProxFn for SqL2Dist {
    fn value(&self, x: &[f64]) -> f64 {
        0.5 * crate::vec::dist(x, &self.b).powi(2)
    }
}

/// `f(x) = lambda ||x||_1`
#[derive(Clone, Debug)]
pub struct L1 {
    lambda: f64,
}

pub fn l1(lambda: f64) -> Result<L1> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::Parameter(format!("l1 weight must be positive, got {lambda}")));
    }
    Ok(L1 { lambda })
}

pub fn soft_threshold(v: f64, t: f64) -> f64 {
    v.signum() * (v.abs() - t).max(0.0)
}

impl Prox for L1 {
    fn prox_into(&self, step: f64, v: &[f64], out: &mut [f64]) -> Result<()> {
        check_step(step, "l1")?;
        check_len("l1", v.len(), v, out)?;
        let t = step * self.lambda;
        for (o, vi) in out.iter_mut().zip(v) {
            *o = soft_threshold(*vi, t);
        }
        Ok(())
    }
    fn label(&self) -> String {
        format!("{}*||x||_1", self.lambda)
    }
}

impl ProxFn for L1 {
    fn value(&self, x: &[f64]) -> f64 {
        self.lambda * crate::vec::norm1(x)
    }
}

/// `f(p) = lambda sum_pixels ||p_pixel||_2` for a two-channel field stored
/// channel-major (`p[c * pixels + i]`).
#[derive(Clone, Debug)]
pub struct L21 {
    lambda: f64,
    pixels: usize,
}

pub fn l21(lambda: f64, pixels: usize) -> Result<L21> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::Parameter(format!("l21 weight must be positive, got {lambda}")));
    }
    Ok(L21 { lambda, pixels })
}

impl Prox for L21 {
    fn prox_into(&self, step: f64, v: &[f64], out: &mut [f64]) -> Result<()> {
        check_step(step, "l21")?;
        check_len("l21", 2 * self.pixels, v, out)?;
        let t = step * self.lambda;
        let n = self.pixels;
        for i in 0..n {
            let (a, b) = (v[i], v[n + i]);
            let mag = a.hypot(b);
            let s = if mag > 0.0 { (1.0 - t / mag).max(0.0) } else { 0.0 };
            out[i] = a * s;
            out[n + i] = b * s;
        }
        Ok(())
    }
    fn label(&self) -> String {
        format!("{}*||p||_2,1", self.lambda)
    }
}

impl ProxFn for L21 {
    fn value(&self, x: &[f64]) -> f64 {
        let n = self.pixels;
        self.lambda * (0..n).map(|i| x[i].hypot(x[n + i])).sum::<f64>()
    }
}

/// Indicator of the closed ball `{x : ||x - b|| <= eps}`.
#[derive(Clone, Debug)]
pub struct BallIndicator {
    center: Vec<f64>,
    radius: f64,
}

pub fn ball(center: Vec<f64>, radius: f64) -> Result<BallIndicator> {
    if !(radius >= 0.0 && radius.is_finite()) {
        return Err(Error::Parameter(format!("ball radius must be >= 0, got {radius}")));
    }
    Ok(BallIndicator { center, radius })
}

impl BallIndicator {
    /// Projection onto the ball; independent of any step size.
    pub fn project_into(&self, v: &[f64], out: &mut [f64]) {
        let d = crate::vec::dist(v, &self.center);
        if d <= self.radius {
            out.copy_from_slice(v);
        } else if self.radius == 0.0 {
            out.copy_from_slice(&self.center);
        } else {
            let s = self.radius / d;
            for ((o, vi), bi) in out.iter_mut().zip(v).zip(&self.center) {
                *o = bi + s * (vi - bi);
            }
        }
    }
}

impl Prox for BallIndicator {
    fn prox_into(&self, step: f64, v: &[f64], out: &mut [f64]) -> Result<()> {
        check_step(step, "ball")?;
        check_len("ball", self.center.len(), v, out)?;
        self.project_into(v, out);
        Ok(())
    }
    fn label(&self) -> String {
        format!("indicator(||x - b|| <= {})", self.radius)
    }
}

impl ProxFn for BallIndicator {
    fn value(&self, x: &[f64]) -> f64 {
        let d = crate::vec::dist(x, &self.center);
        let slack = 1e-9 * (self.radius + crate::vec::norm(&self.center)) + 1e-12;
        if d <= self.radius + slack {
            0.0
        } else {
            f64::INFINITY
        }
    }
    fn is_indicator(&self) -> bool {
        true
    }
}

/// The zero function; its prox is the identity.
#[derive(Clone, Copy, Debug, Default)]
pub struct ZeroFn;

impl Prox for ZeroFn {
    fn prox_into(&self, step: f64, v: &[f64], out: &mut [f64]) -> Result<()> {
        check_step(step, "zero")?;
        check_len("zero", v.len(), v, out)?;
        out.copy_from_slice(v);
        Ok(())
    }
    fn label(&self) -> String {
        "0".into()
    }
}

impl ProxFn for ZeroFn {
    fn value(&self, _: &[f64]) -> f64 {
        0.0
    }
}

/// `prox_{step f*}(v) = v - step * prox_{f/step}(v / step)`.
pub fn conjugate_prox(p: &dyn Prox, step: f64, v: &[f64], out: &mut [f64]) -> Result<()> {
    check_step(step, "conjugate")?;
    let scaled: Vec<f64> = v.iter().map(|x| x / step).collect();
    p.prox_into(1.0 / step, &scaled, out)?;
    for (o, vi) in out.iter_mut().zip(v) {
        *o = vi - step * *o;
    }
    Ok(())
}

/// Prox of the Fenchel conjugate of a wrapped function, via Moreau.
#[derive(Clone)]
pub struct Conjugate(pub Arc<dyn ProxFn>);

impl Prox for Conjugate {
    fn prox_into(&self, step: f64, v: &[f64], out: &mut [f64]) -> Result<()> {
        conjugate_prox(&*self.0, step, v, out)
    }
    fn label(&self) -> String {
        format!("({})*", self.0.label())
    }
}

/// `g(x) = f(A x)` for `A A* = alpha I`, with
/// `prox_{step g}(x) = x + A*(prox_{alpha step f}(Ax) - Ax) / alpha`.
#[derive(Clone)]
pub struct ComposedProx {
    inner: Arc<dyn ProxFn>,
    op: LinOp,
    alpha: f64,
}

const TIGHT_FRAME_PROBES: usize = 8;
const TIGHT_FRAME_TOL: f64 = 1e-8;

/// Builds `f ∘ A`, verifying `A A* = alpha I` on random probes.
pub fn prox_composed(inner: Arc<dyn ProxFn>, op: LinOp, alpha: f64) -> Result<ComposedProx> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::Parameter(format!("alpha must be positive, got {alpha}")));
    }
    let mut rng = crate::rng::seeded(0x7161_6d65);
    for _ in 0..TIGHT_FRAME_PROBES {
        let v = crate::rng::normal_vec(&mut rng, op.codomain().len());
        let aav = op.apply(&op.adjoint_apply(&v)?)?;
        let err = aav
            .iter()
            .zip(&v)
            .map(|(a, b)| (a - alpha * b).powi(2))
            .sum::<f64>()
            .sqrt();
        if err > TIGHT_FRAME_TOL * alpha * crate::vec::norm(&v) {
            return Err(Error::Construction(format!(
                "A A* != {alpha} I for {} (residual {err:e})",
                op.name()
            )));
        }
    }
    Ok(ComposedProx { inner, op, alpha })
}

impl Prox for ComposedProx {
    fn prox_into(&self, step: f64, v: &[f64], out: &mut [f64]) -> Result<()> {
        check_step(step, "composed")?;
        let av = self.op.apply(v)?;
        let mut p = vec![0.0; av.len()];
        self.inner.prox_into(self.alpha * step, &av, &mut p)?;
        for (pi, ai) in p.iter_mut().zip(&av) {
            *pi = (*pi - ai) / self.alpha;
        }
        self.op.adjoint_into(&p, out)?;
        for (o, vi) in out.iter_mut().zip(v) {
            *o += vi;
        }
        Ok(())
    }
    fn label(&self) -> String {
        format!("({}) ∘ {}", self.inner.label(), self.op.name())
    }
}

impl ProxFn for ComposedProx {
    fn value(&self, x: &[f64]) -> f64 {
        match self.op.apply(x) {
            Ok(ax) => self.inner.value(&ax),
            Err(_) => f64::NAN,
        }
    }
    fn is_indicator(&self) -> bool {
        self.inner.is_indicator()
    }
}
