use alloc::format;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)] // inherent float methods win whenever std is linked
use num_traits::Float;
use num_complex::Complex64;
use rand::Rng;

use super::{params, validate, ProblemInstance, ProblemKind};
use crate::bsplit::{build_mri_b, homodyne_theta, HomodyneSpec};
use crate::linops::{default_levels, dft2_unitary, idft2_unitary, selection, zero_fill, LinOp};
use crate::prox::{ball, l1, prox_composed};
use crate::solvers::SaddleProblem;
use crate::{Error, Result};

/// Binary k-space sampling pattern on an `n x m` grid in natural FFT order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SamplingMask {
    pub rows: usize,
    pub cols: usize,
    pub bits: Vec<bool>,
}

impl SamplingMask {
    pub fn full(rows: usize, cols: usize) -> Self {
        SamplingMask { rows, cols, bits: vec![true; rows * cols] }
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }

    /// Fraction of collected entries.
    pub fn burden(&self) -> f64 {
        self.count() as f64 / self.bits.len() as f64
    }

    pub fn and(&self, other: &SamplingMask) -> SamplingMask {
        SamplingMask {
            rows: self.rows,
            cols: self.cols,
            bits: self.bits.iter().zip(&other.bits).map(|(a, b)| *a && *b).collect(),
        }
    }

    /// Mask image with the zero frequency moved to the centre.
    pub fn centered(&self) -> Vec<bool> {
        let (n, m) = (self.rows, self.cols);
        let mut out = vec![false; n * m];
        for i in 0..n {
            for j in 0..m {
                out[centered_row(i, n) * m + centered_row(j, m)] = self.bits[i * m + j];
            }
        }
        out
    }
}

/// Row position of FFT index `u` once the zero frequency is moved to `n / 2`.
pub fn centered_row(u: usize, n: usize) -> usize {
    (u + n / 2) % n
}

fn signed_freq(u: usize, n: usize) -> i64 {
    centered_row(u, n) as i64 - (n / 2) as i64
}

/// Number of centred rows in the top `nu` portion.
fn top_rows(n: usize, nu: f64) -> usize {
    ((nu * n as f64 - 1e-9).ceil() as usize).min(n)
}

/// Half-height `h` of the symmetric band: rows with `|s| <= h - 1` have
/// both `s` and `-s` collected.
fn band_half(n: usize, nu: f64) -> i64 {
    top_rows(n, nu) as i64 - (n / 2) as i64
}

fn check_nu(nu: f64) -> Result<()> {
    if nu > 0.5 && nu <= 1.0 {
        Ok(())
    } else {
        Err(Error::Parameter(format!("partial-Fourier fraction must lie in (1/2, 1], got {nu}")))
    }
}

const CENTER: usize = 8;
const VD_POWER: i32 = 6;

/// Partial-Fourier, variable-density and intersection masks.
///
/// The partial-Fourier mask keeps the top `ceil(nu n)` centred rows. The
/// variable-density mask draws exactly `round(burden n m)` entries without
/// replacement, weighted by `(1 - 0.95 r)^3` in the normalized radius `r`,
/// after forcing a centre square of side up to 8.
pub fn gen_masks(
    n: usize,
    m: usize,
    nu: f64,
    burden: f64,
    seed: u64,
) -> Result<(SamplingMask, SamplingMask, SamplingMask)> {
    check_nu(nu)?;
    if !(burden > 0.0 && burden <= 1.0) {
        return Err(Error::Parameter(format!("sampling burden must lie in (0, 1], got {burden}")));
    }
    if n < 2 || m < 2 {
        return Err(Error::Shape(format!("masks need at least 2x2 grids, got {n}x{m}")));
    }
    let top = top_rows(n, nu);
    let mut pf = SamplingMask { rows: n, cols: m, bits: vec![false; n * m] };
    for u in 0..n {
        if centered_row(u, n) < top {
            pf.bits[u * m..(u + 1) * m].iter_mut().for_each(|b| *b = true);
        }
    }

    let total = n * m;
    let target = ((burden * total as f64).round() as usize).clamp(1, total);
    let mut vd = SamplingMask { rows: n, cols: m, bits: vec![false; total] };
    let mut side = CENTER.min(n).min(m);
    while side * side > target {
        side -= 1;
    }
    let lo = |len: usize| len / 2 - side / 2;
    for u in 0..n {
        for v in 0..m {
            let (cu, cv) = (centered_row(u, n), centered_row(v, m));
            if (lo(n)..lo(n) + side).contains(&cu) && (lo(m)..lo(m) + side).contains(&cv) {
                vd.bits[u * m + v] = true;
            }
        }
    }
    let mut rng = crate::rng::seeded(seed);
    let mut keys: Vec<(f64, usize)> = Vec::with_capacity(total);
    for u in 0..n {
        for v in 0..m {
            let k = u * m + v;
            // one draw per entry keeps the stream independent of the centre size
            let draw: f64 = rng.random();
            if vd.bits[k] {
                continue;
            }
            let su = signed_freq(u, n) as f64 / (n as f64 / 2.0);
            let sv = signed_freq(v, m) as f64 / (m as f64 / 2.0);
            let r = ((su * su + sv * sv) / 2.0).sqrt().min(1.0);
            let w = (1.0 - 0.95 * r).powi(VD_POWER);
            // Efraimidis-Spirakis: the largest u^(1/w) win
            keys.push((draw.max(f64::MIN_POSITIVE).ln() / w, k));
        }
    }
    keys.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    let remaining = target - side * side;
    for (_, k) in keys.into_iter().take(remaining) {
        vd.bits[k] = true;
    }
    let both = pf.and(&vd);
    Ok((pf, vd, both))
}

/// Homodyne weighting along rows: `1 - sin(pi s / 2h)` on the symmetric band
/// `|s| <= h - 1`, 2 on the collected rows whose mirror is missing, 0 on the
/// missing rows, and 1 on a self-mirrored Nyquist row. Identically 1 when the
/// full k-space is collected.
pub fn homodyne_ramp(n: usize, m: usize, nu: f64) -> Result<Vec<f64>> {
    check_nu(nu)?;
    let mut ramp = vec![1.0; n * m];
    if top_rows(n, nu) == n {
        return Ok(ramp);
    }
    let h = band_half(n, nu);
    for u in 0..n {
        let s = signed_freq(u, n);
        let r = if n.is_multiple_of(2) && s == -((n / 2) as i64) {
            1.0
        } else if s.abs() < h {
            1.0 - (PI * s as f64 / (2.0 * h as f64)).sin()
        } else if s < 0 {
            2.0
        } else {
            0.0
        };
        ramp[u * m..(u + 1) * m].iter_mut().for_each(|v| *v = r);
    }
    Ok(ramp)
}

fn lowpass_row(u: usize, n: usize, nu: f64) -> bool {
    top_rows(n, nu) == n || signed_freq(u, n).abs() < band_half(n, nu)
}

/// Phase estimate and ramp of homodyne detection.
#[derive(Clone, Debug, PartialEq)]
pub struct Homodyne {
    /// `exp(-i angle(F^-1 L b))` per pixel.
    pub phase: Vec<Complex64>,
    pub ramp: Vec<f64>,
}

impl Homodyne {
    pub fn phase_op(&self, rows: usize, cols: usize) -> Result<LinOp> {
        crate::linops::phase(crate::linops::Shape::complex_grid(rows, cols), self.phase.clone())
    }

    pub fn ramp_op(&self, rows: usize, cols: usize) -> Result<LinOp> {
        crate::linops::diagonal(crate::linops::Shape::complex_grid(rows, cols), self.ramp.clone())
    }
}

/// Estimates the phase from the symmetric low-frequency band of the
/// zero-filled k-space `kspace` (complex `n x m` grid).
pub fn homodyne_phase(kspace: &[f64], n: usize, m: usize, nu: f64) -> Result<Homodyne> {
    check_nu(nu)?;
    if kspace.len() != 2 * n * m {
        return Err(Error::dim("homodyne k-space", 2 * n * m, kspace.len()));
    }
    let mut low = kspace.to_vec();
    for u in 0..n {
        if !lowpass_row(u, n, nu) {
            low[2 * u * m..2 * (u + 1) * m].iter_mut().for_each(|v| *v = 0.0);
        }
    }
    let ms = idft2_unitary(n, m)?.apply(&low)?;
    let phase = ms
        .chunks_exact(2)
        .map(|c| Complex64::from_polar(1.0, -Complex64::new(c[0], c[1]).arg()))
        .collect();
    Ok(Homodyne { phase, ramp: homodyne_ramp(n, m, nu)? })
}

/// Complex phantom: piecewise-smooth elliptical magnitude in `[0, 1]` times
/// `exp(i G)`, with `G` a wide Gaussian bump spanning `[-pi/2, pi/2]`
/// centred at `(cu, cv)` in normalized coordinates.
pub fn phantom(n: usize, m: usize, cu: f64, cv: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(2 * n * m);
    let inside = |u: f64, v: f64, cu: f64, cv: f64, au: f64, av: f64| ((u - cu) / au).powi(2) + ((v - cv) / av).powi(2);
    for i in 0..n {
        for j in 0..m {
            let u = (2 * i + 1) as f64 / n as f64 - 1.0;
            let v = (2 * j + 1) as f64 / m as f64 - 1.0;
            let mut mag = 0.0;
            if inside(u, v, 0.0, 0.0, 0.85, 0.68) < 1.0 {
                mag = 0.6;
            }
            if inside(u, v, -0.3, 0.2, 0.3, 0.22) < 1.0 {
                mag = 1.0;
            }
            if inside(u, v, 0.3, -0.2, 0.22, 0.3) < 1.0 {
                mag = 0.25;
            }
            let g = 0.5 * PI * (2.0 * (-((u - cu).powi(2) + (v - cv).powi(2)) / (2.0 * 2.0 * 2.0)).exp() - 1.0);
            let z = Complex64::from_polar(mag, g);
            out.push(z.re);
            out.push(z.im);
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MriParams {
    pub rows: usize,
    pub cols: usize,
    pub nu: f64,
    pub burden: f64,
    /// Standard deviation of the complex noise per collected sample.
    pub sigma: f64,
    /// Data-consistency radius; `sigma sqrt(#samples)` when unset.
    pub eps: Option<f64>,
    pub levels: Option<usize>,
    pub seed: u64,
}

impl Default for MriParams {
    fn default() -> Self {
        MriParams { rows: 32, cols: 32, nu: 9.0 / 16.0, burden: 0.3, sigma: 0.0, eps: None, levels: None, seed: 0 }
    }
}

/// Everything needed to turn a solution `xi` into an image and score it.
#[derive(Clone, Debug)]
pub struct MriData {
    pub rows: usize,
    pub cols: usize,
    pub pf: SamplingMask,
    pub vd: SamplingMask,
    pub both: SamplingMask,
    pub homodyne: Homodyne,
    /// `P_Phi = Re ∘ Phi ∘ F^-1 ∘ R ∘ D*` from `xi` to a real image.
    pub reconstruction: LinOp,
    /// Complex phantom, interleaved.
    pub phantom: Vec<f64>,
    pub magnitude: Vec<f64>,
    /// `|F^-1 D* b|` with zeros at the missing samples.
    pub zero_filled: Vec<f64>,
    pub eps: f64,
    pub levels: usize,
}

impl MriData {
    pub fn reconstruct(&self, xi: &[f64]) -> Result<Vec<f64>> {
        self.reconstruction.apply(xi)
    }

    /// `||img - |phantom||| / |||phantom|||`.
    pub fn relative_error(&self, img: &[f64]) -> f64 {
        crate::vec::dist(img, &self.magnitude) / crate::vec::norm(&self.magnitude)
    }

    pub fn zero_filled_error(&self) -> f64 {
        self.relative_error(&self.zero_filled)
    }
}

/// Compressed sensing with homodyne detection:
/// `min_xi I(||M xi - b|| <= eps) + ||Psi P_Phi xi||_1`, where `xi` holds the
/// k-space values on the partial-Fourier support and `M` keeps the collected ones.
pub fn gen_mri_problem(p: &MriParams) -> Result<ProblemInstance> {
    let (n, m) = (p.rows, p.cols);
    if !(p.sigma >= 0.0 && p.sigma.is_finite()) {
        return Err(Error::Parameter(format!("noise level must be >= 0, got {}", p.sigma)));
    }
    let levels = p.levels.unwrap_or_else(|| default_levels(n, m));
    let mut rng = crate::rng::seeded(p.seed);
    let cu = 0.5 * rng.random::<f64>() - 0.25;
    let cv = 0.5 * rng.random::<f64>() - 0.25;
    let image = phantom(n, m, cu, cv);
    let (pf, vd, both) = gen_masks(n, m, p.nu, p.burden, p.seed.wrapping_add(1))?;

    let kspace = dft2_unitary(n, m)?.apply(&image)?;
    let take = selection(n, m, &both.bits)?;
    let mut b = take.apply(&kspace)?;
    let noise = crate::rng::normal_vec(&mut rng, b.len());
    let scale = p.sigma / 2f64.sqrt();
    for (bi, e) in b.iter_mut().zip(&noise) {
        *bi += scale * e;
    }
    let eps = p.eps.unwrap_or(p.sigma * (both.count() as f64).sqrt());

    let filled = zero_fill(n, m, &both.bits)?.apply(&b)?;
    let homodyne = homodyne_phase(&filled, n, m, p.nu)?;
    let spec = HomodyneSpec {
        rows: n,
        cols: m,
        support: &pf.bits,
        ramp: &homodyne.ramp,
        phase: &homodyne.phase,
        levels,
    };
    let theta = homodyne_theta(&spec)?;
    let split = build_mri_b(&spec, theta)?;
    let reconstruction = spec.homodyne()?;

    let collected: Vec<bool> = pf.bits.iter().zip(&both.bits).filter(|(s, _)| **s).map(|(_, c)| *c).collect();
    let keep = selection(collected.len(), 1, &collected)?;
    let f = prox_composed(Arc::new(ball(b.clone(), eps)?), keep, 1.0)?;
    let a = split.a.clone();
    let problem = SaddleProblem::new(Arc::new(f), Arc::new(l1(1.0)?), a).with_split(split)?;
    validate(&problem)?;

    let magnitude: Vec<f64> = image.chunks_exact(2).map(|c| c[0].hypot(c[1])).collect();
    let zero_filled: Vec<f64> =
        idft2_unitary(n, m)?.apply(&filled)?.chunks_exact(2).map(|c| c[0].hypot(c[1])).collect();
    let mri = MriData {
        rows: n,
        cols: m,
        pf: pf.clone(),
        vd: vd.clone(),
        both: both.clone(),
        homodyne,
        reconstruction,
        phantom: image,
        magnitude: magnitude.clone(),
        zero_filled,
        eps,
        levels,
    };
    Ok(ProblemInstance {
        kind: ProblemKind::Mri,
        problem,
        truth: Some(magnitude),
        data: b,
        grid: Some((n, m)),
        params: params(&[
            ("rows", n as f64),
            ("cols", m as f64),
            ("nu", p.nu),
            ("burden", p.burden),
            ("effective_burden", both.burden()),
            ("sigma", p.sigma),
            ("eps", eps),
            ("levels", levels as f64),
            ("seed", p.seed as f64),
            ("theta", theta),
        ]),
        mri: Some(mri),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solvers::{objective_eval_feasible, run_rpdhg, SolverConfig};

    #[test]
    fn full_fraction_and_burden() {
        let (pf, vd, both) = gen_masks(16, 12, 1.0, 1.0, 0).unwrap();
        assert!(pf.bits.iter().all(|b| *b));
        assert!(vd.bits.iter().all(|b| *b));
        assert_eq!(both, pf);
        let (pf, _, both) = gen_masks(16, 12, 9.0 / 16.0, 1.0, 0).unwrap();
        assert_eq!(both, pf);
        assert_eq!(pf.count(), 9 * 12);
    }

    #[test]
    fn pf_structure() {
        let n = 16;
        let (pf, _, _) = gen_masks(n, 4, 9.0 / 16.0, 0.5, 0).unwrap();
        let c = pf.centered();
        for r in 0..n {
            let row_on = c[r * 4];
            assert_eq!(row_on, r < 9, "centred row {r}");
            assert!(c[r * 4..(r + 1) * 4].iter().all(|b| *b == row_on));
        }
    }

    #[test]
    fn burden_calibration() {
        for seed in 0..4 {
            let (pf, vd, both) = gen_masks(64, 64, 9.0 / 16.0, 0.3, seed).unwrap();
            assert!((vd.burden() - 0.3).abs() <= 0.02);
            assert!((0.14..=0.21).contains(&both.burden()), "{}", both.burden());
            assert_eq!(both, pf.and(&vd));
            // fully sampled centre
            let c = vd.centered();
            for i in 28..36 {
                assert!(c[i * 64 + 28..i * 64 + 36].iter().all(|b| *b));
            }
        }
        assert_eq!(gen_masks(8, 8, 0.75, 0.3, 1).unwrap().1.count(), 19);
    }

    #[test]
    fn mask_parameter_errors() {
        assert!(gen_masks(8, 8, 0.5, 0.3, 0).is_err());
        assert!(gen_masks(8, 8, 1.1, 0.3, 0).is_err());
        assert!(gen_masks(8, 8, 0.75, 0.0, 0).is_err());
        assert!(homodyne_ramp(8, 8, 0.4).is_err());
    }

    #[test]
    fn ramp_is_antisymmetric_about_one() {
        for (n, nu) in [(16usize, 9.0 / 16.0), (32, 5.0 / 8.0), (15, 0.7)] {
            let ramp = homodyne_ramp(n, 1, nu).unwrap();
            let mirror = |u: usize| (n - u) % n;
            for u in 0..n {
                assert!((ramp[u] + ramp[mirror(u)] - 2.0).abs() < 1e-14, "n={n} u={u}");
            }
            let h = band_half(n, nu);
            let collected = (0..n).filter(|u| signed_freq(*u, n) < h).count();
            assert_eq!(collected, top_rows(n, nu));
            assert!(ramp.iter().all(|r| (0.0..=2.0).contains(r)));
        }
        assert!(homodyne_ramp(8, 3, 1.0).unwrap().iter().all(|r| *r == 1.0));
    }

    #[test]
    fn full_data_of_real_image_is_identity() {
        let (n, m) = (16, 8);
        let img: Vec<f64> = (0..n * m).map(|k| ((k * 37) % 11) as f64 / 11.0).collect();
        let complex: Vec<f64> = img.iter().flat_map(|v| [*v, 0.0]).collect();
        let full = dft2_unitary(n, m).unwrap().apply(&complex).unwrap();
        let h = homodyne_phase(&full, n, m, 1.0).unwrap();
        assert!(h.phase.iter().zip(&img).all(|(p, v)| *v == 0.0 || (p - Complex64::new(1.0, 0.0)).norm() < 1e-12));
        // with trivial phase any ramp satisfying R(s) + R(-s) = 2 reproduces a real image
        let ramp = homodyne_ramp(n, m, 9.0 / 16.0).unwrap();
        let ph = vec![Complex64::new(1.0, 0.0); n * m];
        let all = vec![true; n * m];
        let spec = HomodyneSpec { rows: n, cols: m, support: &all, ramp: &ramp, phase: &ph, levels: 1 };
        let back = spec.homodyne().unwrap().apply(&full).unwrap();
        assert!(crate::vec::dist(&back, &img) < 1e-8);
    }

    #[test]
    fn phase_has_unit_modulus() {
        let inst = gen_mri_problem(&MriParams { rows: 16, cols: 16, ..Default::default() }).unwrap();
        let mri = inst.mri.unwrap();
        assert!(mri.homodyne.phase.iter().all(|p| (p.norm() - 1.0).abs() < 1e-14));
    }

    #[test]
    fn fully_sampled_reconstruction_is_exact() {
        let p = MriParams { rows: 16, cols: 16, nu: 1.0, burden: 1.0, ..Default::default() };
        let inst = gen_mri_problem(&p).unwrap();
        let mri = inst.mri.as_ref().unwrap();
        // xi = b is feasible and reproduces the magnitude
        let img = mri.reconstruct(&inst.data).unwrap();
        assert!(crate::vec::dist(&img, &mri.magnitude) < 1e-8);
        let obj = objective_eval_feasible(&inst.problem, &inst.data).unwrap();
        assert!(obj.is_finite());
    }

    #[test]
    fn generation_is_reproducible() {
        let p = MriParams { rows: 16, cols: 16, seed: 9, ..Default::default() };
        let a = gen_mri_problem(&p).unwrap();
        let b = gen_mri_problem(&p).unwrap();
        assert_eq!(a.data, b.data);
        let ma = a.mri.unwrap();
        let mb = b.mri.unwrap();
        assert_eq!(ma.both, mb.both);
        let coeffs = |m: &MriData| crate::vec::norm1(&crate::linops::dwt_ortho(16, 16, m.levels).unwrap().apply(&m.magnitude).unwrap());
        assert_eq!(coeffs(&ma), coeffs(&mb));
        assert!(coeffs(&ma).is_finite());
    }

    #[test]
    fn projection_overwrites_data_entries() {
        let inst = gen_mri_problem(&MriParams { rows: 16, cols: 16, ..Default::default() }).unwrap();
        let xi = vec![0.0; inst.problem.primal_len()];
        let p = inst.problem.f.prox(1.0, &xi).unwrap();
        assert_eq!(inst.problem.f.value(&p), 0.0);
        let obj = objective_eval_feasible(&inst.problem, &xi).unwrap();
        assert!((obj - inst.problem.g.value(&inst.problem.a.apply(&p).unwrap())).abs() < 1e-12);
    }

    #[test]
    fn cs_beats_zero_filling_small() {
        let inst = gen_mri_problem(&MriParams { rows: 16, cols: 16, burden: 0.4, ..Default::default() }).unwrap();
        let mri = inst.mri.as_ref().unwrap();
        let (sol, _) = run_rpdhg(&inst.problem, &SolverConfig { max_iters: 500, ..Default::default() }).unwrap();
        let err = mri.relative_error(&mri.reconstruct(&sol.best_x).unwrap());
        std::println!("cs {err} zero-filled {}", mri.zero_filled_error());
        assert!(err < mri.zero_filled_error());
    }
}
