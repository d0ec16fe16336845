//! Kernels built from the fundamental solution of the Laplacian in R^{n+1}:
//! `F` and its second derivatives, the radial kernels `ω` and `ω̂`, and the
//! Hölder threshold constant `γ_{n,α}`. Firey's `Θ` and Berg's `g_n` serve as
//! cross-checks.
//!
//! Two-point kernels are exposed in reduced form: `s = ⟨x, z⟩` and, for
//! `ω̂`, `c = ⟨ξ, z⟩`.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::quadrature::{integrate_adaptive, integrate_to_infinity, AdaptiveConfig, QuadResult};

/// Tolerances for the radial improper integrals.
pub type RadialQuadratureConfig = AdaptiveConfig;

fn check_cfg(cfg: &RadialQuadratureConfig) -> Result<()> {
    let ok = |t: f64| t > 0.0 && t <= 1e-2;
    if !ok(cfg.abs_tol) || !ok(cfg.rel_tol) || cfg.max_subdivisions == 0 {
        return Err(Error::InvalidParameter(format!("quadrature tolerances out of range: {cfg:?}")));
    }
    Ok(())
}

/// `|S^n| = 2π^{(n+1)/2} / Γ((n+1)/2)`, via `|S^n| = 2π/(n−1) |S^{n−2}|`.
pub fn sphere_measure(n: usize) -> f64 {
    match n {
        0 => 2.0,
        1 => 2.0 * PI,
        _ => 2.0 * PI / (n - 1) as f64 * sphere_measure(n - 2),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelParams {
    pub n: usize,
    pub omega_n: f64,
}

impl KernelParams {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidDimension(n));
        }
        Ok(Self { n, omega_n: sphere_measure(n) })
    }
}

fn check_points(x: &[f64], y: &[f64], params: &KernelParams) -> Result<f64> {
    if x.len() != params.n + 1 || y.len() != params.n + 1 {
        return Err(Error::InvalidDimension(x.len().max(y.len()).saturating_sub(1)));
    }
    let d2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
    if d2 == 0.0 {
        return Err(Error::SingularEvaluation("x = y".into()));
    }
    Ok(d2)
}

/// `F(x, y) = |x − y|^{1−n} / ((1 − n) ω_n)`.
pub fn fundamental(x: &[f64], y: &[f64], params: &KernelParams) -> Result<f64> {
    let d2 = check_points(x, y, params)?;
    let n = params.n as f64;
    Ok(d2.sqrt().powf(1.0 - n) / ((1.0 - n) * params.omega_n))
}

/// `F_ξξ(x, y) = [|x − y|² − (n+1)⟨ξ, x − y⟩²] / (ω_n |x − y|^{n+3})`.
pub fn fundamental_dir2(x: &[f64], y: &[f64], xi: &[f64], params: &KernelParams) -> Result<f64> {
    let d2 = check_points(x, y, params)?;
    if xi.len() != params.n + 1 {
        return Err(Error::InvalidDimension(xi.len().saturating_sub(1)));
    }
    let n = params.n as f64;
    let p: f64 = x.iter().zip(y).zip(xi).map(|((a, b), e)| (a - b) * e).sum();
    Ok((d2 - (n + 1.0) * p * p) / (params.omega_n * d2.sqrt().powf(n + 3.0)))
}

fn check_s(s: f64) -> Result<()> {
    if !(s.abs() < 1.0) {
        return Err(Error::SingularEvaluation(format!("|s| = {} ≥ 1", s.abs())));
    }
    Ok(())
}

/// `I_m(θ) = ∫_θ^π sin^m t dt` by the reduction formula.
pub fn sine_power_tail(m: usize, theta: f64) -> f64 {
    // 1 + cos θ = 2 cos²(θ/2) avoids cancellation near θ = π
    let c2 = (0.5 * theta).cos();
    let (mut a, mut b) = (PI - theta, 2.0 * c2 * c2);
    if m == 0 {
        return a;
    }
    let (st, ct) = theta.sin_cos();
    for k in 2..=m {
        let kf = k as f64;
        let next = st.powi(k as i32 - 1) * ct / kf + (kf - 1.0) / kf * a;
        a = b;
        b = next;
    }
    b
}

/// `ω(s) = −∫_0^∞ r^{n−1} (r² − 2sr + 1)^{−(n+1)/2} dr` by adaptive quadrature
/// after the shift `r = s + √(1−s²) ρ`.
pub fn omega_radial(s: f64, params: &KernelParams, cfg: &RadialQuadratureConfig) -> Result<f64> {
    Ok(omega_radial_detail(s, params, cfg)?.value)
}

pub fn omega_radial_detail(s: f64, params: &KernelParams, cfg: &RadialQuadratureConfig) -> Result<QuadResult> {
    check_s(s)?;
    check_cfg(cfg)?;
    let n = params.n;
    let sigma = (1.0 - s * s).sqrt();
    let g = |rho: f64| {
        let r = s + sigma * rho;
        r.powi(n as i32 - 1) / (1.0 + rho * rho).powf(0.5 * (n + 1) as f64)
    };
    let scale = -sigma.powi(-(n as i32));
    Ok(split_rho_integral(g, -s / sigma, cfg, scale))
}

/// `∫_{ρ0}^∞ g` split into a finite panel and a mapped tail, times `scale`.
fn split_rho_integral(g: impl Fn(f64) -> f64, rho0: f64, cfg: &AdaptiveConfig, scale: f64) -> QuadResult {
    let rho1 = rho0.max(0.0) + 1.0;
    let head = integrate_adaptive(&g, rho0, rho1, cfg);
    let tail = integrate_to_infinity(&g, rho1, cfg);
    QuadResult {
        value: scale * (head.value + tail.value),
        abs_err: scale.abs() * (head.abs_err + tail.abs_err),
        intervals: head.intervals + tail.intervals,
        converged: head.converged && tail.converged,
    }
}

/// `ω(s) = (1 − s²)^{−n/2} ∫_π^{arccos s} sin^{n−1} t dt` by its
/// antiderivative for `n ≤ 4` and by quadrature of the inner integral above.
pub fn omega_closed(s: f64, params: &KernelParams) -> Result<f64> {
    check_s(s)?;
    let q = 1.0 - s * s;
    Ok(match params.n {
        2 => -1.0 / (1.0 - s),
        3 => ((s.acos() - PI) / 2.0 - s * q.sqrt() / 2.0) / q.powf(1.5),
        4 => (-s + s * s * s / 3.0 - 2.0 / 3.0) / (q * q),
        n => {
            let theta = s.acos();
            let cfg = AdaptiveConfig { abs_tol: 1e-14, rel_tol: 1e-13, max_subdivisions: 100 };
            let inner = integrate_adaptive(|t: f64| t.sin().powi(n as i32 - 1), theta, PI, &cfg);
            -inner.value / q.powf(0.5 * n as f64)
        }
    })
}

/// Firey's `Θ(s) = (1 − s²)^{−n/2} ∫_π^{arccos s} sin^{n−1} t dt`, evaluated
/// through the sine-power reduction formula.
pub fn firey_theta(s: f64, params: &KernelParams) -> Result<f64> {
    check_s(s)?;
    let theta = s.acos();
    Ok(-sine_power_tail(params.n - 1, theta) / theta.sin().powi(params.n as i32))
}

/// Integrand of `ω̂` in the radial variable `r`, before the `1/ω_n` factor.
pub fn hat_omega_integrand(r: f64, s: f64, c: f64, n: usize) -> f64 {
    let d2 = r * r - 2.0 * s * r + 1.0;
    (d2 - (n + 1) as f64 * c * c * r * r) * r.powi(n as i32 - 1) / d2.powf(0.5 * (n + 3) as f64)
}

fn check_sc(s: f64, c: f64) -> Result<()> {
    check_s(s)?;
    if s * s + c * c > 1.0 + 1e-12 {
        return Err(Error::InvalidParameter(format!("s² + c² = {} > 1", s * s + c * c)));
    }
    Ok(())
}

/// `ω̂(s, c) = (1/ω_n) ∫_0^∞ [|x − rz|² − (n+1)⟨ξ, rz⟩²] r^{n−1} / |x − rz|^{n+3} dr`.
pub fn hat_omega(s: f64, c: f64, params: &KernelParams, cfg: &RadialQuadratureConfig) -> Result<f64> {
    check_sc(s, c)?;
    check_cfg(cfg)?;
    Ok(hat_omega_unchecked(s, c, params, cfg).value)
}

fn hat_omega_unchecked(s: f64, c: f64, params: &KernelParams, cfg: &AdaptiveConfig) -> QuadResult {
    let n = params.n;
    let sigma2 = 1.0 - s * s;
    let sigma = sigma2.sqrt();
    let g = |rho: f64| {
        let r = s + sigma * rho;
        let q = 1.0 + rho * rho;
        (sigma2 * q - (n + 1) as f64 * c * c * r * r) * r.powi(n as i32 - 1) / q.powf(0.5 * (n + 3) as f64)
    };
    let scale = sigma.powi(-(n as i32) - 2) / params.omega_n;
    split_rho_integral(g, -s / sigma, cfg, scale)
}

/// `(A, B)` with `ω̂(s, c) = A(s) + c² B(s)`: `A = −ω/ω_n` and
/// `B = −(n+1) I_{n+1}(θ) / (ω_n sin^{n+2} θ)`.
pub fn hat_omega_parts(s: f64, params: &KernelParams) -> Result<(f64, f64)> {
    check_s(s)?;
    let theta = s.acos();
    Ok(hat_omega_parts_theta(theta, params))
}

fn hat_omega_parts_theta(theta: f64, params: &KernelParams) -> (f64, f64) {
    let n = params.n;
    if n == 2 {
        let h = (0.5 * theta).sin();
        let oms = 2.0 * h * h;
        let k = 1.0 / (4.0 * PI);
        return (k / oms, -k * (1.0 + oms) / (oms * oms));
    }
    let st = theta.sin();
    let a = sine_power_tail(n - 1, theta) / (st.powi(n as i32) * params.omega_n);
    let b = -((n + 1) as f64) * sine_power_tail(n + 1, theta) / (params.omega_n * st.powi(n as i32 + 2));
    (a, b)
}

/// Closed form of `ω̂(s, c)`.
pub fn hat_omega_closed(s: f64, c: f64, params: &KernelParams) -> Result<f64> {
    check_sc(s, c)?;
    let (a, b) = hat_omega_parts(s, params)?;
    Ok(a + c * c * b)
}

/// How a [`KernelTable`] evaluates `ω` and `ω̂`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelMode {
    /// Exact closed forms.
    Closed,
    /// Adaptive radial quadrature, for validation.
    Direct(RadialQuadratureConfig),
}

/// Kernel evaluator shared by the criterion sweeps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelTable {
    params: KernelParams,
    mode: KernelMode,
}

impl KernelTable {
    pub fn new(n: usize, mode: KernelMode) -> Result<Self> {
        if let KernelMode::Direct(cfg) = &mode {
            check_cfg(cfg)?;
        }
        Ok(Self { params: KernelParams::new(n)?, mode })
    }

    pub fn closed(n: usize) -> Result<Self> {
        Self::new(n, KernelMode::Closed)
    }

    pub fn params(&self) -> &KernelParams {
        &self.params
    }

    pub fn mode(&self) -> &KernelMode {
        &self.mode
    }

    /// `ω` at geodesic distance `theta ∈ (0, π)`.
    pub fn omega_theta(&self, theta: f64) -> f64 {
        match self.mode {
            KernelMode::Closed if self.params.n == 2 => {
                let h = (0.5 * theta).sin();
                -1.0 / (2.0 * h * h)
            }
            KernelMode::Closed => -sine_power_tail(self.params.n - 1, theta) / theta.sin().powi(self.params.n as i32),
            KernelMode::Direct(cfg) => omega_radial_detail(theta.cos(), &self.params, &cfg)
                .map(|r| r.value)
                .unwrap_or(f64::NAN),
        }
    }

    /// `(A, B)` of `ω̂ = A + c² B` at geodesic distance `theta ∈ (0, π)`.
    pub fn hat_parts_theta(&self, theta: f64) -> (f64, f64) {
        match self.mode {
            KernelMode::Closed => hat_omega_parts_theta(theta, &self.params),
            KernelMode::Direct(cfg) => {
                let s = theta.cos();
                let a = hat_omega_unchecked(s, 0.0, &self.params, &cfg).value;
                let b = hat_omega_unchecked(s, 1.0, &self.params, &cfg).value - a;
                (a, b)
            }
        }
    }

    pub fn omega(&self, s: f64) -> Result<f64> {
        check_s(s)?;
        Ok(self.omega_theta(s.acos()))
    }

    pub fn hat_omega(&self, s: f64, c: f64) -> Result<f64> {
        check_sc(s, c)?;
        let (a, b) = self.hat_parts_theta(s.acos());
        Ok(a + c * c * b)
    }
}

/// Truncated Taylor series in the offset `h` around an expansion point.
#[derive(Debug, Clone)]
struct Taylor(Vec<f64>);

impl Taylor {
    fn var(t0: f64, k: usize) -> Self {
        let mut v = vec![0.0; k];
        v[0] = t0;
        if k > 1 {
            v[1] = 1.0;
        }
        Self(v)
    }

    fn konst(c: f64, k: usize) -> Self {
        let mut v = vec![0.0; k];
        v[0] = c;
        Self(v)
    }

    fn len(&self) -> usize {
        self.0.len()
    }

    fn mul(&self, o: &Self) -> Self {
        let k = self.len().min(o.len());
        Self((0..k).map(|i| (0..=i).map(|j| self.0[j] * o.0[i - j]).sum()).collect())
    }

    fn scale_add(&self, a: f64, o: &Self, b: f64) -> Self {
        let k = self.len().min(o.len());
        Self((0..k).map(|i| a * self.0[i] + b * o.0[i]).collect())
    }

    fn recip(&self) -> Self {
        let k = self.len();
        let mut b = vec![0.0; k];
        b[0] = 1.0 / self.0[0];
        for i in 1..k {
            let s: f64 = (1..=i).map(|j| self.0[j] * b[i - j]).sum();
            b[i] = -s * b[0];
        }
        Self(b)
    }

    fn sqrt(&self) -> Self {
        let k = self.len();
        let mut b = vec![0.0; k];
        b[0] = self.0[0].sqrt();
        for i in 1..k {
            let s: f64 = (1..i).map(|j| b[j] * b[i - j]).sum();
            b[i] = (self.0[i] - s) / (2.0 * b[0]);
        }
        Self(b)
    }

    fn integrate(&self, c0: f64) -> Self {
        let mut b = Vec::with_capacity(self.len());
        b.push(c0);
        for i in 0..self.len() - 1 {
            b.push(self.0[i] / (i + 1) as f64);
        }
        Self(b)
    }

    fn deriv(&self) -> Self {
        Self((1..self.len()).map(|i| i as f64 * self.0[i]).collect())
    }
}

fn berg_constant(n: usize) -> f64 {
    let nf = n as f64;
    (nf + 1.0) / ((nf + 2.0) * PI.sqrt()) * (ln_gamma((nf + 2.0) / 2.0) - ln_gamma((nf + 1.0) / 2.0)).exp()
}

/// Berg's kernel `g_n(t)`: the printed `g_2`, `g_3` and the recursion
/// `g_{n+2} = (n+1)/(n−1)² t g_n' + (n+1)/(n−1) g_n + C_n t`, carried out on
/// truncated Taylor series so every derivative is exact.
pub fn berg_g(n: usize, t: f64) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidDimension(n));
    }
    if !(t.abs() < 1.0) {
        return Err(Error::SingularEvaluation(format!("|t| = {} ≥ 1", t.abs())));
    }
    let base = if n % 2 == 0 { 2 } else { 3 };
    let steps = (n - base) / 2;
    let k = steps + 1;
    let tt = Taylor::var(t, k);
    let mut g = if base == 2 {
        let q = Taylor::konst(1.0, k).scale_add(1.0, &tt.mul(&tt), -1.0);
        let root = q.sqrt();
        let asin = root.recip().integrate(t.asin());
        let a = Taylor::konst(0.5 * PI, k).scale_add(1.0, &asin, 1.0);
        a.mul(&root).scale_add(1.0 / PI, &tt, -1.0 / (2.0 * PI))
    } else {
        let omt = 1.0 - t;
        let mut l = vec![omt.ln(); k];
        for (i, v) in l.iter_mut().enumerate().skip(1) {
            *v = -1.0 / (i as f64 * omt.powi(i as i32));
        }
        let kappa = 4.0 / 3.0 - 2f64.ln();
        let tl = tt.mul(&Taylor(l));
        Taylor::konst(1.0, k).scale_add(1.0, &tl, 1.0).scale_add(1.0, &tt, kappa)
    };
    let mut m = base;
    for _ in 0..steps {
        let mf = m as f64;
        let gp = g.deriv();
        let tg = Taylor::var(t, gp.len()).mul(&gp);
        let g_trunc = Taylor(g.0[..gp.len()].to_vec());
        let lin = tg.scale_add((mf + 1.0) / ((mf - 1.0) * (mf - 1.0)), &g_trunc, (mf + 1.0) / (mf - 1.0));
        g = lin.scale_add(1.0, &Taylor::var(t, gp.len()), berg_constant(m));
        m += 2;
    }
    Ok(g.0[0])
}

/// Result of [`gamma_const_detail`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GammaValue {
    pub n: usize,
    pub alpha: f64,
    pub value: f64,
    /// The reduced integral `I` with `γ = ω_n / (n(n+1) I)`.
    pub integral: f64,
    pub abs_err: f64,
    pub converged: bool,
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::InvalidParameter(format!("alpha = {alpha} is outside (0, 1]")));
    }
    Ok(())
}

/// `γ_{n,α} = ω_n / (n(n+1)) · I^{−1}` with
/// `I = ω_{n−1} ∫_0^π θ^α I_{n−1}(θ) / sin θ dθ`.
pub fn gamma_const(n: usize, alpha: f64, cfg: &RadialQuadratureConfig) -> Result<f64> {
    Ok(gamma_const_detail(n, alpha, cfg)?.value)
}

pub fn gamma_const_detail(n: usize, alpha: f64, cfg: &RadialQuadratureConfig) -> Result<GammaValue> {
    let params = KernelParams::new(n)?;
    check_alpha(alpha)?;
    check_cfg(cfg)?;
    // θ = π w^{1/α} removes the θ^{α−1} endpoint singularity
    let pa = PI.powf(alpha) / alpha;
    let h = |w: f64| {
        let theta = PI * w.powf(1.0 / alpha);
        if theta <= 0.0 {
            return pa * sine_power_tail(n - 1, 0.0);
        }
        let st = theta.sin();
        if st <= 0.0 {
            return 0.0;
        }
        pa * theta / st * sine_power_tail(n - 1, theta)
    };
    let q = integrate_adaptive(h, 0.0, 1.0, cfg);
    let om1 = sphere_measure(n - 1);
    let integral = om1 * q.value;
    let k = params.omega_n / (n * (n + 1)) as f64;
    Ok(GammaValue {
        n,
        alpha,
        value: k / integral,
        integral,
        abs_err: k / integral * (om1 * q.abs_err / integral),
        converged: q.converged,
    })
}

/// Monte-Carlo estimate of `γ_{n,α}` straight from its defining integral
/// over R^{n+1}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GammaMonteCarlo {
    pub value: f64,
    pub std_err: f64,
    pub integral: f64,
    pub integral_std_err: f64,
    pub samples: u64,
}

const MC_CHUNK: u64 = 100_000;

/// Samples `y = p + ρw` with `w` uniform on S^n and `ρ` drawn from a density
/// proportional to `min(ρ^{α−1}, ρ^{−2})`, which matches the integrand at
/// both ends. Chunks use independent ChaCha streams and are reduced in
/// order, so the estimate is independent of the worker count.
pub fn gamma_monte_carlo(n: usize, alpha: f64, pole: &[f64], samples: u64, seed: u64) -> Result<GammaMonteCarlo> {
    let params = KernelParams::new(n)?;
    check_alpha(alpha)?;
    if pole.len() != n + 1 {
        return Err(Error::InvalidDimension(pole.len().saturating_sub(1)));
    }
    let pn = pole.iter().map(|v| v * v).sum::<f64>().sqrt();
    if !(pn > 0.0) {
        return Err(Error::InvalidParameter("pole must be nonzero".into()));
    }
    let p: Vec<f64> = pole.iter().map(|v| v / pn).collect();
    let z_norm = 1.0 / alpha + 1.0;
    let p_inner = (1.0 / alpha) / z_norm;
    let chunks = samples.div_ceil(MC_CHUNK);
    let sums: Vec<(f64, f64, u64)> = (0..chunks)
        .into_par_iter()
        .map(|ci| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(ci);
            let m = MC_CHUNK.min(samples - ci * MC_CHUNK);
            let mut w = vec![0.0; n + 1];
            let mut y = vec![0.0; n + 1];
            let (mut s1, mut s2) = (0.0, 0.0);
            for _ in 0..m {
                let mut wn = 0.0;
                for v in w.iter_mut() {
                    *v = rng.sample::<f64, _>(StandardNormal);
                    wn += *v * *v;
                }
                let wn = wn.sqrt();
                let u: f64 = 1.0 - rng.random::<f64>();
                let rho = if rng.random::<f64>() < p_inner { u.powf(1.0 / alpha) } else { 1.0 / u };
                let mut yn = 0.0;
                for i in 0..=n {
                    y[i] = p[i] + rho * w[i] / wn;
                    yn += y[i] * y[i];
                }
                let yn = yn.sqrt();
                let (mut dm, mut dp) = (0.0, 0.0);
                for i in 0..=n {
                    let yi = y[i] / yn;
                    dm += (yi - p[i]) * (yi - p[i]);
                    dp += (yi + p[i]) * (yi + p[i]);
                }
                let dist = 2.0 * dm.sqrt().atan2(dp.sqrt());
                let q = if rho < 1.0 { rho.powf(alpha - 1.0) } else { 1.0 / (rho * rho) };
                let est = params.omega_n * z_norm * dist.powf(alpha) / (rho * yn * q);
                s1 += est;
                s2 += est * est;
            }
            (s1, s2, m)
        })
        .collect();
    let (mut s1, mut s2, mut cnt) = (0.0, 0.0, 0u64);
    for (a, b, m) in sums {
        s1 += a;
        s2 += b;
        cnt += m;
    }
    let nf = cnt as f64;
    let mean = s1 / nf;
    let var = (s2 / nf - mean * mean).max(0.0) * nf / (nf - 1.0);
    let se = (var / nf).sqrt();
    let k = params.omega_n / (n * (n + 1)) as f64;
    let value = k / mean;
    Ok(GammaMonteCarlo { value, std_err: value * se / mean, integral: mean, integral_std_err: se, samples: cnt })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(n: usize) -> KernelParams {
        KernelParams::new(n).unwrap()
    }

    fn cfg() -> RadialQuadratureConfig {
        RadialQuadratureConfig::default()
    }

    fn s_grid() -> Vec<f64> {
        (-19..=19).map(|k| k as f64 * 0.05).collect()
    }

    #[test]
    fn sphere_measures() {
        assert!((sphere_measure(2) - 4.0 * PI).abs() < 1e-12);
        assert!((sphere_measure(1) - 2.0 * PI).abs() < 1e-12);
        assert!((sphere_measure(3) - 2.0 * PI * PI).abs() < 1e-12);
        for n in 1..9 {
            let nf = n as f64;
            let viag = 2.0 * PI.powf((nf + 1.0) / 2.0) / statrs::function::gamma::gamma((nf + 1.0) / 2.0);
            assert!((sphere_measure(n) - viag).abs() < 1e-12 * viag);
        }
        assert!(matches!(KernelParams::new(1), Err(Error::InvalidDimension(1))));
    }

    #[test]
    fn fundamental_values() {
        let o = [0.0, 0.0, 0.0];
        assert!((fundamental(&o, &[1.0, 0.0, 0.0], &p(2)).unwrap() + 1.0 / (4.0 * PI)).abs() < 1e-15);
        assert!((fundamental(&o, &[0.0, 2.0, 0.0], &p(2)).unwrap() + 1.0 / (8.0 * PI)).abs() < 1e-15);
        let o4 = [0.0; 4];
        let v = fundamental(&o4, &[0.0, 0.0, 0.0, 1.0], &p(3)).unwrap();
        assert!((v + 1.0 / (4.0 * PI * PI)).abs() < 1e-15);
        assert!(matches!(fundamental(&o, &o, &p(2)), Err(Error::SingularEvaluation(_))));
    }

    #[test]
    fn fundamental_second_derivative_values() {
        let o = [0.0, 0.0, 0.0];
        let y = [1.0, 0.0, 0.0];
        let perp = fundamental_dir2(&o, &y, &[0.0, 1.0, 0.0], &p(2)).unwrap();
        assert!((perp - 1.0 / (4.0 * PI)).abs() < 1e-15);
        let par = fundamental_dir2(&o, &y, &[1.0, 0.0, 0.0], &p(2)).unwrap();
        assert!((par + 1.0 / (2.0 * PI)).abs() < 1e-15);
    }

    #[test]
    fn fundamental_second_derivative_matches_finite_differences() {
        let x = [0.3, -0.2, 0.5];
        let y = [-0.4, 0.7, 0.1];
        let xi = [0.6, 0.0, 0.8];
        let h = 1e-4;
        let f = |t: f64| {
            let xt: Vec<f64> = x.iter().zip(&xi).map(|(a, e)| a + t * e).collect();
            fundamental(&xt, &y, &p(2)).unwrap()
        };
        let fd = (f(h) - 2.0 * f(0.0) + f(-h)) / (h * h);
        let an = fundamental_dir2(&x, &y, &xi, &p(2)).unwrap();
        assert!((fd - an).abs() < 1e-6 * an.abs().max(1.0));
    }

    proptest! {
        #[test]
        fn fundamental_second_derivative_bound(
            n in 2usize..5,
            x in proptest::collection::vec(-2.0f64..2.0, 5),
            y in proptest::collection::vec(-2.0f64..2.0, 5),
            xi in proptest::collection::vec(-1.0f64..1.0, 5),
        ) {
            let (x, y, xi) = (&x[..=n], &y[..=n], &xi[..=n]);
            let xn = xi.iter().map(|v| v * v).sum::<f64>().sqrt();
            prop_assume!(xn > 1e-3);
            let xi: Vec<f64> = xi.iter().map(|v| v / xn).collect();
            let d = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
            prop_assume!(d > 1e-3);
            let pr = p(n);
            let v = fundamental_dir2(x, y, &xi, &pr).unwrap();
            let bound = (n + 1) as f64 / (pr.omega_n * d.powi(n as i32 + 1));
            prop_assert!(v.abs() <= bound * (1.0 + 1e-12));
        }
    }

    #[test]
    fn omega_special_values() {
        assert!((omega_radial(0.0, &p(2), &cfg()).unwrap() + 1.0).abs() < 1e-10);
        assert!((omega_radial(0.5, &p(2), &cfg()).unwrap() + 2.0).abs() < 1e-10);
        assert!((omega_closed(0.0, &p(3)).unwrap() + PI / 4.0).abs() < 1e-15);
        assert!((firey_theta(0.0, &p(2)).unwrap() + 1.0).abs() < 1e-15);
        for s in [1.0, -1.0, 1.5] {
            assert!(matches!(omega_radial(s, &p(2), &cfg()), Err(Error::SingularEvaluation(_))));
            assert!(matches!(omega_closed(s, &p(2)), Err(Error::SingularEvaluation(_))));
            assert!(matches!(firey_theta(s, &p(2)), Err(Error::SingularEvaluation(_))));
        }
    }

    #[test]
    fn omega_implementations_agree() {
        for n in [2, 3, 4, 5, 6] {
            for s in s_grid() {
                let r = omega_radial(s, &p(n), &cfg()).unwrap();
                let c = omega_closed(s, &p(n)).unwrap();
                let f = firey_theta(s, &p(n)).unwrap();
                assert!((r - c).abs() <= 1e-8, "n={n} s={s} {r} {c}");
                assert!((c - f).abs() <= 1e-10, "n={n} s={s} {c} {f}");
                assert!(f < 0.0);
            }
        }
    }

    #[test]
    fn omega_singularity_law() {
        for s in s_grid() {
            assert!((omega_closed(s, &p(2)).unwrap() * (1.0 - s) + 1.0).abs() <= 1e-12);
        }
        for s in [0.9, 0.99, 0.999, 0.99999] {
            assert!(omega_closed(s, &p(2)).unwrap().abs() >= 1.0 / (1.0 - s) * (1.0 - 1e-15));
        }
        for n in [2, 3, 4, 5] {
            let vals: Vec<f64> = (0..=29)
                .map(|k| {
                    let eps = 0.01 + k as f64 * 0.01;
                    omega_closed(eps.cos(), &p(n)).unwrap().abs() * eps.powi(n as i32)
                })
                .collect();
            let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = vals.iter().cloned().fold(0.0, f64::max);
            assert!(lo > 0.1 && hi < 10.0, "n={n} {lo} {hi}");
        }
    }

    #[test]
    fn hat_omega_reductions() {
        for n in [2, 3, 4] {
            let pr = p(n);
            for s in s_grid() {
                let a = hat_omega(s, 0.0, &pr, &cfg()).unwrap();
                let w = omega_radial(s, &pr, &cfg()).unwrap();
                assert!((pr.omega_n * a + w).abs() <= 1e-8 * w.abs().max(1.0), "n={n} s={s}");
                let cmax = (1.0 - s * s).sqrt();
                for c in [0.0, 0.3 * cmax, cmax] {
                    let q = hat_omega(s, c, &pr, &cfg()).unwrap();
                    let cl = hat_omega_closed(s, c, &pr).unwrap();
                    assert!((q - cl).abs() <= 1e-8 * cl.abs().max(1.0), "n={n} s={s} c={c} {q} {cl}");
                }
            }
        }
        let v = hat_omega_closed(0.0, 1.0, &p(2)).unwrap();
        assert!((v + 1.0 / (4.0 * PI)).abs() < 1e-15);
        assert!(hat_omega_integrand(2.0, 0.0, 1.0, 2) < 0.0);
        assert!(matches!(hat_omega(0.9, 0.9, &p(2), &cfg()), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn hat_omega_matches_brute_force() {
        // composite Simpson in t with r = t / (1 − t), 10⁶ panels
        let (s, c) = (0.0, 1.0);
        let panels = 1_000_000usize;
        let h = 1.0 / panels as f64;
        let g = |t: f64| {
            if t >= 1.0 {
                return 0.0;
            }
            let r = t / (1.0 - t);
            hat_omega_integrand(r, s, c, 2) / ((1.0 - t) * (1.0 - t))
        };
        let mut acc = g(0.0) + g(1.0);
        for i in 1..panels {
            acc += if i % 2 == 1 { 4.0 } else { 2.0 } * g(i as f64 * h);
        }
        let brute = acc * h / 3.0 / (4.0 * PI);
        let q = hat_omega(s, c, &p(2), &cfg()).unwrap();
        assert!((brute - q).abs() < 1e-7, "{brute} {q}");
    }

    #[test]
    fn kernel_table_modes_agree() {
        let closed = KernelTable::closed(2).unwrap();
        let direct = KernelTable::new(2, KernelMode::Direct(cfg())).unwrap();
        for th in [0.05, 0.4, 1.3, 2.2, 3.0] {
            let a = closed.omega_theta(th);
            let b = direct.omega_theta(th);
            assert!((a - b).abs() < 1e-8 * a.abs());
            let (a1, b1) = closed.hat_parts_theta(th);
            let (a2, b2) = direct.hat_parts_theta(th);
            assert!((a1 - a2).abs() < 1e-8 * a1.abs().max(1.0));
            assert!((b1 - b2).abs() < 1e-8 * b1.abs().max(1.0));
        }
        let c3 = KernelTable::closed(3).unwrap();
        assert!((c3.omega(0.2).unwrap() - omega_closed(0.2, &p(3)).unwrap()).abs() < 1e-13);
    }

    #[test]
    fn berg_values() {
        assert!((berg_g(2, 0.0).unwrap() - 0.5).abs() < 1e-15);
        assert!((berg_g(3, 0.0).unwrap() - 1.0).abs() < 1e-15);
        let near = berg_g(2, 1.0 - 1e-12).unwrap();
        assert!((near + 1.0 / (2.0 * PI)).abs() < 1e-5);
        assert!(matches!(berg_g(2, 1.0), Err(Error::SingularEvaluation(_))));
        assert!(matches!(berg_g(1, 0.0), Err(Error::InvalidDimension(1))));
    }

    #[test]
    fn berg_recursion_matches_finite_differences() {
        // g_4 = 3 t g_2' + 3 g_2 + C_2 t with g_2' from central differences
        let h = 1e-6;
        for t in [-0.7, -0.2, 0.0, 0.4, 0.8] {
            let d = (berg_g(2, t + h).unwrap() - berg_g(2, t - h).unwrap()) / (2.0 * h);
            let expect = 3.0 * t * d + 3.0 * berg_g(2, t).unwrap() + berg_constant(2) * t;
            assert!((berg_g(4, t).unwrap() - expect).abs() < 1e-7);
            let d3 = (berg_g(3, t + h).unwrap() - berg_g(3, t - h).unwrap()) / (2.0 * h);
            let e5 = 4.0 / 4.0 * t * d3 + 2.0 * berg_g(3, t).unwrap() + berg_constant(3) * t;
            assert!((berg_g(5, t).unwrap() - e5).abs() < 1e-7);
        }
    }

    #[test]
    fn berg_g4_is_finite_and_continuous() {
        let coarse: Vec<f64> = (0..=90).map(|k| berg_g(4, -0.9 + k as f64 * 0.02).unwrap()).collect();
        assert!(coarse.iter().all(|v| v.is_finite()));
        let tv: f64 = coarse.windows(2).map(|w| (w[1] - w[0]).abs()).sum();
        let fine: Vec<f64> = (0..=180).map(|k| berg_g(4, -0.9 + k as f64 * 0.01).unwrap()).collect();
        let tv_fine: f64 = fine.windows(2).map(|w| (w[1] - w[0]).abs()).sum();
        assert!((tv - tv_fine).abs() < 1e-2 * tv.max(1.0));
        // halving the step roughly halves the largest jump
        let jump = |v: &[f64]| v.windows(2).map(|w| (w[1] - w[0]).abs()).fold(0.0, f64::max);
        assert!(jump(&fine) < 0.6 * jump(&coarse));
        assert!(berg_g(6, 0.5).unwrap().is_finite() && berg_g(7, 0.5).unwrap().is_finite());
    }

    #[test]
    fn gamma_exact_value_for_n2_alpha1() {
        let g = gamma_const_detail(2, 1.0, &cfg()).unwrap();
        let exact = 1.0 / (6.0 * PI * 2f64.ln());
        assert!((g.value - exact).abs() < 1e-10 * exact, "{} {exact}", g.value);
        assert!(g.converged);
        for (n, a) in [(2, 0.5), (3, 1.0), (3, 0.3), (4, 0.7)] {
            assert!(gamma_const(n, a, &cfg()).unwrap() > 0.0);
        }
        assert!(matches!(gamma_const(2, 0.0, &cfg()), Err(Error::InvalidParameter(_))));
        assert!(matches!(gamma_const(2, 1.5, &cfg()), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn gamma_monte_carlo_small_run() {
        let mc = gamma_monte_carlo(2, 1.0, &[0.0, 0.0, 1.0], 400_000, 3).unwrap();
        let exact = 1.0 / (6.0 * PI * 2f64.ln());
        assert!((mc.value - exact).abs() < 4.0 * mc.std_err, "{mc:?} {exact}");
        assert!(mc.std_err < 0.02 * exact);
    }
}
