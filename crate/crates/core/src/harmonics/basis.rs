//! Real solid harmonics by Cartesian recurrence, evaluated over a small
//! forward-mode jet algebra so all derivatives share one code path.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Sub};

use crate::sphere::Vec3;

/// Scalar type carried through the solid-harmonic recurrence.
pub trait Jet:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Mul<f64, Output = Self>
{
    fn zero() -> Self;
    fn one() -> Self;
}

impl Jet for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
}

/// Value and ambient gradient.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Jet1 {
    pub v: f64,
    pub g: Vec3,
}

impl Add for Jet1 {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        Self { v: self.v + o.v, g: [self.g[0] + o.g[0], self.g[1] + o.g[1], self.g[2] + o.g[2]] }
    }
}

impl Sub for Jet1 {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        Self { v: self.v - o.v, g: [self.g[0] - o.g[0], self.g[1] - o.g[1], self.g[2] - o.g[2]] }
    }
}

impl Mul for Jet1 {
    type Output = Self;
    #[inline]
    fn mul(self, o: Self) -> Self {
        Self {
            v: self.v * o.v,
            g: [
                self.v * o.g[0] + o.v * self.g[0],
                self.v * o.g[1] + o.v * self.g[1],
                self.v * o.g[2] + o.v * self.g[2],
            ],
        }
    }
}

impl Mul<f64> for Jet1 {
    type Output = Self;
    #[inline]
    fn mul(self, s: f64) -> Self {
        Self { v: self.v * s, g: [self.g[0] * s, self.g[1] * s, self.g[2] * s] }
    }
}

impl Jet for Jet1 {
    fn zero() -> Self {
        Self::default()
    }
    fn one() -> Self {
        Self { v: 1.0, ..Self::default() }
    }
}

/// Second-order ambient jet. The Hessian is stored as
/// the upper triangle `(xx, xy, xz, yy, yz, zz)`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Jet2 {
    pub v: f64,
    pub g: Vec3,
    pub h: [f64; 6],
}

pub(crate) const SYM_PAIRS: [(usize, usize); 6] = [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)];

/// Position of `(i, j)` in the packed upper triangle.
#[inline]
pub fn sym_index(i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    match (i, j) {
        (0, 0) => 0,
        (0, 1) => 1,
        (0, 2) => 2,
        (1, 1) => 3,
        (1, 2) => 4,
        _ => 5,
    }
}

/// `aᵀ H b` for a packed symmetric 3×3 matrix.
#[inline]
pub fn sym_form(h: &[f64; 6], a: &Vec3, b: &Vec3) -> f64 {
    h[0] * a[0] * b[0]
        + h[3] * a[1] * b[1]
        + h[5] * a[2] * b[2]
        + h[1] * (a[0] * b[1] + a[1] * b[0])
        + h[2] * (a[0] * b[2] + a[2] * b[0])
        + h[4] * (a[1] * b[2] + a[2] * b[1])
}

impl Add for Jet2 {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        let mut h = self.h;
        for (k, x) in h.iter_mut().enumerate() {
            *x += o.h[k];
        }
        Self { v: self.v + o.v, g: [self.g[0] + o.g[0], self.g[1] + o.g[1], self.g[2] + o.g[2]], h }
    }
}

impl Sub for Jet2 {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        let mut h = self.h;
        for (k, x) in h.iter_mut().enumerate() {
            *x -= o.h[k];
        }
        Self { v: self.v - o.v, g: [self.g[0] - o.g[0], self.g[1] - o.g[1], self.g[2] - o.g[2]], h }
    }
}

impl Mul for Jet2 {
    type Output = Self;
    #[inline]
    fn mul(self, o: Self) -> Self {
        let mut h = [0.0; 6];
        for (k, &(i, j)) in SYM_PAIRS.iter().enumerate() {
            h[k] = self.v * o.h[k] + o.v * self.h[k] + self.g[i] * o.g[j] + self.g[j] * o.g[i];
        }
        Self {
            v: self.v * o.v,
            g: [
                self.v * o.g[0] + o.v * self.g[0],
                self.v * o.g[1] + o.v * self.g[1],
                self.v * o.g[2] + o.v * self.g[2],
            ],
            h,
        }
    }
}

impl Mul<f64> for Jet2 {
    type Output = Self;
    #[inline]
    fn mul(self, s: f64) -> Self {
        let mut h = self.h;
        for x in h.iter_mut() {
            *x *= s;
        }
        Self { v: self.v * s, g: [self.g[0] * s, self.g[1] * s, self.g[2] * s], h }
    }
}

impl Jet for Jet2 {
    fn zero() -> Self {
        Self::default()
    }
    fn one() -> Self {
        Self { v: 1.0, ..Self::default() }
    }
}

/// Flat index of `(l, m)` in coefficient arrays.
#[inline]
pub fn lm_index(l: usize, m: i64) -> usize {
    debug_assert!(m.unsigned_abs() as usize <= l);
    ((l * l + l) as i64 + m) as usize
}

/// Number of coefficients up to and including degree `l_max`.
#[inline]
pub fn coeff_count(l_max: usize) -> usize {
    (l_max + 1) * (l_max + 1)
}

/// Precomputed recurrence constants for real solid harmonics up to `l_max`.
///
/// `S_{l,m}` is the homogeneous polynomial of degree `l` with
/// `Y_{l,m} = sqrt((2l+1)/4π) S_{l,m}` on the unit sphere; `m > 0` carries
/// `cos(mφ)`, `m < 0` carries `sin(|m|φ)`, no Condon–Shortley phase.
#[derive(Debug, Clone)]
pub struct SolidHarmonics {
    l_max: usize,
    // z-step constants indexed by the target (l + 1, m), stored at lm_index(l, m)
    a: Vec<f64>,
    b: Vec<f64>,
    sectoral: Vec<f64>,
    norm: Vec<f64>,
}

impl SolidHarmonics {
    pub fn new(l_max: usize) -> Self {
        let mut a = vec![0.0; coeff_count(l_max)];
        let mut b = vec![0.0; coeff_count(l_max)];
        for l in 0..l_max {
            for m in -(l as i64)..=(l as i64) {
                let am = m.unsigned_abs() as f64;
                let lf = l as f64;
                let den = ((lf + am + 1.0) * (lf - am + 1.0)).sqrt();
                a[lm_index(l, m)] = (2.0 * lf + 1.0) / den;
                b[lm_index(l, m)] = ((lf + am) * (lf - am)).sqrt() / den;
            }
        }
        let sectoral = (0..=l_max)
            .map(|l| ((2 * l + 1) as f64 / (2 * l + 2) as f64).sqrt())
            .collect();
        let norm = (0..=l_max)
            .map(|l| ((2 * l + 1) as f64 / (4.0 * PI)).sqrt())
            .collect();
        Self { l_max, a, b, sectoral, norm }
    }

    pub fn l_max(&self) -> usize {
        self.l_max
    }

    /// `sqrt((2l+1)/4π)`, the factor turning `S_{l,m}` into `Y_{l,m}`.
    #[inline]
    pub fn norm(&self, l: usize) -> f64 {
        self.norm[l]
    }

    /// Runs the recurrence and calls `visit(l, s)` for each degree with
    /// `s[m + l] = S_{l,m}`. `r2` must equal `x² + y² + z²` in the jet
    /// algebra for the results to be homogeneous.
    pub fn for_each_degree<T: Jet, F: FnMut(usize, &[T])>(&self, x: T, y: T, z: T, r2: T, mut visit: F) {
        let width = 2 * self.l_max + 3;
        let mut prev = vec![T::zero(); width];
        let mut cur = vec![T::zero(); width];
        let mut next = vec![T::zero(); width];
        cur[0] = T::one();
        visit(0, &cur[..1]);
        for l in 0..self.l_max {
            let li = l as i64;
            if l == 0 {
                next[0] = y;
                next[2] = x;
            } else {
                let f = self.sectoral[l];
                let s = cur[2 * l];
                let sm = cur[0];
                next[2 * l + 2] = (x * s - y * sm) * f;
                next[0] = (y * s + x * sm) * f;
            }
            for m in -li..=li {
                let k = lm_index(l, m);
                let pos = (m + li) as usize;
                let mut v = z * cur[pos] * self.a[k];
                if m.unsigned_abs() < l as u64 {
                    v = v - r2 * prev[(m + li - 1) as usize] * self.b[k];
                }
                next[pos + 1] = v;
            }
            std::mem::swap(&mut prev, &mut cur);
            std::mem::swap(&mut cur, &mut next);
            visit(l + 1, &cur[..2 * l + 3]);
        }
    }

    /// `Y_{l,m}` values at a unit point, in `lm_index` order.
    pub fn eval_unit(&self, p: &Vec3, out: &mut [f64]) {
        debug_assert_eq!(out.len(), coeff_count(self.l_max));
        self.for_each_degree(p[0], p[1], p[2], 1.0, |l, s| {
            let n = self.norm[l];
            let base = l * l;
            for (o, v) in out[base..base + s.len()].iter_mut().zip(s) {
                *o = n * v;
            }
        });
    }
}
