//! Isotropic Gaussian distribution on `SO(3)`.
//!
//! The density relative to the uniform (Haar) measure, as a function of the
//! rotation angle `omega` and the concentration `eps2`, is the truncated
//! character series
//!
//! ```text
//! f(omega) = sum_{l >= 0} (2l + 1) exp(-l(l+1) eps2) sin((l + 1/2) omega) / sin(omega / 2)
//! ```
//!
//! Sampling draws a uniform axis and an angle from the marginal
//! `f(omega) (1 - cos omega) / pi` by inverse-CDF lookup on a precomputed
//! table; the result is shifted by the mean, `mean * exp(omega * axis)`.
//! Tables are memoized per concentration because the discrete-time paradigm
//! touches a thousand distinct concentrations per run.

use crate::error::{Error, Result};
use crate::lie::{exp_map, Rotation, Vec3};
use crate::scalar::{cst, Scalar};
use rand::Rng;
use std::any::{Any, TypeId};
use std::collections::HashMap;
use std::io::Write;
use std::sync::{Arc, OnceLock, RwLock};

/// Smallest supported concentration; below this the series needs more than
/// [`MAX_TERMS`] terms.
pub const MIN_EPS2: f64 = 1e-5;

/// Hard cap on series terms.
pub const MAX_TERMS: usize = 5000;

/// Magnitude threshold that picks the adaptive truncation order.
pub const SERIES_TAIL_TOL: f64 = 1e-12;

/// Default angle-grid resolution of [`IgSo3Table`].
pub const DEFAULT_GRID: usize = 1024;

/// Smallest truncation order whose first omitted coefficient magnitude
/// `(2L + 1) exp(-L(L+1) eps2)` drops below [`SERIES_TAIL_TOL`], capped at
/// [`MAX_TERMS`].
pub fn adaptive_terms(eps2: f64) -> usize {
    let mut l = 1usize;
    while l < MAX_TERMS {
        let coeff = (2 * l + 1) as f64 * (-((l * (l + 1)) as f64) * eps2).exp();
        if coeff < SERIES_TAIL_TOL {
            break;
        }
        l += 1;
    }
    l
}

fn check_eps2<S: Scalar>(eps2: S) -> Result<()> {
    if eps2 < cst(MIN_EPS2) {
        return Err(Error::ConcentrationTooSmall {
            eps2: eps2.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(())
}

/// Truncated series density `f(omega)` with an explicit term count.
///
/// `omega` must lie in `(0, pi]`; the `sin(omega / 2)` denominator is
/// well-conditioned on that interval.
pub fn series_f<S: Scalar>(omega: S, eps2: S, terms: usize) -> S {
    let half = cst::<S>(0.5);
    let sin_half = (omega * half).sin();
    let mut sum = S::zero();
    for l in 0..terms {
        let lf = cst::<S>(l as f64);
        let coeff = (cst::<S>((2 * l + 1) as f64)) * (-(lf * (lf + S::one())) * eps2).exp();
        sum += coeff * ((lf + half) * omega).sin() / sin_half;
    }
    sum
}

/// [`series_f`] with the adaptive truncation order for `eps2 >= 1e-5`.
pub fn series_f_auto<S: Scalar>(omega: S, eps2: S) -> Result<S> {
    check_eps2(eps2)?;
    Ok(series_f(
        omega,
        eps2,
        adaptive_terms(eps2.to_f64().unwrap_or(MIN_EPS2)),
    ))
}

/// Logarithmic angle derivative of the series, `d/domega log f(omega)`.
///
/// Computed from the term-wise analytic derivative divided by the series
/// value. `omega` is expected inside `(1e-4, pi - 1e-4)`.
pub fn score_factor<S: Scalar>(omega: S, eps2: S) -> Result<S> {
    check_eps2(eps2)?;
    let terms = adaptive_terms(eps2.to_f64().unwrap_or(MIN_EPS2));
    let half = cst::<S>(0.5);
    let sin_half = (omega * half).sin();
    let cos_half = (omega * half).cos();
    let mut value = S::zero();
    let mut derivative = S::zero();
    for l in 0..terms {
        let lf = cst::<S>(l as f64);
        let coeff = (cst::<S>((2 * l + 1) as f64)) * (-(lf * (lf + S::one())) * eps2).exp();
        let k = lf + half;
        let sin_k = (k * omega).sin();
        let cos_k = (k * omega).cos();
        value += coeff * sin_k / sin_half;
        derivative += coeff * (k * cos_k * sin_half - half * cos_half * sin_k)
            / (sin_half * sin_half);
    }
    Ok(derivative / value)
}

// ---------------------------------------------------------------------------
// Table
// ---------------------------------------------------------------------------

/// Precomputed angle-marginal density and CDF on a uniform grid over
/// `(0, pi]`, supporting linear-interpolation inverse-CDF sampling.
#[derive(Clone, Debug)]
pub struct IgSo3Table<S> {
    pub eps2: S,
    pub omega: Vec<S>,
    pub pdf: Vec<S>,
    pub cdf: Vec<S>,
}

impl<S: Scalar> IgSo3Table<S> {
    /// Build with the default grid ([`DEFAULT_GRID`] points).
    pub fn build(eps2: S) -> Result<Self> {
        Self::with_grid(eps2, DEFAULT_GRID)
    }

    /// Build on `grid` uniformly spaced angles `pi/G, 2 pi/G, ..., pi`.
    ///
    /// The marginal vanishes like `omega^2` at zero, so the cumulative
    /// trapezoid starts from an implicit `(0, 0)` node; the normalization
    /// makes the full `[0, pi]` trapezoidal integral one.
    pub fn with_grid(eps2: S, grid: usize) -> Result<Self> {
        check_eps2(eps2)?;
        assert!(grid >= 2, "grid must have at least two points");
        let terms = adaptive_terms(eps2.to_f64().unwrap_or(MIN_EPS2));
        let pi = S::PI();
        let g = cst::<S>(grid as f64);
        let inv_pi = S::one() / pi;
        let half = cst::<S>(0.5);

        let mut omega = Vec::with_capacity(grid);
        let mut pdf = Vec::with_capacity(grid);
        for i in 0..grid {
            let w = pi * cst::<S>((i + 1) as f64) / g;
            let f = series_f(w, eps2, terms).max(S::zero());
            omega.push(w);
            pdf.push(f * (S::one() - w.cos()) * inv_pi);
        }

        let mut cdf = Vec::with_capacity(grid);
        let mut acc = half * pdf[0] * omega[0];
        cdf.push(acc);
        for i in 1..grid {
            acc += half * (pdf[i - 1] + pdf[i]) * (omega[i] - omega[i - 1]);
            cdf.push(acc);
        }
        let norm = *cdf.last().expect("non-empty grid");
        for v in &mut pdf {
            *v = *v / norm;
        }
        for v in &mut cdf {
            *v = *v / norm;
        }
        Ok(Self {
            eps2,
            omega,
            pdf,
            cdf,
        })
    }

    /// Invert the CDF at `u` in [0, 1) by linear interpolation.
    pub fn sample_angle(&self, u: S) -> S {
        let n = self.cdf.len();
        if u >= self.cdf[n - 1] {
            return self.omega[n - 1];
        }
        let idx = self.cdf.partition_point(|c| *c < u);
        let (w0, c0) = if idx == 0 {
            (S::zero(), S::zero())
        } else {
            (self.omega[idx - 1], self.cdf[idx - 1])
        };
        let (w1, c1) = (self.omega[idx], self.cdf[idx]);
        let span = c1 - c0;
        if span <= S::zero() {
            return w1;
        }
        w0 + (w1 - w0) * (u - c0) / span
    }

    /// CSV dump with columns `omega,pdf,cdf`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "omega,pdf,cdf")?;
        for i in 0..self.omega.len() {
            writeln!(w, "{},{},{}", self.omega[i], self.pdf[i], self.cdf[i])?;
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Memoized tables
// ---------------------------------------------------------------------------

type CacheKey = (TypeId, u64, usize);
type CacheMap = HashMap<CacheKey, Arc<dyn Any + Send + Sync>>;

static TABLE_CACHE: OnceLock<RwLock<CacheMap>> = OnceLock::new();

/// Shared table for `eps2` at the default grid, built once per process.
/// Concurrent builds of the same key are benign: construction is
/// deterministic, so last-writer-wins keeps an identical table.
pub fn cached_table<S: Scalar>(eps2: S) -> Result<Arc<IgSo3Table<S>>> {
    let bits = eps2.to_f64().unwrap_or(f64::NAN).to_bits();
    let key = (TypeId::of::<S>(), bits, DEFAULT_GRID);
    let cache = TABLE_CACHE.get_or_init(|| RwLock::new(HashMap::new()));
    if let Some(hit) = cache.read().expect("cache lock").get(&key) {
        let table = hit
            .clone()
            .downcast::<IgSo3Table<S>>()
            .expect("cache entry type matches key");
        return Ok(table);
    }
    let table = Arc::new(IgSo3Table::build(eps2)?);
    cache
        .write()
        .expect("cache lock")
        .insert(key, table.clone());
    Ok(table)
}

// ---------------------------------------------------------------------------
// Sampling
// ---------------------------------------------------------------------------

/// Uniform direction on the unit sphere (three normals, normalized).
pub fn uniform_axis<S: Scalar, R: Rng + ?Sized>(rng: &mut R) -> Vec3<S> {
    loop {
        let v = Vec3::new(
            S::standard_normal(rng),
            S::standard_normal(rng),
            S::standard_normal(rng),
        );
        let n = v.norm();
        if n > cst(1e-6) {
            return v / n;
        }
    }
}

/// Draw one rotation from `IGSO3(mean, eps2)` using a prebuilt table.
/// The axis is drawn first, then the inverse-CDF uniform.
pub fn sample_with_table<S: Scalar, R: Rng + ?Sized>(
    table: &IgSo3Table<S>,
    mean: &Rotation<S>,
    rng: &mut R,
) -> Rotation<S> {
    let axis = uniform_axis(rng);
    let u = S::unit_uniform(rng);
    let omega = table.sample_angle(u);
    *mean * exp_map(axis * omega)
}

/// Draw one rotation from `IGSO3(mean, eps2)` through the memoized table.
pub fn sample<S: Scalar, R: Rng + ?Sized>(
    mean: &Rotation<S>,
    eps2: S,
    rng: &mut R,
) -> Result<Rotation<S>> {
    let table = cached_table(eps2)?;
    Ok(sample_with_table(&table, mean, rng))
}

/// Uniform (Haar) angle CDF `(omega - sin omega) / pi`, the large-`eps2`
/// limit of the angle marginal.
pub fn haar_angle_cdf<S: Scalar>(omega: S) -> S {
    (omega - omega.sin()) / S::PI()
}
