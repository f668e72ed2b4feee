//! Seedable synthetic target distributions.
//!
//! `R3` targets: a jittered sine curve, a rescaled chaotic-attractor
//! trajectory and an eight-mode Gaussian mixture on cube corners. `SO(3)`
//! targets: a spiral in Euler-angle space and a handful of concentrated
//! clusters. Every generator is a pure function of its [`TargetSpec`].

use crate::error::{Error, Result};
use crate::igso3;
use crate::lie::{from_euler, to_euler, EulerAngles, Rotation, Vec3};
use crate::samples::{SampleSet, Space};
use crate::scalar::{cst, Scalar};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;

pub const R3_TARGETS: [&str; 3] = ["sine3d", "lorenz", "gmm8"];
pub const SO3_TARGETS: [&str; 2] = ["spiral", "clusters"];

/// Specification of one synthetic target draw.
#[derive(Clone, Debug)]
pub struct TargetSpec {
    pub space: Space,
    pub name: String,
    pub n: usize,
    pub seed: u64,
    /// Name-specific overrides; unknown keys are rejected.
    pub params: BTreeMap<String, f64>,
}

impl TargetSpec {
    pub fn new(space: Space, name: &str, n: usize, seed: u64) -> Self {
        Self {
            space,
            name: name.to_string(),
            n,
            seed,
            params: BTreeMap::new(),
        }
    }

    pub fn with_param(mut self, key: &str, value: f64) -> Self {
        self.params.insert(key.to_string(), value);
        self
    }

    fn param(&self, key: &str, default: f64) -> f64 {
        self.params.get(key).copied().unwrap_or(default)
    }

    fn check_params(&self, allowed: &[&str]) -> Result<()> {
        for key in self.params.keys() {
            if !allowed.contains(&key.as_str()) {
                return Err(Error::InvalidConfig(format!(
                    "target '{}' does not take parameter '{key}' (allowed: {})",
                    self.name,
                    allowed.join(", ")
                )));
            }
        }
        Ok(())
    }

    fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }
}

/// Dispatch on the spec's space.
pub fn generate<S: Scalar>(spec: &TargetSpec) -> Result<SampleSet<S>> {
    match spec.space {
        Space::R3 => Ok(SampleSet::R3(generate_r3(spec)?)),
        Space::So3 => Ok(SampleSet::So3(generate_so3(spec)?)),
    }
}

/// `R3` target generator; names: `sine3d`, `lorenz`, `gmm8`.
/// All outputs are centered to zero mean.
pub fn generate_r3<S: Scalar>(spec: &TargetSpec) -> Result<Vec<Vec3<S>>> {
    assert!(spec.n >= 1, "need at least one sample");
    let mut points: Vec<Vec3<S>> = match spec.name.as_str() {
        "sine3d" => sine3d(spec)?,
        "lorenz" => lorenz(spec)?,
        "gmm8" => gmm8(spec)?,
        _ => {
            return Err(Error::UnknownTarget {
                name: spec.name.clone(),
                registered: R3_TARGETS.join(", "),
            })
        }
    };
    center(&mut points);
    Ok(points)
}

fn center<S: Scalar>(points: &mut [Vec3<S>]) {
    let n = cst::<S>(points.len() as f64);
    let mut mean = Vec3::zero();
    for p in points.iter() {
        mean = mean + *p;
    }
    mean = mean / n;
    for p in points.iter_mut() {
        *p = *p - mean;
    }
}

/// Curve `(s, sin(2 pi s), cos(2 pi s) / 2)` for evenly spaced `s` in
/// [-1, 1] plus isotropic jitter of width `jitter` (default 0.02).
fn sine3d<S: Scalar>(spec: &TargetSpec) -> Result<Vec<Vec3<S>>> {
    spec.check_params(&["jitter"])?;
    let jitter = cst::<S>(spec.param("jitter", 0.02));
    let mut rng = spec.rng();
    let two_pi = cst::<S>(std::f64::consts::TAU);
    let n = spec.n;
    Ok((0..n)
        .map(|i| {
            let s = if n == 1 {
                S::zero()
            } else {
                cst::<S>(-1.0) + cst::<S>(2.0) * cst::<S>(i as f64) / cst::<S>((n - 1) as f64)
            };
            let base = Vec3::new(s, (two_pi * s).sin(), cst::<S>(0.5) * (two_pi * s).cos());
            let noise = Vec3::new(
                S::standard_normal(&mut rng),
                S::standard_normal(&mut rng),
                S::standard_normal(&mut rng),
            );
            base + noise * jitter
        })
        .collect())
}

/// Chaotic-attractor trajectory (sigma = 10, rho = 28, beta = 8/3)
/// integrated with RK4, burned in, then rescaled to unit RMS radius.
fn lorenz<S: Scalar>(spec: &TargetSpec) -> Result<Vec<Vec3<S>>> {
    spec.check_params(&["dt", "burnin"])?;
    let dt = spec.param("dt", 0.01);
    let burnin = spec.param("burnin", 1000.0) as usize;
    let mut rng = spec.rng();

    let sigma = 10.0;
    let rho = 28.0;
    let beta = 8.0 / 3.0;
    let deriv = |p: Vec3<f64>| -> Vec3<f64> {
        Vec3::new(
            sigma * (p.y - p.x),
            p.x * (rho - p.z) - p.y,
            p.x * p.y - beta * p.z,
        )
    };
    let rk4 = |p: Vec3<f64>| -> Vec3<f64> {
        let k1 = deriv(p);
        let k2 = deriv(p + k1 * (dt / 2.0));
        let k3 = deriv(p + k2 * (dt / 2.0));
        let k4 = deriv(p + k3 * dt);
        p + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0)
    };

    let mut p = Vec3::new(
        1.0 + 0.1 * rng.random_range(-1.0..1.0),
        1.0 + 0.1 * rng.random_range(-1.0..1.0),
        20.0 + rng.random_range(-1.0..1.0),
    );
    for _ in 0..burnin {
        p = rk4(p);
    }
    let mut raw = Vec::with_capacity(spec.n);
    for _ in 0..spec.n {
        p = rk4(p);
        raw.push(p);
    }

    let mut mean = Vec3::new(0.0, 0.0, 0.0);
    for q in &raw {
        mean = mean + *q;
    }
    mean = mean / spec.n as f64;
    let mut rms = 0.0;
    for q in &raw {
        rms += (*q - mean).norm_squared();
    }
    let scale = 1.0 / (rms / spec.n as f64).sqrt();
    Ok(raw
        .into_iter()
        .map(|q| {
            let r = (q - mean) * scale;
            Vec3::new(cst(r.x), cst(r.y), cst(r.z))
        })
        .collect())
}

/// Equal-weight mixture of eight Gaussians (width `sigma`, default 0.08) at
/// the corners `(+-spread)^3` with `spread` defaulting to 0.7.
fn gmm8<S: Scalar>(spec: &TargetSpec) -> Result<Vec<Vec3<S>>> {
    spec.check_params(&["sigma", "spread"])?;
    let sigma = cst::<S>(spec.param("sigma", 0.08));
    let spread = spec.param("spread", 0.7);
    let mut rng = spec.rng();
    Ok((0..spec.n)
        .map(|_| {
            let mode: usize = rng.random_range(0..8);
            let sign = |bit: usize| if mode >> bit & 1 == 1 { spread } else { -spread };
            let c = Vec3::new(cst(sign(0)), cst(sign(1)), cst(sign(2)));
            let noise = Vec3::new(
                S::standard_normal(&mut rng),
                S::standard_normal(&mut rng),
                S::standard_normal(&mut rng),
            );
            c + noise * sigma
        })
        .collect())
}

/// `SO(3)` target generator; names: `spiral`, `clusters`.
/// Every emitted rotation has all three Euler angles inside
/// `[-pi/2, pi/2]`.
pub fn generate_so3<S: Scalar>(spec: &TargetSpec) -> Result<Vec<Rotation<S>>> {
    assert!(spec.n >= 1, "need at least one sample");
    match spec.name.as_str() {
        "spiral" => spiral(spec),
        "clusters" => clusters(spec),
        _ => Err(Error::UnknownTarget {
            name: spec.name.clone(),
            registered: SO3_TARGETS.join(", "),
        }),
    }
}

/// Euler-angle spiral `(0.45 pi s cos(3 pi s), 0.45 pi s sin(3 pi s),
/// 0.45 pi s)` for evenly spaced `s` in [-1, 1].
fn spiral<S: Scalar>(spec: &TargetSpec) -> Result<Vec<Rotation<S>>> {
    spec.check_params(&["amplitude", "turns"])?;
    let amp = cst::<S>(spec.param("amplitude", 0.45) * std::f64::consts::PI);
    let turns = cst::<S>(spec.param("turns", 3.0) * std::f64::consts::PI);
    let n = spec.n;
    Ok((0..n)
        .map(|i| {
            let s = if n == 1 {
                S::zero()
            } else {
                cst::<S>(-1.0) + cst::<S>(2.0) * cst::<S>(i as f64) / cst::<S>((n - 1) as f64)
            };
            from_euler(EulerAngles::new(
                amp * s * (turns * s).cos(),
                amp * s * (turns * s).sin(),
                amp * s,
            ))
        })
        .collect())
}

/// Concentrated clusters: `k` (default 6) mean rotations with Euler triples
/// drawn once from the seed inside `[-0.45 pi, 0.45 pi]^3`, convolved with
/// `IGSO3(eps2)` noise (default 0.02). Samples whose Euler angles leave
/// `[-pi/2, pi/2]^3` are rejected and redrawn.
fn clusters<S: Scalar>(spec: &TargetSpec) -> Result<Vec<Rotation<S>>> {
    spec.check_params(&["k", "eps2"])?;
    let k = spec.param("k", 6.0) as usize;
    let eps2 = cst::<S>(spec.param("eps2", 0.02));
    let mut rng = spec.rng();

    let bound = 0.45 * std::f64::consts::PI;
    let means: Vec<Rotation<S>> = (0..k)
        .map(|_| {
            from_euler(EulerAngles::new(
                cst(rng.random_range(-bound..bound)),
                cst(rng.random_range(-bound..bound)),
                cst(rng.random_range(-bound..bound)),
            ))
        })
        .collect();

    let half_pi = S::FRAC_PI_2();
    let in_box = |r: &Rotation<S>| {
        let e = to_euler(r);
        e.alpha.abs() <= half_pi && e.beta.abs() <= half_pi && e.gamma.abs() <= half_pi
    };

    let mut out = Vec::with_capacity(spec.n);
    for _ in 0..spec.n {
        let mean = &means[rng.random_range(0..k)];
        let mut attempts = 0;
        loop {
            let r = igso3::sample(mean, eps2, &mut rng)?;
            if in_box(&r) {
                out.push(r);
                break;
            }
            attempts += 1;
            assert!(attempts < 10_000, "cluster rejection loop stuck");
        }
    }
    Ok(out)
}
