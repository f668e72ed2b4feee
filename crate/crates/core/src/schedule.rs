//! Noise schedules: the discrete cosine variance schedule used by the
//! discrete-time paradigm and the continuous variance-preserving SDE
//! coefficients used by score matching.

use crate::scalar::{cst, Scalar};
use std::io::Write;

/// Cosine-schedule offset.
pub const COSINE_OFFSET: f64 = 0.008;

/// Clipping bounds applied to each discrete beta.
pub const BETA_CLIP: (f64, f64) = (1e-6, 0.999);

/// Discrete schedule over steps `t = 1..=T` (accessors are 1-based).
///
/// `alpha_bar` is recomputed as the running product of the clipped alphas
/// so the three arrays are mutually consistent to machine precision.
#[derive(Clone, Debug)]
pub struct DiscreteSchedule<S> {
    pub beta: Vec<S>,
    pub alpha: Vec<S>,
    pub alpha_bar: Vec<S>,
}

impl<S: Scalar> DiscreteSchedule<S> {
    pub fn steps(&self) -> usize {
        self.beta.len()
    }

    pub fn beta(&self, t: usize) -> S {
        self.beta[t - 1]
    }

    pub fn alpha(&self, t: usize) -> S {
        self.alpha[t - 1]
    }

    pub fn alpha_bar(&self, t: usize) -> S {
        self.alpha_bar[t - 1]
    }

    /// `alpha_bar` at `t - 1` with the `alpha_bar_0 = 1` convention.
    pub fn alpha_bar_prev(&self, t: usize) -> S {
        if t <= 1 {
            S::one()
        } else {
            self.alpha_bar[t - 2]
        }
    }

    /// Posterior variance `beta_t (1 - alpha_bar_{t-1}) / (1 - alpha_bar_t)`.
    pub fn beta_tilde(&self, t: usize) -> S {
        self.beta(t) * (S::one() - self.alpha_bar_prev(t)) / (S::one() - self.alpha_bar(t))
    }

    /// CSV dump with columns `t,beta,alpha_bar`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> crate::Result<()> {
        writeln!(w, "t,beta,alpha_bar")?;
        for t in 1..=self.steps() {
            writeln!(w, "{},{},{}", t, self.beta(t), self.alpha_bar(t))?;
        }
        Ok(())
    }
}

/// Cosine variance schedule with offset `s = 0.008` and betas clipped to
/// `[1e-6, 0.999]`.
pub fn cosine_schedule<S: Scalar>(t_steps: usize) -> DiscreteSchedule<S> {
    assert!(t_steps >= 2, "schedule needs at least two steps");
    let s = cst::<S>(COSINE_OFFSET);
    let half_pi = S::FRAC_PI_2();
    let tf = cst::<S>(t_steps as f64);
    let shape = |u: S| -> S {
        let c = (((u + s) / (S::one() + s)) * half_pi).cos();
        c * c
    };
    let f0 = shape(S::zero());
    let (lo, hi) = (cst::<S>(BETA_CLIP.0), cst::<S>(BETA_CLIP.1));

    let mut beta = Vec::with_capacity(t_steps);
    let mut alpha = Vec::with_capacity(t_steps);
    let mut alpha_bar = Vec::with_capacity(t_steps);
    let mut prev_target = S::one();
    let mut running = S::one();
    for t in 1..=t_steps {
        let target = shape(cst::<S>(t as f64) / tf) / f0;
        let b = (S::one() - target / prev_target).clamp(lo, hi);
        prev_target = target;
        let a = S::one() - b;
        running = running * a;
        beta.push(b);
        alpha.push(a);
        alpha_bar.push(running);
    }
    DiscreteSchedule {
        beta,
        alpha,
        alpha_bar,
    }
}

/// Variance-preserving SDE coefficients with a linear noise rate
/// `beta(t) = beta_min + t (beta_max - beta_min)` on `t` in [0, 1].
#[derive(Clone, Copy, Debug)]
pub struct VpSdeCoeffs<S> {
    pub beta_min: S,
    pub beta_max: S,
}

impl<S: Scalar> VpSdeCoeffs<S> {
    pub fn new(beta_min: S, beta_max: S) -> Self {
        assert!(
            S::zero() < beta_min && beta_min < beta_max,
            "need 0 < beta_min < beta_max"
        );
        Self { beta_min, beta_max }
    }

    pub fn beta(&self, t: S) -> S {
        self.beta_min + t * (self.beta_max - self.beta_min)
    }

    /// `alpha(t) = exp(-1/2 integral_0^t beta)`, the signal coefficient.
    pub fn alpha(&self, t: S) -> S {
        let half = cst::<S>(0.5);
        (-half * (self.beta_min * t + half * (self.beta_max - self.beta_min) * t * t)).exp()
    }

    pub fn sigma2(&self, t: S) -> S {
        let a = self.alpha(t);
        S::one() - a * a
    }

    pub fn sigma(&self, t: S) -> S {
        self.sigma2(t).sqrt()
    }

    /// Diffusion coefficient `g(t) = sqrt(beta(t))`.
    pub fn g(&self, t: S) -> S {
        self.beta(t).sqrt()
    }

    /// CSV dump of `t,beta,alpha` on a uniform grid.
    pub fn write_csv<W: Write>(&self, mut w: W, points: usize) -> crate::Result<()> {
        writeln!(w, "t,beta,alpha")?;
        for i in 0..points {
            let t = cst::<S>(i as f64) / cst::<S>((points - 1).max(1) as f64);
            writeln!(w, "{},{},{}", t, self.beta(t), self.alpha(t))?;
        }
        Ok(())
    }
}

/// Standard defaults for the translation-space VP-SDE.
pub fn vp_coeffs_default<S: Scalar>() -> VpSdeCoeffs<S> {
    VpSdeCoeffs::new(cst(0.1), cst(20.0))
}
