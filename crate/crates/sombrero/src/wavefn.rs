//! Normalized radial wavefunctions and their observables.
//!
//! A matched eigenvalue fixes the two solution branches only up to scale;
//! this module sews them into one continuous, unit-norm radial function
//!
//! ```text
//!   R(r) = C_in·D_in(r)   for r ≤ r₀,
//!   R(r) = C_out·D_out(r) for r ≥ r₀,
//! ```
//!
//! with C_in = D_out(r₀)/Q, C_out = D_in(r₀)/Q and Q chosen so that
//! ∫₀^∞ R² r dr = 1. Continuity of the value at the rim then holds by
//! construction; continuity of the derivative is a consequence of the
//! eigenvalue condition and is re-verified, not imposed.
//!
//! On top of the normalized solution sit the observables used by the level
//! analysis: the radial probability density r·R², the probability fraction
//! inside the rim, the mean radius, the node count, and the
//! Hellmann–Feynman consistency check ∂ε/∂r₀ = (r₀/2)(2P_in − 1)
//! (derivation in `docs/hellmann_feynman.md`), which ties the slope of a
//! level curve to where the state actually lives.

use serde::Serialize;

use crate::matching::{self, MatchingError, SpectralPoint};
use crate::model;
use crate::quad;

/// A normalized bound state: inner and outer scale constants plus the
/// normalization data they came from. Evaluation is exposed through
/// [`RadialSolution::eval`], which applies the inner branch up to the rim
/// and the outer branch beyond it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadialSolution {
    pub point: SpectralPoint,
    pub c_in: f64,
    pub c_out: f64,
    /// Norm factor Q = √(D_out(r₀)²·I_in + D_in(r₀)²·I_out) > 0.
    pub q: f64,
    /// ∫₀^{r₀} D_in² r dr.
    i_in: f64,
    /// ∫_{r₀}^{r_far} D_out² r dr.
    i_out: f64,
    /// Outer integration horizon: beyond it the density has decayed below
    /// 1e−18 of its peak.
    r_far: f64,
}

/// Failure modes of the normalization layer.
#[derive(Debug, thiserror::Error)]
pub enum WavefnError {
    #[error("quadrature failed: {0}")]
    QuadratureFailure(#[from] quad::QuadError),
    #[error("not an eigenvalue: {detail}")]
    NotAnEigenvalue { detail: String },
    #[error("node grid too coarse: {detail}")]
    GridTooCoarse { detail: String },
    #[error(transparent)]
    EvaluatorFailure(#[from] MatchingError),
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
}

/// Maximum derivative discontinuity tolerated at the rim, relative to the
/// larger one-sided derivative. A converged eigenvalue satisfies this with
/// orders to spare; violation means the input point was not a root.
const DERIVATIVE_JUMP_TOL: f64 = 1e-7;

/// Residual ceiling a point must satisfy before normalization.
const RESIDUAL_CEILING: f64 = 1e-9;

impl RadialSolution {
    /// R(r) and R′(r): inner branch for r ≤ r₀, outer beyond.
    pub fn eval(&self, r: f64) -> Result<(f64, f64), WavefnError> {
        let p = &self.point;
        if r <= p.r0 {
            let bv = matching::eval_inner(p.eps, p.m, p.r0, r)?;
            Ok((self.c_in * bv.value, self.c_in * bv.derivative))
        } else {
            let bv = matching::eval_outer(p.eps, p.m, p.r0, r)?;
            Ok((self.c_out * bv.value, self.c_out * bv.derivative))
        }
    }

    /// Outer integration horizon used during normalization.
    #[must_use]
    pub fn r_far(&self) -> f64 {
        self.r_far
    }
}

/// Normalize a matched eigenvalue into a radial solution.
///
/// Both branch norms are computed by adaptive quadrature (relative
/// tolerance 1e−10); the outer horizon starts at r₀ + max(8, 4√max(ε,1))
/// — an e^{−r²/4} decay budget for 1e−18 tails — and is pushed out until
/// the integrand has actually fallen that far. The derivative continuity
/// check at the rim re-verifies that the input was a genuine eigenvalue.
pub fn normalize(point: SpectralPoint) -> Result<RadialSolution, WavefnError> {
    if !(point.r0 > 0.0 && point.r0.is_finite()) {
        return Err(WavefnError::InvalidParameter(
            "normalization needs r0 > 0 (the r0 = 0 spectrum is closed-form)",
        ));
    }
    if !(point.residual <= RESIDUAL_CEILING) {
        return Err(WavefnError::NotAnEigenvalue {
            detail: format!(
                "matching residual {:.3e} exceeds {RESIDUAL_CEILING:.0e}",
                point.residual
            ),
        });
    }
    let (eps, m, r0) = (point.eps, point.m, point.r0);

    let inner_rim = matching::eval_inner(eps, m, r0, r0)?;
    let outer_rim = matching::eval_outer(eps, m, r0, r0)?;

    let i_in = quad::integrate(
        |r| {
            let v = matching::eval_inner(eps, m, r0, r)
                .map(|bv| bv.value)
                .unwrap_or(f64::NAN);
            v * v * r
        },
        0.0,
        r0,
        1e-10,
        f64::MIN_POSITIVE,
    )?
    .value;

    // Outer horizon: decay-budget start, then extend until the density is
    // genuinely negligible relative to its rim-side peak.
    let mut r_far = r0 + (4.0 * eps.max(1.0).sqrt()).max(8.0);
    let density = |r: f64| -> f64 {
        matching::eval_outer(eps, m, r0, r)
            .map(|bv| bv.value * bv.value * r)
            .unwrap_or(f64::NAN)
    };
    let peak = (0..=16)
        .map(|i| density(r0 + (r_far - r0) * f64::from(i) / 16.0))
        .fold(0.0f64, f64::max);
    for _ in 0..20 {
        if density(r_far) <= 1e-18 * peak {
            break;
        }
        r_far += 2.0;
    }
    let i_out = quad::integrate(density, r0, r_far, 1e-10, f64::MIN_POSITIVE)?.value;

    if !(i_in.is_finite() && i_out.is_finite() && i_in >= 0.0 && i_out >= 0.0) {
        return Err(WavefnError::NotAnEigenvalue {
            detail: "branch norms are not finite nonnegative numbers".into(),
        });
    }

    // Continuity constants; if the rim happens to sit on a node of both
    // branches the value pair degenerates and the derivative pair (equal at
    // an eigenvalue) carries the same information.
    let value_scale = inner_rim.value.abs() * outer_rim.value.abs();
    let deriv_scale = inner_rim.derivative.abs() * outer_rim.derivative.abs();
    let (u, v) = if value_scale >= 1e-12 * deriv_scale {
        (outer_rim.value, inner_rim.value)
    } else {
        (outer_rim.derivative, inner_rim.derivative)
    };
    let q = (u * u * i_in + v * v * i_out).sqrt();
    if !(q > 0.0) {
        return Err(WavefnError::NotAnEigenvalue {
            detail: "norm factor Q vanished".into(),
        });
    }
    let (mut c_in, mut c_out) = (u / q, v / q);
    // Global sign: the inner branch has positive leading coefficient, so
    // C_in > 0 makes R positive at the origin side.
    if c_in < 0.0 || (c_in == 0.0 && c_out < 0.0) {
        c_in = -c_in;
        c_out = -c_out;
    }

    let jump = (c_in * inner_rim.derivative - c_out * outer_rim.derivative).abs();
    let scale = (c_in * inner_rim.derivative)
        .abs()
        .max((c_out * outer_rim.derivative).abs());
    if jump > DERIVATIVE_JUMP_TOL * scale.max(f64::MIN_POSITIVE) {
        return Err(WavefnError::NotAnEigenvalue {
            detail: format!(
                "derivative jump {:.3e} relative at the rim",
                jump / scale.max(f64::MIN_POSITIVE)
            ),
        });
    }

    Ok(RadialSolution {
        point,
        c_in,
        c_out,
        q,
        i_in,
        i_out,
        r_far,
    })
}

/// Radial probability density r·R(r)² at each sample.
pub fn density(sol: &RadialSolution, r_samples: &[f64]) -> Result<Vec<f64>, WavefnError> {
    r_samples
        .iter()
        .map(|&r| {
            if r < 0.0 {
                return Err(WavefnError::InvalidParameter("density needs r ≥ 0"));
            }
            if r == 0.0 {
                return Ok(0.0);
            }
            let (val, _) = sol.eval(r)?;
            Ok(r * val * val)
        })
        .collect()
}

/// Probability of finding the particle inside the rim,
/// P_in = C_in²·∫₀^{r₀} D_in² r dr ∈ [0, 1].
#[must_use]
pub fn p_inside(sol: &RadialSolution) -> f64 {
    sol.c_in * sol.c_in * sol.i_in
}

/// Mean radius ⟨r⟩ = ∫₀^∞ r·(r R²) dr of the normalized state.
pub fn mean_radius(sol: &RadialSolution) -> Result<f64, WavefnError> {
    let p = &sol.point;
    let (eps, m, r0) = (p.eps, p.m, p.r0);
    let inner = quad::integrate(
        |r| {
            matching::eval_inner(eps, m, r0, r)
                .map(|bv| bv.value * bv.value * r * r)
                .unwrap_or(f64::NAN)
        },
        0.0,
        r0,
        1e-9,
        f64::MIN_POSITIVE,
    )?
    .value;
    let outer = quad::integrate(
        |r| {
            matching::eval_outer(eps, m, r0, r)
                .map(|bv| bv.value * bv.value * r * r)
                .unwrap_or(f64::NAN)
        },
        r0,
        sol.r_far,
        1e-9,
        f64::MIN_POSITIVE,
    )?
    .value;
    Ok(sol.c_in * sol.c_in * inner + sol.c_out * sol.c_out * outer)
}

/// Count the radial nodes of R on (0, r_far).
///
/// The profile is sampled at step min(0.02, r₀/50); each sign change is
/// confirmed by bisection, and the whole count is repeated at half the
/// step. A disagreement means two changes hid inside one step, which is
/// reported as [`WavefnError::GridTooCoarse`] rather than silently
/// mislabeled.
pub fn count_nodes(sol: &RadialSolution) -> Result<u32, WavefnError> {
    let p = &sol.point;
    let step = (p.r0 / 50.0).min(0.02);
    let coarse = count_nodes_at_step(sol, step)?;
    let fine = count_nodes_at_step(sol, 0.5 * step)?;
    if coarse != fine {
        return Err(WavefnError::GridTooCoarse {
            detail: format!(
                "count changed from {coarse} to {fine} when the step was halved"
            ),
        });
    }
    Ok(coarse)
}

/// Single-pass node count at a fixed sampling step, bisection-confirming
/// every candidate sign change.
fn count_nodes_at_step(sol: &RadialSolution, step: f64) -> Result<u32, WavefnError> {
    let p = &sol.point;
    let sp = model::spectral_params(p.eps, p.m, p.r0);
    let s = f64::from(p.m.unsigned_abs());

    // Inner classical turning point of the outer region. A rim buried deep
    // below it makes the inward ODE sweep useless near r₀ (the parasitic
    // r^(−|m|) mode dominates), and no node can live below the turning
    // point anyway, so in that regime only the outer branch beyond
    // 0.6·r_cent is sampled.
    let eps_eff = p.eps + 0.25 * p.r0 * p.r0;
    let r_cent = if p.m == 0 || eps_eff <= s {
        0.0
    } else {
        (2.0 * eps_eff - 2.0 * (eps_eff * eps_eff - s * s).sqrt()).sqrt()
    };
    let deep_rim = p.r0 < 0.7 * r_cent;

    // Sample both branches through the shared integration profiles (one
    // pass each), scaled by the continuity constants.
    let rs_in: Vec<f64> = if deep_rim {
        Vec::new()
    } else {
        let n_in = (p.r0 / step).ceil().max(2.0) as usize;
        (1..=n_in).map(|i| p.r0 * i as f64 / n_in as f64).collect()
    };
    let r_lo = if deep_rim { 0.6 * r_cent } else { p.r0 };
    let n_out = ((sol.r_far - r_lo) / step).ceil().max(2.0) as usize;
    let rs_out: Vec<f64> = (1..=n_out)
        .map(|i| r_lo + (sol.r_far - r_lo) * i as f64 / n_out as f64)
        .collect();
    let inner = matching::inner_profile(&sp, s, &rs_in)?;
    let outer = matching::outer_profile(&sp, s, &rs_out)?;

    let rs: Vec<f64> = rs_in.iter().chain(rs_out.iter()).copied().collect();
    let vals: Vec<f64> = inner
        .iter()
        .map(|y| sol.c_in * y[0])
        .chain(outer.iter().map(|y| sol.c_out * y[0]))
        .collect();

    let peak = vals.iter().fold(0.0f64, |acc, &x| acc.max(x.abs()));
    let floor = 1e-8 * peak;
    let mut count = 0u32;
    let mut prev: Option<(f64, f64)> = None;
    for (&r, &x) in rs.iter().zip(&vals) {
        if x.abs() <= floor {
            continue;
        }
        if let Some((r_prev, x_prev)) = prev {
            if x_prev * x < 0.0 {
                confirm_single_crossing(sol, r_prev, r, x_prev, x)?;
                count += 1;
            }
        }
        prev = Some((r, x));
    }
    Ok(count)
}

/// Bisect a sign-changing interval down to 1e−12 and verify by subdivision
/// that it holds exactly one crossing.
fn confirm_single_crossing(
    sol: &RadialSolution,
    mut a: f64,
    mut b: f64,
    mut fa: f64,
    fb: f64,
) -> Result<(), WavefnError> {
    // Subdivide the interval: more than one sign change inside means the
    // sampling step straddled a pair of nodes.
    let mut changes = 0;
    let mut prev = fa;
    for i in 1..=8 {
        let r = a + (b - a) * f64::from(i) / 8.0;
        let (val, _) = sol.eval(r)?;
        if prev * val < 0.0 {
            changes += 1;
        }
        if val != 0.0 {
            prev = val;
        }
    }
    if changes > 1 {
        return Err(WavefnError::GridTooCoarse {
            detail: format!("{changes} crossings inside one step near r = {a:.6}"),
        });
    }
    let _ = fb;
    // Bisection: the crossing is genuine if the bracket keeps shrinking
    // onto it with consistent signs.
    while b - a > 1e-12 {
        let mid = 0.5 * (a + b);
        let (fm, _) = sol.eval(mid)?;
        if fm == 0.0 {
            return Ok(());
        }
        if fa * fm < 0.0 {
            b = mid;
        } else {
            a = mid;
            fa = fm;
        }
    }
    Ok(())
}

/// Absolute difference between the finite-difference slope of ε(r₀) and the
/// Hellmann–Feynman form (r₀/2)(2P_in − 1), both computed independently.
///
/// The central difference uses the labeled level at r₀ ± h; the probability
/// side normalizes the state at r₀ itself. Small residuals certify that
/// eigenvalues, normalization, and quadrature are mutually consistent.
pub fn hf_residual(m: i32, n_r: u32, r0: f64, h: f64) -> Result<f64, WavefnError> {
    if !(1e-4..=1e-2).contains(&h) {
        return Err(WavefnError::InvalidParameter(
            "finite-difference step must lie in [1e-4, 1e-2]",
        ));
    }
    if r0 - h <= 0.0 {
        return Err(WavefnError::InvalidParameter(
            "need r0 − h > 0 for the central difference",
        ));
    }
    let count = n_r as usize + 1;
    let eps_plus = matching::find_levels(m, r0 + h, count)?[n_r as usize].eps;
    let eps_minus = matching::find_levels(m, r0 - h, count)?[n_r as usize].eps;
    let slope_fd = (eps_plus - eps_minus) / (2.0 * h);

    let sol = normalize(matching::find_levels(m, r0, count)?[n_r as usize])?;
    let slope_hf = 0.5 * r0 * (2.0 * p_inside(&sol) - 1.0);
    Ok((slope_fd - slope_hf).abs())
}
