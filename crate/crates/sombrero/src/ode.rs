//! Adaptive Dormand–Prince 5(4) integration for two-component radial systems.
//!
//! The radial equations handled here are second-order, so the state is the
//! pair y = (R, R'). The embedded 4th-order solution supplies a per-step
//! error estimate; steps are accepted when the weighted error norm is below
//! one and the step size follows the usual 1/5-power rule. Integration
//! direction is inferred from the endpoints, so inward (decreasing r) sweeps
//! work unchanged.

/// Two-component state vector (function value and first derivative).
pub type State = [f64; 2];

/// Failure modes of the adaptive stepper.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OdeError {
    #[error("step size underflow at t = {t} (|h| = {h:.3e})")]
    StepSizeUnderflow { t: f64, h: f64 },
    #[error("step budget exhausted after {steps} steps at t = {t}")]
    TooManySteps { steps: usize, t: f64 },
    #[error("right-hand side returned a non-finite value at t = {t}")]
    NonFiniteRhs { t: f64 },
}

// Dormand–Prince 5(4) tableau.
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// Difference between the 5th- and embedded 4th-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const MAX_STEPS: usize = 2_000_000;

#[inline]
fn axpy(y: State, h: f64, terms: &[(f64, State)]) -> State {
    let mut out = y;
    for &(c, k) in terms {
        out[0] += h * c * k[0];
        out[1] += h * c * k[1];
    }
    out
}

/// Integrate y' = f(t, y) from `t0` to `t_end` starting at `y0`.
///
/// `rtol` controls the relative accuracy per step against the combined scale
/// |R| + |R'|, which keeps the controller from stalling where one component
/// crosses zero; `atol` is an absolute floor for solutions passing through
/// zero overall.
pub fn integrate<F>(f: F, t0: f64, y0: State, t_end: f64, rtol: f64, atol: f64) -> Result<State, OdeError>
where
    F: Fn(f64, State) -> State,
{
    if t0 == t_end {
        return Ok(y0);
    }
    let span = t_end - t0;
    let dir = span.signum();
    let mut t = t0;
    let mut y = y0;
    let mut k1 = f(t, y);
    let mut h = dir * (0.01 * span.abs()).min(0.1).max(1e-6);

    for step in 0..MAX_STEPS {
        if !(k1[0].is_finite() && k1[1].is_finite()) {
            return Err(OdeError::NonFiniteRhs { t });
        }
        // Do not step past the endpoint.
        if (t + h - t_end) * dir > 0.0 {
            h = t_end - t;
        }
        if h.abs() < 1e-14 * t.abs().max(span.abs()) {
            // Arrived within a few ulps of the endpoint: advancing the state
            // over what remains would change it by less than roundoff, so
            // the current state is the answer. Grids sometimes request a
            // point one ulp past the seed radius, which lands here.
            if (t - t_end).abs() <= 1e-13 * t.abs().max(t_end.abs()).max(span.abs()) {
                return Ok(y);
            }
            return Err(OdeError::StepSizeUnderflow { t, h });
        }

        let k2 = f(t + C2 * h, axpy(y, h, &[(A21, k1)]));
        let k3 = f(t + C3 * h, axpy(y, h, &[(A31, k1), (A32, k2)]));
        let k4 = f(t + C4 * h, axpy(y, h, &[(A41, k1), (A42, k2), (A43, k3)]));
        let k5 = f(
            t + C5 * h,
            axpy(y, h, &[(A51, k1), (A52, k2), (A53, k3), (A54, k4)]),
        );
        let k6 = f(
            t + h,
            axpy(y, h, &[(A61, k1), (A62, k2), (A63, k3), (A64, k4), (A65, k5)]),
        );
        let y_new = axpy(y, h, &[(B1, k1), (B3, k3), (B4, k4), (B5, k5), (B6, k6)]);
        let k7 = f(t + h, y_new);

        let err = [
            h * (E1 * k1[0] + E3 * k3[0] + E4 * k4[0] + E5 * k5[0] + E6 * k6[0] + E7 * k7[0]),
            h * (E1 * k1[1] + E3 * k3[1] + E4 * k4[1] + E5 * k5[1] + E6 * k6[1] + E7 * k7[1]),
        ];
        let scale = atol
            + rtol
                * (y[0].abs().max(y_new[0].abs()) + y[1].abs().max(y_new[1].abs()));
        let err_norm = err[0].abs().max(err[1].abs()) / scale;

        if err_norm <= 1.0 || !err_norm.is_finite() {
            if !err_norm.is_finite() {
                return Err(OdeError::NonFiniteRhs { t: t + h });
            }
            t += h;
            y = y_new;
            k1 = k7; // first-same-as-last
            if (t - t_end).abs() <= f64::EPSILON * span.abs().max(t.abs()) || t == t_end {
                return Ok(y);
            }
        }
        let factor = if err_norm > 0.0 {
            (0.9 * err_norm.powf(-0.2)).clamp(0.2, 5.0)
        } else {
            5.0
        };
        h *= factor;
        let _ = step;
    }
    Err(OdeError::TooManySteps {
        steps: MAX_STEPS,
        t,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator_round_trip() {
        // y'' = -y starting at (1, 0) returns to (1, 0) after 2*pi.
        let f = |_t: f64, y: State| [y[1], -y[0]];
        let y = integrate(f, 0.0, [1.0, 0.0], 2.0 * std::f64::consts::PI, 1e-12, 1e-14).unwrap();
        assert!((y[0] - 1.0).abs() < 1e-9, "cos(2pi) = {}", y[0]);
        assert!(y[1].abs() < 1e-9, "sin'(2pi) = {}", y[1]);
    }

    #[test]
    fn backward_integration_recovers_start() {
        let f = |_t: f64, y: State| [y[1], -y[0]];
        let fwd = integrate(f, 0.0, [1.0, 0.0], 3.7, 1e-12, 1e-14).unwrap();
        let back = integrate(f, 3.7, fwd, 0.0, 1e-12, 1e-14).unwrap();
        assert!((back[0] - 1.0).abs() < 1e-9 && back[1].abs() < 1e-9);
    }

    #[test]
    fn exponential_growth_accuracy() {
        // y'' = y with y = e^t: relative accuracy must hold over growth by e^8.
        let f = |_t: f64, y: State| [y[1], y[0]];
        let y = integrate(f, 0.0, [1.0, 1.0], 8.0, 1e-12, 0.0).unwrap();
        let exact = 8.0f64.exp();
        let rel = (y[0] - exact).abs() / exact;
        assert!(rel < 1e-9, "e^8 rel err {rel:.3e}");
    }

    #[test]
    fn one_ulp_span_returns_the_seed_state() {
        // A grid can ask for a point one ulp past the start; that must be
        // treated as arrival, not a step-size underflow.
        let f = |_t: f64, y: State| [y[1], -y[0]];
        let t0 = 0.02f64;
        let t1 = f64::from_bits(t0.to_bits() + 1);
        let y = integrate(f, t0, [1.0, 2.0], t1, 1e-11, 1e-300).unwrap();
        assert_eq!(y, [1.0, 2.0]);
    }

    #[test]
    fn zero_rhs_lands_exactly_on_the_endpoint() {
        let f = |_t: f64, _y: State| [0.0, 0.0];
        let y = integrate(f, 0.0, [2.0, -1.0], 5.0, 1e-12, 0.0).unwrap();
        assert_eq!(y, [2.0, -1.0]);
    }

    #[test]
    fn airy_type_equation_against_series() {
        // y'' = t*y, y(0) = 1, y'(0) = 0 has the even Maclaurin series
        // 1 + t^3/6 + t^6/180 + t^9/12960 + ... ; compare at t = 1.
        let f = |t: f64, y: State| [y[1], t * y[0]];
        let y = integrate(f, 0.0, [1.0, 0.0], 1.0, 1e-12, 1e-14).unwrap();
        let mut series = 0.0;
        let mut term = 1.0;
        for k in 0..30 {
            series += term;
            let k = k as f64;
            term /= (3.0 * k + 2.0) * (3.0 * k + 3.0);
        }
        let rel = (y[0] - series).abs() / series;
        assert!(rel < 1e-10, "airy-type rel err {rel:.3e}");
    }
}
