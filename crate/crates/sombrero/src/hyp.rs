//! Confluent hypergeometric kernels for the matched radial solutions.
//!
//! Two functions are needed. The regular Kummer function F(a, b; z) enters
//! the inner (inverted-oscillator) solution with a complex first parameter
//! and purely imaginary argument; it is summed by its power series with
//! compensated accumulation and a cancellation monitor, because for
//! imaginary z the partial sums swell like e^|z| while the result stays
//! O(1), costing roughly 0.43·|z| decimal digits. The Tricomi function
//! U(a, b; z) enters the outer (decaying) solution with a real, often
//! negative first parameter; for a > 0 it is evaluated through its Laplace
//! integral representation Γ(a)·U(a,b;z) = ∫₀^∞ e^{−zt} t^{a−1} (1+t)^{b−a−1} dt
//! by adaptive quadrature, and for a ≤ 0 by the three-term recurrence in a,
//! run downward from quadrature seeds. Downward is the stable direction:
//! U is the minimal solution of that recurrence as a → +∞, so decreasing a
//! moves away from the minimal direction and keeps relative errors bounded.

use num_complex::Complex64;

use crate::quad;

/// Largest argument magnitude accepted by the Kummer series. Beyond this the
/// imaginary-argument cancellation (≈ 0.43·|z| digits) would leave nothing.
pub const Z_MAX: f64 = 50.0;

/// Hard cap on the number of series terms.
pub const MAX_TERMS: usize = 600;

/// Decimal digits carried by f64 (log10 of 2^53).
pub const DIGITS_F64: f64 = 15.95;

/// Minimum digits that must survive cancellation for a series result.
pub const MIN_SURVIVING_DIGITS: f64 = 6.0;

/// Relative tail bound for series termination (three consecutive hits).
const TAIL_REL: f64 = 1e-16;

/// A complex function evaluation with accuracy telemetry.
#[derive(Debug, Clone, Copy)]
pub struct HypEval {
    /// The function value.
    pub value: Complex64,
    /// Decimal digits lost to cancellation, log10(peak partial / |value|).
    /// Zero for non-series evaluation paths.
    pub cancellation_digits: f64,
    /// Series terms summed, or integrand evaluations for quadrature paths.
    pub terms_used: usize,
}

/// A real function evaluation with the same telemetry as [`HypEval`].
#[derive(Debug, Clone, Copy)]
pub struct HypEvalReal {
    pub value: f64,
    pub cancellation_digits: f64,
    pub terms_used: usize,
}

/// Failure modes of the hypergeometric evaluators.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum HypError {
    #[error("series cancellation too severe: ~{lost_digits:.1} digits lost, {surviving_digits:.1} surviving (< {MIN_SURVIVING_DIGITS})")]
    CancellationExceeded {
        lost_digits: f64,
        surviving_digits: f64,
    },
    #[error("series did not converge within {terms} terms")]
    NoConvergence { terms: usize },
    #[error("Tricomi integral quadrature failed: {source}")]
    QuadratureFailure {
        #[from]
        source: quad::QuadError,
    },
    #[error("downward recurrence lost the solution near a = {at_a}")]
    RecurrenceUnstable { at_a: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
}

// ---------------------------------------------------------------------------
// Gamma function (Lanczos, g = 7, n = 9)
// ---------------------------------------------------------------------------

/// Lanczos coefficients (Godfrey's g = 7, n = 9 set).
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Γ(x) for x > 0 by the Lanczos approximation (reflection below 1/2).
/// Relative accuracy is about 1e-14 on (0, 30].
#[must_use]
pub fn gamma(x: f64) -> f64 {
    if x < 0.5 {
        // Reflection: Γ(x)·Γ(1−x) = π / sin(πx).
        return std::f64::consts::PI / ((std::f64::consts::PI * x).sin() * gamma(1.0 - x));
    }
    let z = x - 1.0;
    let mut sum = LANCZOS_COEFFS[0];
    for (i, &c) in LANCZOS_COEFFS[1..].iter().enumerate() {
        sum += c / (z + (i as f64) + 1.0);
    }
    let t = z + 7.5; // z + g + 0.5
    (2.0 * std::f64::consts::PI).sqrt() * t.powf(z + 0.5) * (-t).exp() * sum
}

// ---------------------------------------------------------------------------
// Compensated summation
// ---------------------------------------------------------------------------

/// Neumaier-compensated accumulator: the compensation term also catches the
/// case where the incoming term is larger than the running sum.
#[derive(Debug, Clone, Copy, Default)]
struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    #[inline]
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

// ---------------------------------------------------------------------------
// Kummer function F(a, b; z)
// ---------------------------------------------------------------------------

/// Regular confluent hypergeometric function F(a, b; z) by direct series
/// with compensated summation.
///
/// The second parameter must not be a non-positive integer and |z| must not
/// exceed [`Z_MAX`]. The returned telemetry reports how many decimal digits
/// were lost to cancellation between the swelling partial sums and the final
/// value; if fewer than [`MIN_SURVIVING_DIGITS`] digits survive the result is
/// withheld as [`HypError::CancellationExceeded`].
pub fn kummer_m(a: Complex64, b: f64, z: Complex64) -> Result<HypEval, HypError> {
    if !(a.is_finite() && b.is_finite() && z.is_finite()) {
        return Err(HypError::InvalidParameter("non-finite argument"));
    }
    if b <= 0.0 && b.fract() == 0.0 {
        return Err(HypError::InvalidParameter(
            "second parameter must not be a non-positive integer",
        ));
    }
    let zn = z.norm();
    if zn > Z_MAX {
        // A priori worst-case estimate for imaginary arguments.
        let lost = 0.43 * zn;
        return Err(HypError::CancellationExceeded {
            lost_digits: lost,
            surviving_digits: DIGITS_F64 - lost,
        });
    }
    if zn == 0.0 {
        return Ok(HypEval {
            value: Complex64::new(1.0, 0.0),
            cancellation_digits: 0.0,
            terms_used: 0,
        });
    }

    let mut term = Complex64::new(1.0, 0.0);
    let mut re = Neumaier::default();
    let mut im = Neumaier::default();
    re.add(1.0);
    let mut peak: f64 = 1.0;
    let mut small_run = 0u32;

    for k in 0..MAX_TERMS {
        let kf = k as f64;
        term = term * (a + kf) * z / ((b + kf) * (kf + 1.0));
        re.add(term.re);
        im.add(term.im);
        let partial = Complex64::new(re.value(), im.value());
        let snorm = partial.norm();
        let tnorm = term.norm();
        peak = peak.max(snorm).max(tnorm);
        if tnorm <= TAIL_REL * snorm.max(f64::MIN_POSITIVE) {
            small_run += 1;
            if small_run >= 3 {
                return finish_series(partial, peak, k + 1);
            }
        } else {
            small_run = 0;
        }
    }
    Err(HypError::NoConvergence { terms: MAX_TERMS })
}

fn finish_series(value: Complex64, peak: f64, terms: usize) -> Result<HypEval, HypError> {
    let vnorm = value.norm();
    if vnorm == 0.0 || !vnorm.is_finite() {
        return Err(HypError::CancellationExceeded {
            lost_digits: f64::INFINITY,
            surviving_digits: f64::NEG_INFINITY,
        });
    }
    let lost = (peak / vnorm).log10().max(0.0);
    let surviving = DIGITS_F64 - lost;
    if surviving < MIN_SURVIVING_DIGITS {
        return Err(HypError::CancellationExceeded {
            lost_digits: lost,
            surviving_digits: surviving,
        });
    }
    Ok(HypEval {
        value,
        cancellation_digits: lost,
        terms_used: terms,
    })
}

/// Derivative of the Kummer function: d/dz F(a, b; z) = (a/b)·F(a+1, b+1; z).
pub fn kummer_m_prime(a: Complex64, b: f64, z: Complex64) -> Result<HypEval, HypError> {
    let shifted = kummer_m(a + 1.0, b + 1.0, z)?;
    Ok(HypEval {
        value: a * shifted.value / b,
        ..shifted
    })
}

// ---------------------------------------------------------------------------
// Tricomi function U(a, b; z)
// ---------------------------------------------------------------------------

/// Tricomi confluent hypergeometric function U(a, b; z) for real a, b ≥ 1,
/// z > 0.
///
/// For a > 0 the Laplace integral is split at t = 1 (and at the integrand
/// peak t = (a−1)/z when a > 1); the head substitutes t = u^(1/a) when a < 1
/// to absorb the algebraic endpoint singularity, and the tail substitutes
/// w = e^{−zt}, which removes the exponential exactly. For a ≤ 0 the value
/// is reached by downward recurrence from quadrature seeds at a + N ∈ [1, 2);
/// see the module docs for why downward is the stable direction.
pub fn tricomi_u(a: f64, b: f64, z: f64) -> Result<HypEvalReal, HypError> {
    if !(a.is_finite() && b.is_finite() && z.is_finite()) {
        return Err(HypError::InvalidParameter("non-finite argument"));
    }
    if b < 1.0 {
        return Err(HypError::InvalidParameter("second parameter must be ≥ 1"));
    }
    if z <= 0.0 {
        return Err(HypError::InvalidParameter("argument must be positive"));
    }
    if a == 0.0 {
        // U(0, b; z) = 1 identically: zero-length recurrence.
        return Ok(HypEvalReal {
            value: 1.0,
            cancellation_digits: 0.0,
            terms_used: 0,
        });
    }
    if a > 0.0 {
        let (value, evals) = tricomi_integral(a, b, z)?;
        return Ok(HypEvalReal {
            value,
            cancellation_digits: 0.0,
            terms_used: evals,
        });
    }
    // a < 0: lift to the seed window [1, 2) and recur downward.
    let steps = (1.0 - a).ceil();
    let a_top = a + steps;
    let (u_top, evals_top) = tricomi_integral(a_top, b, z)?;
    let (u_above, evals_above) = tricomi_integral(a_top + 1.0, b, z)?;
    let value = recurrence_down(b, z, a_top, u_top, u_above, steps as usize)?;
    Ok(HypEvalReal {
        value,
        cancellation_digits: 0.0,
        terms_used: evals_top + evals_above + steps as usize,
    })
}

/// Derivative of the Tricomi function:
/// d/dz U(a, b; z) = −a·U(a+1, b+1; z).
pub fn tricomi_u_prime(a: f64, b: f64, z: f64) -> Result<HypEvalReal, HypError> {
    if a == 0.0 {
        // U(0, b; z) = 1 is constant.
        return Ok(HypEvalReal {
            value: 0.0,
            cancellation_digits: 0.0,
            terms_used: 0,
        });
    }
    let shifted = tricomi_u(a + 1.0, b + 1.0, z)?;
    Ok(HypEvalReal {
        value: -a * shifted.value,
        ..shifted
    })
}

/// Three-term recurrence in the first parameter, run downward:
/// U(a−1) = (2a − b + z)·U(a) − a·(a − b + 1)·U(a+1).
///
/// In the stable direction the magnitudes should not decay persistently;
/// a sustained shrink means the iteration is tracking a minimal solution
/// and the result would be garbage.
fn recurrence_down(
    b: f64,
    z: f64,
    a_top: f64,
    u_top: f64,
    u_above: f64,
    steps: usize,
) -> Result<f64, HypError> {
    let mut a_cur = a_top;
    let mut u = u_top; // U(a_cur)
    let mut u_up = u_above; // U(a_cur + 1)
    let mut running_max = u.abs().max(u_up.abs());
    let mut shrink_run = 0u32;
    for _ in 0..steps {
        let next = (2.0 * a_cur - b + z) * u - a_cur * (a_cur - b + 1.0) * u_up;
        if !next.is_finite() {
            return Err(HypError::RecurrenceUnstable { at_a: a_cur - 1.0 });
        }
        if next.abs() < 1e-6 * running_max {
            shrink_run += 1;
            if shrink_run >= 3 {
                return Err(HypError::RecurrenceUnstable { at_a: a_cur - 1.0 });
            }
        } else {
            shrink_run = 0;
        }
        running_max = running_max.max(next.abs());
        u_up = u;
        u = next;
        a_cur -= 1.0;
    }
    Ok(u)
}

/// Laplace-integral evaluation of U(a, b; z) for a > 0.
/// Returns (value, integrand evaluations).
fn tricomi_integral(a: f64, b: f64, z: f64) -> Result<(f64, usize), HypError> {
    let pow_exp = b - a - 1.0;
    // Split point: beyond max(1, twice the integrand peak) the tail map takes over.
    let t_break = if a > 1.0 {
        (2.0 * (a - 1.0) / z).max(1.0)
    } else {
        1.0
    };

    // Head piece on [0, t_break].
    let head = |rel: f64, floor: f64| -> Result<quad::QuadResult, quad::QuadError> {
        if a < 1.0 {
            // t = u^(1/a) absorbs the t^(a-1) endpoint singularity exactly.
            let inv_a = 1.0 / a;
            quad::integrate(
                |u| {
                    let t = u.powf(inv_a);
                    (-z * t).exp() * (1.0 + t).powf(pow_exp) * inv_a
                },
                0.0,
                1.0,
                rel,
                floor,
            )
        } else {
            quad::integrate(
                |t| (-z * t).exp() * t.powf(a - 1.0) * (1.0 + t).powf(pow_exp),
                0.0,
                t_break,
                rel,
                floor,
            )
        }
    };

    // Tail piece on [t_break, ∞): substitute w = e^{−zt}.
    let w_hi = (-z * t_break).exp();
    let tail = |rel: f64, floor: f64| -> Result<quad::QuadResult, quad::QuadError> {
        if w_hi == 0.0 {
            return Ok(quad::QuadResult {
                value: 0.0,
                error: 0.0,
                evals: 0,
            });
        }
        quad::integrate(
            |w| {
                let t = -w.ln() / z;
                t.powf(a - 1.0) * (1.0 + t).powf(pow_exp) / z
            },
            0.0,
            w_hi,
            rel,
            floor,
        )
    };

    // Cheap scale pass so each piece gets an absolute floor tied to the total.
    let rough = head(1e-2, 0.0)?.value + tail(1e-2, 0.0)?.value;
    let floor = 1e-14 * rough.abs().max(f64::MIN_POSITIVE);
    let h = head(1e-13, floor)?;
    let t = tail(1e-13, floor)?;
    Ok(((h.value + t.value) / gamma(a), h.evals + t.evals + 60))
}

/// Large-argument expansion U(a, b; z) ≈ z^{−a}·Σ_k (a)_k (a−b+1)_k / (k! (−z)^k),
/// summed to optimal truncation. Returns `None` when the best achievable
/// relative accuracy is worse than 1e−11. Used to seed inward integrations of
/// the outer radial equation and for cross-checks.
#[must_use]
pub fn tricomi_u_asym(a: f64, b: f64, z: f64) -> Option<f64> {
    if z <= 0.0 {
        return None;
    }
    let mut term = 1.0f64;
    let mut sum = 1.0f64;
    let mut best_rel = 1.0f64;
    for k in 1..80 {
        let kf = k as f64;
        let next = term * (a + kf - 1.0) * (a - b + kf) / (kf * (-z));
        if next.abs() >= term.abs() {
            // Divergence point of the asymptotic series: stop at the smallest term.
            break;
        }
        term = next;
        sum += term;
        best_rel = (term / sum).abs();
        if best_rel <= 1e-17 {
            break;
        }
    }
    if best_rel > 1e-11 {
        return None;
    }
    Some((-a * z.ln()).exp() * sum)
}
