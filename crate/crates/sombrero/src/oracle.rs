//! Independent finite-difference eigensolver for the radial problem.
//!
//! The substitution u = √r·R turns the radial equation into a single
//! one-dimensional Schrödinger form valid on both sides of the well rim,
//!
//! ```text
//!   −u″ + [ |r² − r₀²|/4 + (m² − ¼)/r² ]·u = ε·u ,
//! ```
//!
//! which is discretized on the staggered grid r_j = (j+½)h. Staggering keeps
//! every sample away from r = 0, so no origin boundary condition is needed
//! beyond the implicit u(−h/2) = 0 of the first matrix row. The result is a
//! symmetric tridiagonal matrix whose lowest eigenvalues are found by
//! Sturm-sequence bisection — the negative-pivot count of the LDLᵀ
//! factorization of T − λI counts eigenvalues below λ exactly, so no root
//! can be silently missed.
//!
//! This solver shares no code or method with the matched-solution spectrum
//! in [`crate::matching`]; its errors are plain O(h²) discretization errors
//! with no relation to series truncation or quadrature. Agreement between
//! the two is therefore a meaningful cross-check, and the values frozen into
//! tests elsewhere in this crate come from here.
//!
//! Two known accuracy caveats, both deliberate:
//! * for m = 0 the attractive −¼/r² term degrades the convergence order
//!   near the origin; Richardson extrapolation and a looser comparison
//!   tolerance absorb this;
//! * the kink of |r² − r₀²| at r₀ would cost an O(h) error if a grid point
//!   straddled it, so the step is nudged to place r₀ exactly on a cell face
//!   (midway between two samples), restoring O(h²).

use thiserror::Error;

/// Spectrum of the finite-difference discretization for one (m, r₀) pair.
#[derive(Debug, Clone)]
pub struct OracleSpectrum {
    /// Angular momentum quantum number.
    pub m: i32,
    /// Dimensionless well-minimum radius.
    pub r0: f64,
    /// Grid step actually used (the requested step nudged so that r₀ lands
    /// on a cell face; equal to the request when r₀ = 0).
    pub h: f64,
    /// Grid extent actually used (requested extent rounded up to a whole
    /// number of cells).
    pub r_max: f64,
    /// Lowest eigenvalues, strictly ascending.
    pub eigenvalues: Vec<f64>,
    /// Grid samples of the eigenvectors, same order as `eigenvalues`;
    /// filled on demand by [`OracleSpectrum::attach_eigenvectors`].
    pub eigenvectors: Option<Vec<Vec<f64>>>,
}

/// Failure modes of the finite-difference oracle.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("invalid grid: {reason}")]
    GridInvalid { reason: String },
}

/// Hard cap on the number of grid points (memory/time sanity bound).
const MAX_POINTS: usize = 2_000_000;

/// Relative noise floor below which eigenvector samples do not participate
/// in sign counting.
const SIGN_FLOOR_REL: f64 = 1e-8;

// ---------------------------------------------------------------------------
// Grid construction
// ---------------------------------------------------------------------------

/// A validated staggered grid together with the tridiagonal operator:
/// diagonal entries `diag`, constant off-diagonal −1/h² (stored squared).
struct Grid {
    diag: Vec<f64>,
    /// Square of the off-diagonal element, (1/h²)².
    e2: f64,
    /// Off-diagonal element itself, −1/h².
    e: f64,
    h: f64,
    r_max: f64,
}

fn build_grid(m: i32, r0: f64, h: f64, r_max: f64) -> Result<Grid, OracleError> {
    let fail = |reason: String| Err(OracleError::GridInvalid { reason });
    if !(r0.is_finite() && h.is_finite() && r_max.is_finite()) {
        return fail("non-finite grid parameter".into());
    }
    if r0 < 0.0 {
        return fail(format!("r0 = {r0} must be ≥ 0"));
    }
    if h <= 0.0 || h > 0.02 {
        return fail(format!("step h = {h} outside (0, 0.02]"));
    }
    if r_max < r0 + 10.0 {
        return fail(format!("extent r_max = {r_max} < r0 + 10 = {}", r0 + 10.0));
    }
    // Nudge the step so the potential kink falls on a cell face: with
    // r0 = k·h_eff the two neighboring samples sit symmetrically at
    // r0 ± h_eff/2 and the midpoint rule stays second order. Pointless when
    // the kink is within a couple of cells of the origin.
    let h_eff = if r0 >= 2.0 * h {
        r0 / (r0 / h).round()
    } else {
        h
    };
    let n = (r_max / h_eff).ceil() as usize;
    if n > MAX_POINTS {
        return fail(format!("grid would need {n} points (cap {MAX_POINTS})"));
    }
    let inv_h2 = 1.0 / (h_eff * h_eff);
    // Centrifugal diagonal c_j, chosen so that the discrete row exactly
    // annihilates the zero-energy envelope r^(|m|+1/2) — the function the
    // continuum operator annihilates. Sampling (m²−¼)/r² at cell centers
    // instead would realize the wrong boundary behavior at the origin: for
    // m = 0 the attraction −¼/r² is exactly critical, the naive matrix
    // acquires a spurious state collapsing like −0.02/h², and the physical
    // levels converge to the wrong limits. The envelope-exact diagonal
    // differs from the naive one by O(h²) away from the origin, so overall
    // second-order convergence (and Richardson) are unaffected.
    let s = f64::from(m.unsigned_abs()) + 0.5;
    let env = |j: isize| -> f64 {
        if j < 0 {
            0.0 // ghost sample: the row-0 boundary the matrix implies
        } else {
            ((j as f64 + 0.5) * h_eff).powf(s)
        }
    };
    let diag = (0..n)
        .map(|j| {
            let r = (j as f64 + 0.5) * h_eff;
            let ji = j as isize;
            let centrifugal =
                (env(ji + 1) - 2.0 * env(ji) + env(ji - 1)) * inv_h2 / env(ji);
            2.0 * inv_h2 + 0.25 * (r * r - r0 * r0).abs() + centrifugal
        })
        .collect();
    Ok(Grid {
        diag,
        e2: inv_h2 * inv_h2,
        e: -inv_h2,
        h: h_eff,
        r_max: n as f64 * h_eff,
    })
}

// ---------------------------------------------------------------------------
// Sturm counting and bisection
// ---------------------------------------------------------------------------

/// Number of eigenvalues of the tridiagonal operator strictly below λ:
/// negative pivots of the LDLᵀ recension q_j = (d_j − λ) − e²/q_{j−1}.
fn sturm_count(diag: &[f64], e2: f64, lambda: f64) -> usize {
    let mut count = 0usize;
    let mut q = 1.0f64;
    for (j, &d) in diag.iter().enumerate() {
        q = if j == 0 { d - lambda } else { (d - lambda) - e2 / q };
        if q == 0.0 {
            // Exact zero pivot: perturb; the ±1 ambiguity this resolves sits
            // exactly on an eigenvalue and is absorbed by bisection.
            q = f64::MIN_POSITIVE;
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Lowest `count` eigenvalues by bisection on the Sturm count.
fn bisect_lowest(diag: &[f64], e2: f64, count: usize) -> Vec<f64> {
    // Bracket all wanted eigenvalues. The operator is almost positive
    // definite (only the m = 0 centrifugal dip can push below zero), so the
    // downward search terminates immediately in practice.
    let mut lo = -1.0f64;
    while sturm_count(diag, e2, lo) > 0 {
        lo = lo * 4.0 - 1.0;
    }
    let mut hi = 16.0f64;
    while sturm_count(diag, e2, hi) < count {
        hi = hi * 1.8 + 8.0;
    }

    (0..count)
        .map(|k| {
            let (mut a, mut b) = (lo, hi);
            // Invariant: count(a) ≤ k < count(b).
            for _ in 0..200 {
                if b - a <= 1e-12 * b.abs().max(1.0) {
                    break;
                }
                let mid = 0.5 * (a + b);
                if sturm_count(diag, e2, mid) > k {
                    b = mid;
                } else {
                    a = mid;
                }
            }
            0.5 * (a + b)
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Public operations
// ---------------------------------------------------------------------------

/// Lowest `count` eigenvalues of the finite-difference radial problem.
///
/// `h` is the requested grid step (≤ 0.02; nudged to align the potential
/// kink, see the module docs) and `r_max` the requested extent (≥ r₀ + 10,
/// rounded up to a whole cell). Eigenvectors are not computed here; call
/// [`OracleSpectrum::attach_eigenvectors`] when they are needed.
pub fn fd_spectrum(
    m: i32,
    r0: f64,
    count: usize,
    h: f64,
    r_max: f64,
) -> Result<OracleSpectrum, OracleError> {
    if count == 0 {
        return Err(OracleError::GridInvalid {
            reason: "requested zero eigenvalues".into(),
        });
    }
    let grid = build_grid(m, r0, h, r_max)?;
    if count >= grid.diag.len() {
        return Err(OracleError::GridInvalid {
            reason: format!(
                "requested {count} eigenvalues from a {}-point grid",
                grid.diag.len()
            ),
        });
    }
    let eigenvalues = bisect_lowest(&grid.diag, grid.e2, count);
    debug_assert!(
        eigenvalues.windows(2).all(|w| w[0] < w[1]),
        "eigenvalues must be strictly ascending"
    );
    Ok(OracleSpectrum {
        m,
        r0,
        h: grid.h,
        r_max: grid.r_max,
        eigenvalues,
        eigenvectors: None,
    })
}

/// Number of finite-difference eigenvalues strictly below `eps`.
///
/// Exposes the Sturm count directly so the matched-solution solver can be
/// audited for missed or spurious roots.
pub fn count_below(
    m: i32,
    r0: f64,
    h: f64,
    r_max: f64,
    eps: f64,
) -> Result<usize, OracleError> {
    let grid = build_grid(m, r0, h, r_max)?;
    Ok(sturm_count(&grid.diag, grid.e2, eps))
}

/// Second-order Richardson extrapolation from steps h and h/2:
/// (4·ε_{h/2} − ε_h)/3.
#[must_use]
pub fn richardson(eps_h: f64, eps_h2: f64) -> f64 {
    (4.0 * eps_h2 - eps_h) / 3.0
}

impl OracleSpectrum {
    /// Compute grid samples of every eigenvector by inverse iteration and
    /// store them in `eigenvectors`.
    ///
    /// Each vector is normalized to unit maximum amplitude with its first
    /// significant sample positive, so repeated runs are bit-identical.
    pub fn attach_eigenvectors(&mut self) {
        let n = (self.r_max / self.h).round() as usize;
        // Rebuild the operator from the stored (already validated, already
        // aligned) grid; build_grid cannot fail on its own output.
        let grid = build_grid(self.m, self.r0, self.h, self.r_max)
            .expect("stored grid parameters must be valid");
        debug_assert_eq!(grid.diag.len(), n);
        let vectors = self
            .eigenvalues
            .iter()
            .map(|&lambda| inverse_iteration(&grid.diag, grid.e, lambda))
            .collect();
        self.eigenvectors = Some(vectors);
    }

    /// Grid abscissae r_j = (j+½)h matching the eigenvector samples.
    #[must_use]
    pub fn grid_points(&self) -> Vec<f64> {
        let n = (self.r_max / self.h).round() as usize;
        (0..n).map(|j| (j as f64 + 0.5) * self.h).collect()
    }
}

/// Interior sign changes of a grid-sampled function, ignoring samples below
/// a relative noise floor so that inverse-iteration residue in the
/// exponential tail cannot masquerade as a node.
#[must_use]
pub fn sign_changes(samples: &[f64]) -> usize {
    let peak = samples.iter().fold(0.0f64, |acc, &x| acc.max(x.abs()));
    let floor = SIGN_FLOOR_REL * peak;
    let mut count = 0;
    let mut prev: Option<f64> = None;
    for &x in samples {
        if x.abs() <= floor {
            continue;
        }
        if let Some(p) = prev {
            if p * x < 0.0 {
                count += 1;
            }
        }
        prev = Some(x);
    }
    count
}

/// One inverse-iteration eigenvector for an eigenvalue already converged to
/// near machine precision; (T − λI) is then almost singular, which is
/// exactly what makes a single solve amplify the wanted component.
fn inverse_iteration(diag: &[f64], e: f64, lambda: f64) -> Vec<f64> {
    let n = diag.len();
    // Deterministic start with generic overlap.
    let mut v: Vec<f64> = (0..n).map(|j| (0.7 * (j as f64 + 1.0)).sin()).collect();
    normalize_peak(&mut v);
    for _ in 0..4 {
        let w = solve_shifted_tridiagonal(diag, e, lambda, &v);
        v = w;
        normalize_peak(&mut v);
    }
    v
}

/// Scale to unit peak amplitude, first significant sample positive.
fn normalize_peak(v: &mut [f64]) {
    let peak = v.iter().fold(0.0f64, |acc, &x| acc.max(x.abs()));
    if peak == 0.0 {
        return;
    }
    let lead = v
        .iter()
        .copied()
        .find(|x| x.abs() > SIGN_FLOOR_REL * peak)
        .unwrap_or(1.0);
    let scale = lead.signum() / peak;
    for x in v.iter_mut() {
        *x *= scale;
    }
}

/// Solve (T − λI)·w = rhs for tridiagonal T (constant off-diagonal e) by
/// Gaussian elimination with partial pivoting. Pivoting introduces one
/// extra superdiagonal of fill; that is the price of staying stable when
/// the shift sits on top of an eigenvalue.
fn solve_shifted_tridiagonal(diag: &[f64], e: f64, lambda: f64, rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut b: Vec<f64> = diag.iter().map(|&d| d - lambda).collect(); // main
    let mut c = vec![e; n.saturating_sub(1)]; // first super
    let mut d2 = vec![0.0f64; n.saturating_sub(2).max(1)]; // second super (fill)
    let mut a = vec![e; n.saturating_sub(1)]; // sub
    let mut x: Vec<f64> = rhs.to_vec();

    for i in 0..n - 1 {
        if b[i].abs() < a[i].abs() {
            // Swap rows i and i+1.
            x.swap(i, i + 1);
            std::mem::swap(&mut b[i], &mut a[i]);
            // Row i's superdiagonal entries come from row i+1's (diag, super).
            let (bi1, ci1) = (b[i + 1], if i + 1 < n - 1 { c[i + 1] } else { 0.0 });
            let old_ci = c[i];
            c[i] = bi1;
            b[i + 1] = old_ci;
            if i < d2.len() {
                let old_d2 = d2[i];
                d2[i] = ci1;
                if i + 1 < n - 1 {
                    c[i + 1] = old_d2;
                }
            }
        }
        let pivot = if b[i] == 0.0 { f64::MIN_POSITIVE } else { b[i] };
        let factor = a[i] / pivot;
        b[i + 1] -= factor * c[i];
        if i < d2.len() && i + 1 < n - 1 {
            c[i + 1] -= factor * d2[i];
        }
        x[i + 1] -= factor * x[i];
    }

    // Back substitution over the two superdiagonals.
    for i in (0..n).rev() {
        let mut s = x[i];
        if i + 1 < n {
            s -= c[i] * x[i + 1];
        }
        if i + 2 < n && i < d2.len() {
            s -= d2[i] * x[i + 2];
        }
        let pivot = if b[i] == 0.0 { f64::MIN_POSITIVE } else { b[i] };
        x[i] = s / pivot;
    }
    x
}

// ---------------------------------------------------------------------------
// Golden-file emitter
// ---------------------------------------------------------------------------

/// Build the golden-reference CSV: for every (m, r₀, level count) case the
/// Richardson-extrapolated eigenvalues from steps `h` and `h/2`.
///
/// Columns: `m, r0, k, eps_extrapolated, h, r_max`, where `h` and `r_max`
/// are the effective step and extent of the coarse grid. Rows appear in the
/// given case order, ascending in k within each case, so output is
/// deterministic byte for byte.
pub fn golden_csv(cases: &[(i32, f64, usize)], h: f64) -> Result<String, OracleError> {
    let mut out = String::from("m,r0,k,eps_extrapolated,h,r_max\n");
    for &(m, r0, count) in cases {
        let r_max = r0 + 12.0;
        let coarse = fd_spectrum(m, r0, count, h, r_max)?;
        let fine = fd_spectrum(m, r0, count, h / 2.0, r_max)?;
        for k in 0..count {
            let eps = richardson(coarse.eigenvalues[k], fine.eigenvalues[k]);
            out.push_str(&format!(
                "{m},{r0},{k},{eps:.16e},{h_eff:.16e},{rm:.16e}\n",
                h_eff = coarse.h,
                rm = coarse.r_max,
            ));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Convenience: extrapolated lowest eigenvalues from steps h and h/2.
    fn extrapolated(m: i32, r0: f64, count: usize, h: f64, r_max: f64) -> Vec<f64> {
        let coarse = fd_spectrum(m, r0, count, h, r_max).unwrap();
        let fine = fd_spectrum(m, r0, count, h / 2.0, r_max).unwrap();
        coarse
            .eigenvalues
            .iter()
            .zip(&fine.eigenvalues)
            .map(|(&a, &b)| richardson(a, b))
            .collect()
    }

    #[test]
    fn richardson_fixed_point_is_identity() {
        assert_eq!(richardson(3.25, 3.25), 3.25);
    }

    #[test]
    fn flat_well_m1_levels_are_even_integers() {
        // r0 = 0 turns the potential into r²/4: levels 2(n_r+1) for m = 1.
        let eps = extrapolated(1, 0.0, 3, 0.01, 12.0);
        for (k, &e) in eps.iter().enumerate() {
            let exact = 2.0 * (k as f64 + 1.0);
            assert!(
                (e - exact).abs() < 1e-6,
                "m=1 level {k}: {e} vs {exact} (err {:.2e})",
                (e - exact).abs()
            );
        }
    }

    #[test]
    fn flat_well_m0_levels_are_odd_integers() {
        // m = 0 carries the critical −¼/r² attraction; the envelope-exact
        // centrifugal diagonal keeps it as clean as the m ≥ 1 cases.
        let eps = extrapolated(0, 0.0, 3, 0.008, 12.0);
        for (k, &e) in eps.iter().enumerate() {
            let exact = 2.0 * k as f64 + 1.0;
            assert!(
                (e - exact).abs() < 1e-6,
                "m=0 level {k}: {e} vs {exact} (err {:.2e})",
                (e - exact).abs()
            );
        }
    }

    #[test]
    fn sturm_count_is_consistent_with_returned_eigenvalues() {
        let spec = fd_spectrum(1, 2.0, 4, 0.01, 14.0).unwrap();
        let probe = 0.5 * (spec.eigenvalues[2] + spec.eigenvalues[3]);
        let below = count_below(1, 2.0, 0.01, 14.0, probe).unwrap();
        assert_eq!(below, 3, "three computed eigenvalues sit below the probe");
    }

    #[test]
    fn eigenvalues_are_strictly_ascending() {
        let spec = fd_spectrum(0, 3.0, 6, 0.01, 14.0).unwrap();
        assert!(spec.eigenvalues.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn eigenvector_node_count_matches_index() {
        let mut spec = fd_spectrum(1, 2.0, 4, 0.01, 14.0).unwrap();
        spec.attach_eigenvectors();
        let vecs = spec.eigenvectors.as_ref().unwrap();
        for (k, v) in vecs.iter().enumerate() {
            assert_eq!(
                sign_changes(v),
                k,
                "eigenvector {k} must have exactly {k} interior nodes"
            );
        }
    }

    #[test]
    fn eigenvector_satisfies_the_discrete_equation() {
        let mut spec = fd_spectrum(2, 1.5, 2, 0.01, 14.0).unwrap();
        spec.attach_eigenvectors();
        let grid = build_grid(2, 1.5, 0.01, 14.0).unwrap();
        let v = &spec.eigenvectors.as_ref().unwrap()[1];
        let lambda = spec.eigenvalues[1];
        let n = v.len();
        let mut worst: f64 = 0.0;
        for j in 0..n {
            let mut t = grid.diag[j] * v[j] - lambda * v[j];
            if j > 0 {
                t += grid.e * v[j - 1];
            }
            if j + 1 < n {
                t += grid.e * v[j + 1];
            }
            worst = worst.max(t.abs());
        }
        // Residual scale: operator norm is ~2/h² = 2e4, so 1e-4 means
        // ~8 significant digits in the vector.
        assert!(worst < 1e-4, "worst residual {worst:.3e}");
    }

    #[test]
    fn self_convergence_is_second_order_for_nonzero_m() {
        let e1 = fd_spectrum(1, 2.0, 1, 0.02, 12.0).unwrap().eigenvalues[0];
        let e2 = fd_spectrum(1, 2.0, 1, 0.01, 12.0).unwrap().eigenvalues[0];
        let e4 = fd_spectrum(1, 2.0, 1, 0.005, 12.0).unwrap().eigenvalues[0];
        let ratio = (e1 - e2) / (e2 - e4);
        assert!(
            (3.5..=4.5).contains(&ratio),
            "error-halving ratio {ratio} not consistent with O(h²)"
        );
    }

    #[test]
    fn richardson_beats_the_fine_grid_alone() {
        // Three grids on the m=1, r0=2 ground state: the h/2→h/4 pair's
        // extrapolation stands in for truth; the h→h/2 extrapolation must
        // be at least 4× closer to it than the plain h/2 value.
        let e1 = fd_spectrum(1, 2.0, 1, 0.02, 12.0).unwrap().eigenvalues[0];
        let e2 = fd_spectrum(1, 2.0, 1, 0.01, 12.0).unwrap().eigenvalues[0];
        let e4 = fd_spectrum(1, 2.0, 1, 0.005, 12.0).unwrap().eigenvalues[0];
        let truth = richardson(e2, e4);
        let coarse_extrap = richardson(e1, e2);
        let gain = (e2 - truth).abs() / (coarse_extrap - truth).abs().max(1e-300);
        assert!(gain >= 4.0, "extrapolation gain only {gain:.1}×");
    }

    #[test]
    fn spectrum_is_insensitive_to_the_box_size() {
        let a = fd_spectrum(0, 2.0, 3, 0.01, 12.0).unwrap();
        let b = fd_spectrum(0, 2.0, 3, 0.01, 14.0).unwrap();
        for k in 0..3 {
            assert!(
                (a.eigenvalues[k] - b.eigenvalues[k]).abs() <= 1e-8,
                "level {k} moved by {:.2e} when the box grew",
                (a.eigenvalues[k] - b.eigenvalues[k]).abs()
            );
        }
    }

    #[test]
    fn kink_lands_on_a_cell_face() {
        let spec = fd_spectrum(0, 2.3, 1, 0.0199, 13.0).unwrap();
        let cells = spec.r0 / spec.h;
        assert!(
            (cells - cells.round()).abs() < 1e-9,
            "r0/h = {cells} is not an integer"
        );
        // The nudge stays within a quarter of the requested step.
        assert!((spec.h - 0.0199).abs() < 0.25 * 0.0199);
    }

    #[test]
    fn grid_preconditions_are_enforced()  {
        assert!(fd_spectrum(0, 2.0, 3, 0.05, 14.0).is_err(), "step too coarse");
        assert!(fd_spectrum(0, 2.0, 3, 0.01, 11.0).is_err(), "box too small");
        assert!(fd_spectrum(0, -1.0, 3, 0.01, 14.0).is_err(), "negative r0");
        assert!(fd_spectrum(0, 2.0, 0, 0.01, 14.0).is_err(), "zero count");
    }

    #[test]
    fn golden_csv_shape_and_determinism() {
        let cases = [(0, 1.0, 2), (1, 2.0, 2)];
        let a = golden_csv(&cases, 0.02).unwrap();
        let b = golden_csv(&cases, 0.02).unwrap();
        assert_eq!(a, b, "emitter must be deterministic");
        let lines: Vec<&str> = a.trim_end().lines().collect();
        assert_eq!(lines[0], "m,r0,k,eps_extrapolated,h,r_max");
        assert_eq!(lines.len(), 1 + 4, "header plus one row per level");
        assert!(lines[1].starts_with("0,1,0,"));
    }
}
