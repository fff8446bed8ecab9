//! Ordinary least squares for the test-count model.
//!
//! Fits `test_files ~ intercept + adoption(simple_test) + adoption(tccpc)
//! + adoption(assertion_message) + adoption(implicit_teardown) +
//! total_loc` by Householder QR with column pivoting. Columns are
//! unit-normalized first so the rank test is scale-free; a rank-deficient
//! design is rejected with the names of the collinear columns instead of
//! silently producing garbage coefficients. Standard errors come from
//! `s² (XᵀX)⁻¹ = s² R⁻¹R⁻ᵀ`, and two-sided p-values from the Student-t
//! survival function via the regularized incomplete beta function — both
//! implemented here so results are bit-identical on every platform.

use serde::Serialize;

use crate::patterns::PatternKind;

/// Relative rank tolerance on the pivoted, unit-scaled R diagonal.
const RANK_TOLERANCE: f64 = 1e-8;

/// One project's row in the design matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionObservation {
    pub project_id: String,
    /// Response: number of test files.
    pub test_files: f64,
    /// Adoption ratios in model order: simple test, testcase class per
    /// class, assertion message, implicit teardown.
    pub adoption: [f64; 4],
    /// Size control: total (test + production) lines of code.
    pub total_loc: f64,
}

/// Display/report order of the model terms.
pub const TERM_NAMES: [&str; 6] = [
    "intercept",
    PatternKind::SimpleTest.key(),
    PatternKind::TestcaseClassPerClass.key(),
    PatternKind::AssertionMessage.key(),
    PatternKind::ImplicitTeardown.key(),
    "total_loc",
];

/// One fitted term.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegressionTerm {
    pub name: String,
    pub coefficient: f64,
    pub std_error: f64,
    pub t_value: f64,
    /// Two-sided p-value against the t distribution with `residual_df`
    /// degrees of freedom.
    pub p_value: f64,
}

/// A fitted model.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegressionResult {
    pub observations: usize,
    /// `observations - 6`.
    pub residual_df: usize,
    /// Terms in [`TERM_NAMES`] order.
    pub terms: Vec<RegressionTerm>,
    pub r_squared: Option<f64>,
}

/// Why a fit was refused.
#[derive(Debug, thiserror::Error, PartialEq)]
pub enum OlsError {
    #[error("regression needs at least {need} observations, got {have}")]
    TooFewObservations { have: usize, need: usize },
    #[error("design matrix is rank deficient; collinear columns: {}", columns.join(", "))]
    Collinear { columns: Vec<String> },
    #[error("column `{column}` contains a non-finite value")]
    NonFinite { column: String },
}

/// Fit the six-term test-count model.
pub fn fit_test_count_model(
    observations: &[RegressionObservation],
) -> Result<RegressionResult, OlsError> {
    let n = observations.len();
    let p = TERM_NAMES.len();
    if n < p + 1 {
        return Err(OlsError::TooFewObservations { have: n, need: p + 1 });
    }

    let mut columns: Vec<Vec<f64>> = vec![Vec::with_capacity(n); p];
    let mut y = Vec::with_capacity(n);
    for obs in observations {
        columns[0].push(1.0);
        for (k, value) in obs.adoption.iter().enumerate() {
            columns[k + 1].push(*value);
        }
        columns[5].push(obs.total_loc);
        y.push(obs.test_files);
    }
    ols(&TERM_NAMES, &columns, &y)
}

/// Generic OLS on explicit columns. `columns[j]` and `y` all have length
/// `n`; requires `n >= p + 1` (checked by callers for their own term
/// count) and a full-rank design.
fn ols(names: &[&str], columns: &[Vec<f64>], y: &[f64]) -> Result<RegressionResult, OlsError> {
    let p = columns.len();
    let n = y.len();

    for (j, column) in columns.iter().enumerate() {
        if column.iter().any(|v| !v.is_finite()) {
            return Err(OlsError::NonFinite { column: names[j].to_string() });
        }
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(OlsError::NonFinite { column: "response".to_string() });
    }

    // Unit-normalize each column so the rank tolerance is scale-free. A
    // zero column is collinear by itself.
    let mut norms = vec![0.0f64; p];
    let mut a: Vec<Vec<f64>> = Vec::with_capacity(p);
    for (j, column) in columns.iter().enumerate() {
        let norm = column.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(OlsError::Collinear { columns: vec![names[j].to_string()] });
        }
        norms[j] = norm;
        a.push(column.iter().map(|v| v / norm).collect());
    }

    // Householder QR with column pivoting; reflections applied to the
    // response as we go.
    let mut qty = y.to_vec();
    let mut perm: Vec<usize> = (0..p).collect();
    for k in 0..p {
        // Pivot: bring the remaining column with the largest residual
        // norm to position k.
        let mut best = k;
        let mut best_norm = 0.0;
        for j in k..p {
            let norm: f64 = a[j][k..].iter().map(|v| v * v).sum();
            if norm > best_norm {
                best_norm = norm;
                best = j;
            }
        }
        a.swap(k, best);
        perm.swap(k, best);

        let norm_x = best_norm.sqrt();
        if norm_x <= RANK_TOLERANCE {
            // Everything from k on is (numerically) in the span of the
            // first k columns.
            let mut collinear: Vec<String> =
                perm[k..].iter().map(|&j| names[j].to_string()).collect();
            collinear.sort();
            return Err(OlsError::Collinear { columns: collinear });
        }

        // Householder vector v = x ± ||x||e1, stored in place of x.
        let alpha = if a[k][k] >= 0.0 { -norm_x } else { norm_x };
        let mut v: Vec<f64> = a[k][k..].to_vec();
        v[0] -= alpha;
        let vtv: f64 = v.iter().map(|value| value * value).sum();
        a[k][k] = alpha;
        for row in k + 1..n {
            a[k][row] = 0.0;
        }

        if vtv > 0.0 {
            for column in a.iter_mut().skip(k + 1) {
                let dot: f64 =
                    v.iter().zip(&column[k..]).map(|(vi, ci)| vi * ci).sum();
                let scale = 2.0 * dot / vtv;
                for (vi, ci) in v.iter().zip(&mut column[k..]) {
                    *ci -= scale * vi;
                }
            }
            let dot: f64 = v.iter().zip(&qty[k..]).map(|(vi, yi)| vi * yi).sum();
            let scale = 2.0 * dot / vtv;
            for (vi, yi) in v.iter().zip(&mut qty[k..]) {
                *yi -= scale * vi;
            }
        }
    }

    // Back-substitution: R z = (Qᵀy)[..p], with R[i][j] = a[j][i].
    let mut z = vec![0.0f64; p];
    for i in (0..p).rev() {
        let mut sum = qty[i];
        for j in i + 1..p {
            sum -= a[j][i] * z[j];
        }
        z[i] = sum / a[i][i];
    }

    // Coefficients back in caller order and original scale.
    let mut beta = vec![0.0f64; p];
    for (k, &j) in perm.iter().enumerate() {
        beta[j] = z[k] / norms[j];
    }

    // Residual sum of squares from the original data, in input order.
    let mut rss = 0.0f64;
    for i in 0..n {
        let mut fitted = 0.0;
        for j in 0..p {
            fitted += columns[j][i] * beta[j];
        }
        let r = y[i] - fitted;
        rss += r * r;
    }
    let df = n - p;
    let s2 = rss / df as f64;

    // R⁻¹ (upper triangular), then C = R⁻¹ R⁻ᵀ in pivoted-scaled space.
    let mut rinv = vec![vec![0.0f64; p]; p];
    for i in (0..p).rev() {
        rinv[i][i] = 1.0 / a[i][i];
        for j in i + 1..p {
            let mut sum = 0.0;
            for k in i + 1..=j {
                sum += a[k][i] * rinv[k][j];
            }
            rinv[i][j] = -sum / a[i][i];
        }
    }
    // Diagonal of C, mapped back through the pivot and the scaling.
    let mut xtx_inv_diag = vec![0.0f64; p];
    for i in 0..p {
        let c_ii: f64 = (i..p).map(|k| rinv[i][k] * rinv[i][k]).sum();
        let j = perm[i];
        xtx_inv_diag[j] = c_ii / (norms[j] * norms[j]);
    }

    let mean = y.iter().sum::<f64>() / n as f64;
    let sst: f64 = y.iter().map(|v| (v - mean) * (v - mean)).sum();
    let r_squared = (sst > 0.0).then(|| 1.0 - rss / sst);

    let terms = (0..p)
        .map(|j| {
            let std_error = (s2 * xtx_inv_diag[j]).sqrt();
            let t_value = beta[j] / std_error;
            RegressionTerm {
                name: names[j].to_string(),
                coefficient: beta[j],
                std_error,
                t_value,
                p_value: student_t_two_sided(t_value, df as f64),
            }
        })
        .collect();

    Ok(RegressionResult { observations: n, residual_df: df, terms, r_squared })
}

/// Two-sided p-value of a t statistic with `df` degrees of freedom:
/// `P(|T| >= |t|) = I_{df/(df+t²)}(df/2, 1/2)`.
pub fn student_t_two_sided(t: f64, df: f64) -> f64 {
    if !t.is_finite() {
        return 0.0;
    }
    let x = df / (df + t * t);
    incomplete_beta_regularized(df / 2.0, 0.5, x)
}

/// Regularized incomplete beta function `I_x(a, b)` by Lentz's continued
/// fraction, accurate to ~1e-15 for the t-distribution's parameter range.
pub fn incomplete_beta_regularized(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b)
        + a * x.ln()
        + b * (1.0 - x).ln();
    let front = ln_front.exp();
    // The continued fraction converges fastest below the distribution
    // mean; use the symmetry I_x(a,b) = 1 - I_{1-x}(b,a) otherwise.
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_continued_fraction(a, b, x) / a
    } else {
        1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b
    }
}

fn beta_continued_fraction(a: f64, b: f64, x: f64) -> f64 {
    const MAX_ITER: usize = 300;
    const EPS: f64 = 3e-16;
    const TINY: f64 = 1e-300;

    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;

        let numerator = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + numerator * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + numerator / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;

        let numerator = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + numerator * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + numerator / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

/// `ln Γ(x)` for positive `x` via the Lanczos approximation (g = 7).
pub fn ln_gamma(x: f64) -> f64 {
    const COEFFICIENTS: [f64; 8] = [
        676.5203681218851,
        -1259.1392167224028,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507343278686905,
        -0.13857109526572012,
        9.984_369_578_019_572e-6,
        1.5056327351493116e-7,
    ];
    debug_assert!(x > 0.0);
    let z = x - 1.0;
    let mut sum = 0.999_999_999_999_809_9;
    for (i, c) in COEFFICIENTS.iter().enumerate() {
        sum += c / (z + i as f64 + 1.0);
    }
    let t = z + 7.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (z + 0.5) * t.ln() - t + sum.ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn observation(id: &str, y: f64, adoption: [f64; 4], loc: f64) -> RegressionObservation {
        RegressionObservation {
            project_id: id.to_string(),
            test_files: y,
            adoption,
            total_loc: loc,
        }
    }

    /// Deterministic synthetic design with no collinearity.
    fn synthetic(n: usize, noise: impl Fn(usize) -> f64) -> Vec<RegressionObservation> {
        const TRUE_BETA: [f64; 6] = [72.85, -137.3, -76.58, -58.72, -92.89, 2.079e-5];
        (0..n)
            .map(|i| {
                let f = i as f64;
                let a = [
                    (f * 0.37).sin().abs(),
                    (f * 0.53 + 1.0).sin().abs(),
                    (f * 0.71 + 2.0).sin().abs(),
                    (f * 0.89 + 3.0).sin().abs(),
                ];
                let loc = 10_000.0 + 977.0 * ((f * 0.13).cos() + 1.5) * (1.0 + (i % 7) as f64);
                let y = TRUE_BETA[0]
                    + TRUE_BETA[1] * a[0]
                    + TRUE_BETA[2] * a[1]
                    + TRUE_BETA[3] * a[2]
                    + TRUE_BETA[4] * a[3]
                    + TRUE_BETA[5] * loc
                    + noise(i);
                observation(&format!("p{i:03}"), y, a, loc)
            })
            .collect()
    }

    #[test]
    fn noise_free_fit_recovers_the_generating_coefficients() {
        let data = synthetic(40, |_| 0.0);
        let fit = fit_test_count_model(&data).unwrap();
        let expected = [72.85, -137.3, -76.58, -58.72, -92.89, 2.079e-5];
        for (term, want) in fit.terms.iter().zip(expected) {
            let rel = ((term.coefficient - want) / want).abs();
            assert!(rel < 1e-9, "{}: got {}, want {want}", term.name, term.coefficient);
        }
        assert_eq!(fit.observations, 40);
        assert_eq!(fit.residual_df, 34);
        assert!(fit.r_squared.unwrap() > 0.999999);
    }

    #[test]
    fn term_order_is_fixed() {
        let data = synthetic(12, |_| 0.0);
        let fit = fit_test_count_model(&data).unwrap();
        let names: Vec<&str> = fit.terms.iter().map(|t| t.name.as_str()).collect();
        assert_eq!(
            names,
            vec![
                "intercept",
                "simple_test",
                "testcase_class_per_class",
                "assertion_message",
                "implicit_teardown",
                "total_loc"
            ]
        );
    }

    #[test]
    fn too_few_observations_is_an_error() {
        let data = synthetic(6, |_| 0.0);
        assert_eq!(
            fit_test_count_model(&data).unwrap_err(),
            OlsError::TooFewObservations { have: 6, need: 7 }
        );
    }

    #[test]
    fn duplicated_column_is_reported_as_collinear() {
        // Make assertion_message identical to simple_test.
        let mut data = synthetic(20, |_| 0.0);
        for obs in &mut data {
            obs.adoption[2] = obs.adoption[0];
        }
        let err = fit_test_count_model(&data).unwrap_err();
        match err {
            OlsError::Collinear { columns } => {
                assert!(
                    columns.contains(&"assertion_message".to_string())
                        || columns.contains(&"simple_test".to_string()),
                    "unexpected collinear set: {columns:?}"
                );
            }
            other => panic!("expected collinearity, got {other}"),
        }
    }

    #[test]
    fn constant_adoption_column_is_collinear_with_the_intercept() {
        let mut data = synthetic(20, |_| 0.0);
        for obs in &mut data {
            obs.adoption[3] = 0.25;
        }
        let err = fit_test_count_model(&data).unwrap_err();
        assert!(matches!(err, OlsError::Collinear { .. }), "got {err}");
    }

    #[test]
    fn non_finite_input_is_rejected_by_name() {
        let mut data = synthetic(10, |_| 0.0);
        data[3].total_loc = f64::NAN;
        assert_eq!(
            fit_test_count_model(&data).unwrap_err(),
            OlsError::NonFinite { column: "total_loc".to_string() }
        );
    }

    #[test]
    fn ln_gamma_matches_known_values() {
        // Γ(1) = Γ(2) = 1, Γ(0.5) = √π, Γ(5) = 24.
        assert!((ln_gamma(1.0)).abs() < 1e-13);
        assert!((ln_gamma(2.0)).abs() < 1e-13);
        assert!((ln_gamma(0.5) - std::f64::consts::PI.sqrt().ln()).abs() < 1e-13);
        assert!((ln_gamma(5.0) - 24.0f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn incomplete_beta_hits_closed_form_cases() {
        // I_x(1, 1) = x.
        for x in [0.1, 0.25, 0.5, 0.9] {
            assert!((incomplete_beta_regularized(1.0, 1.0, x) - x).abs() < 1e-14);
        }
        // I_x(2, 1) = x²  and  I_x(1, 2) = 1 - (1-x)² = 2x - x².
        assert!((incomplete_beta_regularized(2.0, 1.0, 0.3) - 0.09).abs() < 1e-14);
        assert!((incomplete_beta_regularized(1.0, 2.0, 0.3) - 0.51).abs() < 1e-14);
        // Symmetry: I_x(a,b) = 1 - I_{1-x}(b,a).
        let left = incomplete_beta_regularized(3.5, 0.5, 0.2);
        let right = 1.0 - incomplete_beta_regularized(0.5, 3.5, 0.8);
        assert!((left - right).abs() < 1e-14);
    }

    #[test]
    fn p_values_match_the_reference_t_distribution() {
        use statrs::distribution::{ContinuousCDF, StudentsT};
        for df in [1usize, 2, 5, 14, 34, 100] {
            let dist = StudentsT::new(0.0, 1.0, df as f64).unwrap();
            for t in [0.0, 0.5, 1.0, 1.96, 2.5, 4.0, 8.0] {
                let want = 2.0 * (1.0 - dist.cdf(t));
                let got = student_t_two_sided(t, df as f64);
                assert!(
                    (got - want).abs() < 1e-12,
                    "df={df} t={t}: got {got}, want {want}"
                );
            }
        }
    }

    #[test]
    fn known_simple_regression_matches_hand_computation() {
        // y = 2x + 1 exactly, via the generic path: put x in total_loc and
        // neutralize the adoption terms with distinct non-collinear values.
        let data: Vec<RegressionObservation> = (0..10)
            .map(|i| {
                let x = i as f64;
                let a = [
                    (x * 0.31).sin().abs() * 0.5,
                    (x * 0.47 + 0.4).sin().abs() * 0.5,
                    (x * 0.61 + 0.9).sin().abs() * 0.5,
                    (x * 0.73 + 1.3).sin().abs() * 0.5,
                ];
                observation(&format!("p{i}"), 2.0 * x + 1.0, a, x)
            })
            .collect();
        let fit = fit_test_count_model(&data).unwrap();
        // The adoption coefficients must vanish: y is fully explained by
        // the intercept and total_loc.
        assert!((fit.terms[0].coefficient - 1.0).abs() < 1e-9);
        assert!((fit.terms[5].coefficient - 2.0).abs() < 1e-9);
        for k in 1..5 {
            assert!(fit.terms[k].coefficient.abs() < 1e-9);
        }
    }
}
