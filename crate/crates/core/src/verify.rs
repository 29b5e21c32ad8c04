//! Cross-checks of the character-theoretic spectrum against dense linear algebra.

use std::fmt;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::cyclotomic::Cyclotomic;
use crate::error::{Error, Result};
use crate::group::GroupSpec;
use crate::mds::{double_center, eigendecompose, pseudo_embedding};
use crate::metric::{build_distance_matrix_with_cap, check_invariance, GroupMetric, InvarianceMode};
use crate::spectral::{
    compare_with_eigenvalues, isotypic_projectors, spectrum_via_characters, trace_from_distances, Sign,
    INVARIANCE_TRIALS,
};

/// Default largest group order the verifier will build dense matrices for.
pub const DEFAULT_VERIFY_CAP: usize = 720;

/// Pairwise projector products are only formed up to this order.
pub const PAIRWISE_PRODUCT_ORDER: usize = 120;

pub const SPECTRUM_TOL: f64 = 1e-8;
pub const PROJECTOR_TOL: f64 = 1e-8;
pub const TRACE_TOL: f64 = 1e-6;
pub const RECONSTRUCTION_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    /// Largest observed deviation, when the check is numerical.
    pub deviation: Option<f64>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub group: GroupSpec,
    pub metric: String,
    pub checks: Vec<CheckOutcome>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} with {} (order {})", self.group, self.metric, self.group.order())?;
        for c in &self.checks {
            let status = if c.passed { "PASS" } else { "FAIL" };
            match c.deviation {
                Some(d) => writeln!(f, "{status} {:<14} max deviation {d:.3e}  {}", c.name, c.detail)?,
                None => writeln!(f, "{status} {:<14} {}", c.name, c.detail)?,
            }
        }
        write!(f, "{}", if self.passed() { "all checks passed" } else { "some checks FAILED" })
    }
}

/// Runs bi-invariance, spectrum, trace, reconstruction and projector checks.
pub fn verify_group(spec: &GroupSpec, metric: &dyn GroupMetric, cap: usize) -> Result<VerificationReport> {
    let order = spec.order();
    if order > cap as u128 {
        return Err(Error::TooLarge { order, cap });
    }
    let mut checks = Vec::new();

    let inv = check_invariance(spec, metric, InvarianceMode::Bi, INVARIANCE_TRIALS)?;
    checks.push(CheckOutcome {
        name: "bi-invariance",
        passed: inv.passed,
        deviation: None,
        detail: match &inv.counterexample {
            Some(c) => format!("{:?} counterexample {c}", c.side),
            None => format!("{} checks, exhaustive={}", inv.checks, inv.exhaustive),
        },
    });
    if !inv.passed {
        return Ok(VerificationReport { group: *spec, metric: metric.name(), checks });
    }

    let summary = spectrum_via_characters(spec, metric)?;
    let distances = build_distance_matrix_with_cap(spec, metric, cap)?;
    let kernel = double_center(&distances);
    let dec = eigendecompose(&kernel)?;

    let cmp = compare_with_eigenvalues(&summary, &dec.eigenvalues);
    checks.push(CheckOutcome {
        name: "spectrum",
        passed: cmp.passed(SPECTRUM_TOL),
        deviation: Some(cmp.max_rel_deviation),
        detail: format!(
            "relative; abs {:.3e}; {} clusters, multiplicities match={}",
            cmp.max_abs_deviation,
            cmp.oracle_clusters.len(),
            cmp.multiplicities_match
        ),
    });

    let exact = Cyclotomic::from_rational(trace_from_distances(spec, metric, cap)?);
    let predicted = summary.trace();
    checks.push(CheckOutcome {
        name: "trace",
        passed: predicted == exact,
        deviation: None,
        detail: format!("sum lambda*mult = {predicted}, distances give {exact}"),
    });

    let full = pseudo_embedding(&dec, dec.len());
    let n = distances.size();
    let mut max_sq = 0.0f64;
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i + 1..n {
            let d = distances.get(i, j) as f64;
            max_sq = max_sq.max(d * d);
            worst = worst.max((full.pseudo_distance_sq(i, j) - d * d).abs());
        }
    }
    let rel = worst / max_sq.max(1.0);
    checks.push(CheckOutcome {
        name: "reconstruction",
        passed: rel < RECONSTRUCTION_TOL,
        deviation: Some(rel),
        detail: format!("relative to max d^2; signature ({}, {})", full.signature.0, full.signature.1),
    });

    let projectors = isotypic_projectors(spec, cap)?;
    let m = kernel.matrix();
    let mut worst_eigen = 0.0f64;
    let mut worst_idem = 0.0f64;
    let mut worst_trace = 0.0f64;
    let mut sum = DMatrix::<f64>::zeros(n, n);
    let mut sum_im = DMatrix::<f64>::zeros(n, n);
    let mut trace_total = 0.0;
    for p in &projectors {
        let lambda = if p.label.is_trivial() {
            0.0
        } else {
            summary
                .entry_for(&p.label)
                .map_or(0.0, |e| if e.sign == Sign::Zero { 0.0 } else { e.eigenvalue.to_f64() })
        };
        worst_eigen = worst_eigen.max(p.eigen_residual(m, lambda) / lambda.abs().max(1.0));
        worst_idem = worst_idem.max(p.idempotence_error().max(p.hermitian_error()));
        worst_trace = worst_trace.max((p.trace() - p.rank as f64).abs());
        trace_total += p.trace();
        sum += &p.real;
        if let Some(im) = &p.imag {
            sum_im += im;
        }
    }
    let completeness = (sum - DMatrix::identity(n, n)).amax().max(sum_im.amax());
    checks.push(CheckOutcome {
        name: "eigenprojector",
        passed: worst_eigen < PROJECTOR_TOL,
        deviation: Some(worst_eigen),
        detail: format!("|PM - lambda P| over {} labels, relative to max(|lambda|, 1)", projectors.len()),
    });
    checks.push(CheckOutcome {
        name: "idempotence",
        passed: worst_idem < PROJECTOR_TOL,
        deviation: Some(worst_idem),
        detail: "|P^2 - P| and |P - P^H|".into(),
    });
    checks.push(CheckOutcome {
        name: "projector-rank",
        passed: worst_trace < TRACE_TOL && (trace_total - n as f64).abs() < TRACE_TOL,
        deviation: Some(worst_trace),
        detail: format!("trace P = d^2; total {trace_total:.6}"),
    });
    checks.push(CheckOutcome {
        name: "completeness",
        passed: completeness < PROJECTOR_TOL,
        deviation: Some(completeness),
        detail: "|sum P - I|".into(),
    });
    if n <= PAIRWISE_PRODUCT_ORDER {
        let mut worst_pair = 0.0f64;
        for (i, a) in projectors.iter().enumerate() {
            for b in &projectors[i + 1..] {
                worst_pair = worst_pair.max(a.product_max(b));
            }
        }
        checks.push(CheckOutcome {
            name: "orthogonality",
            passed: worst_pair < PROJECTOR_TOL,
            deviation: Some(worst_pair),
            detail: "|P_i P_j| for i != j".into(),
        });
    }
    Ok(VerificationReport { group: *spec, metric: metric.name(), checks })
}
