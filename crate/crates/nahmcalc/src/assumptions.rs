//! Standing hypotheses on residues, grouped by the result that consumes them.

use std::fmt;

use num_traits::Zero;

use crate::scalar::{ComplexScalar, Q};
use crate::singularity_data::{ConnectionData, GradedResiduePiece};

pub const MAIN_INFINITY: &str = "main.0.no_integer_eigenvalue_at_infinity";
pub const MAIN_WEIGHT_ZERO: &str = "main.1.weight_zero_residue";
pub const MAIN_POSITIVE_WEIGHT: &str = "main.2.no_integer_eigenvalue";
pub const PAR_WEIGHT_NOT_EIGENVALUE: &str = "parabolic.infinity_weight_not_eigenvalue";
pub const PAR_NILPOTENT_TRIVIAL: &str = "parabolic.nilpotent_trivial_on_zero_eigenspace";
pub const PAR_WEIGHT_DIFFERS: &str = "parabolic.weight_differs_from_eigenvalue";
pub const STAT_DIFFERENCE: &str = "stationary.1.difference_determines_weight";
pub const STAT_REGULAR: &str = "stationary.2.regular_graded_residue";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Check {
    pub name: String,
    pub path: String,
    pub pass: bool,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct AssumptionReport {
    pub checks: Vec<Check>,
    /// Caller's assertion that the genericity condition of the transform holds.
    pub genericity_asserted: bool,
}

impl AssumptionReport {
    pub fn passes(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn extend(&mut self, other: AssumptionReport) {
        self.checks.extend(other.checks);
        self.genericity_asserted |= other.genericity_asserted;
    }

    fn push(&mut self, name: &str, path: String, pass: bool, message: String) {
        self.checks.push(Check {
            name: name.to_string(),
            path,
            pass,
            message,
        });
    }
}

impl fmt::Display for AssumptionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .failures()
            .map(|c| format!("{} at {}: {}", c.name, c.path, c.message))
            .collect();
        write!(f, "{}", parts.join("; "))
    }
}

fn integer_eigenvalues(piece: &GradedResiduePiece, tol: f64) -> Vec<String> {
    piece
        .blocks
        .iter()
        .filter(|b| b.eigenvalue.is_integer(tol))
        .map(|b| b.eigenvalue.to_string())
        .collect()
}

pub fn check_main_assumptions(data: &ConnectionData, tol: f64) -> AssumptionReport {
    let mut report = AssumptionReport::default();
    for (g, group) in data.infinity.groups.iter().enumerate() {
        for (j, piece) in group.pieces.iter().enumerate() {
            let bad = integer_eigenvalues(piece, tol);
            let message = if bad.is_empty() {
                "no integer eigenvalue".to_string()
            } else {
                format!("integer eigenvalue {}", bad.join(", "))
            };
            report.push(
                MAIN_INFINITY,
                format!("infinity.groups[{g}].pieces[{j}]"),
                bad.is_empty(),
                message,
            );
        }
    }
    for (i, point) in data.log_points.iter().enumerate() {
        for (j, piece) in point.pieces.iter().enumerate() {
            let path = format!("log_points[{i}].pieces[{j}]");
            if piece.weight.is_zero() {
                let nonzero_int: Vec<String> = piece
                    .blocks
                    .iter()
                    .filter(|b| b.eigenvalue.is_integer(tol) && !b.eigenvalue.is_zero_tol(tol))
                    .map(|b| b.eigenvalue.to_string())
                    .collect();
                let big_zero = piece
                    .blocks
                    .iter()
                    .any(|b| b.eigenvalue.is_zero_tol(tol) && b.size > 1);
                let mut problems = Vec::new();
                if !nonzero_int.is_empty() {
                    problems.push(format!(
                        "non-zero integer eigenvalue {}",
                        nonzero_int.join(", ")
                    ));
                }
                if big_zero {
                    problems.push("nilpotent part non-trivial on the 0-eigenspace".to_string());
                }
                let pass = problems.is_empty();
                let message = if pass {
                    "ok".to_string()
                } else {
                    problems.join("; ")
                };
                report.push(MAIN_WEIGHT_ZERO, path, pass, message);
            } else {
                let bad = integer_eigenvalues(piece, tol);
                let message = if bad.is_empty() {
                    "no integer eigenvalue".to_string()
                } else {
                    format!("integer eigenvalue {}", bad.join(", "))
                };
                report.push(MAIN_POSITIVE_WEIGHT, path, bad.is_empty(), message);
            }
        }
    }
    report
}

pub fn check_parabolic_sheaf_conditions(data: &ConnectionData, tol: f64) -> AssumptionReport {
    let mut report = AssumptionReport::default();
    for (g, group) in data.infinity.groups.iter().enumerate() {
        for (j, piece) in group.pieces.iter().enumerate() {
            let w = ComplexScalar::real(piece.weight.clone());
            let hit = piece.blocks.iter().any(|b| b.eigenvalue.approx_eq(&w, tol));
            let message = if hit {
                format!("weight {} is an eigenvalue", w)
            } else {
                "ok".to_string()
            };
            report.push(
                PAR_WEIGHT_NOT_EIGENVALUE,
                format!("infinity.groups[{g}].pieces[{j}]"),
                !hit,
                message,
            );
        }
    }
    for (i, point) in data.log_points.iter().enumerate() {
        for (j, piece) in point.pieces.iter().enumerate() {
            let path = format!("log_points[{i}].pieces[{j}]");
            if piece.weight.is_zero() {
                let bad = piece
                    .blocks
                    .iter()
                    .any(|b| b.eigenvalue.is_zero_tol(tol) && b.size > 1);
                let message = if bad {
                    "nilpotent part acts non-trivially on the generalized 0-eigenspace".to_string()
                } else {
                    "ok".to_string()
                };
                report.push(PAR_NILPOTENT_TRIVIAL, path.clone(), !bad, message);
            }
            let w = ComplexScalar::real(piece.weight.clone());
            let clash = piece.blocks.iter().any(|b| {
                b.eigenvalue.re().to_c64().re.abs() >= tol && b.eigenvalue.approx_eq(&w, tol)
            });
            let message = if clash {
                format!("eigenvalue with non-zero real part equals the weight {}", w)
            } else {
                "ok".to_string()
            };
            report.push(PAR_WEIGHT_DIFFERS, path, !clash, message);
        }
    }
    report
}

fn stationary_for_point(
    pieces: &[GradedResiduePiece],
    path: &str,
    tol: f64,
    report: &mut AssumptionReport,
) {
    let vectors: Vec<(&Q, &ComplexScalar)> = pieces
        .iter()
        .flat_map(|p| p.blocks.iter().map(move |b| (&p.weight, &b.eigenvalue)))
        .collect();
    let mut clash = None;
    'outer: for (a, (wa, ma)) in vectors.iter().enumerate() {
        for (wb, mb) in &vectors[a + 1..] {
            if wa == wb {
                continue;
            }
            let da = *ma - &ComplexScalar::real((*wa).clone());
            let db = *mb - &ComplexScalar::real((*wb).clone());
            if da.approx_eq(&db, tol) {
                clash = Some(format!(
                    "μ − β = {} at weights {} and {}",
                    da,
                    crate::scalar::q_to_string(wa),
                    crate::scalar::q_to_string(wb)
                ));
                break 'outer;
            }
        }
    }
    report.push(
        STAT_DIFFERENCE,
        path.to_string(),
        clash.is_none(),
        clash.unwrap_or_else(|| "ok".to_string()),
    );
    for (j, piece) in pieces.iter().enumerate() {
        let mut repeated = None;
        for (m, b) in piece.blocks.iter().enumerate() {
            if piece.blocks[..m]
                .iter()
                .any(|c| c.eigenvalue.approx_eq(&b.eigenvalue, tol))
            {
                repeated = Some(b.eigenvalue.to_string());
                break;
            }
        }
        let message = match &repeated {
            Some(e) => format!("eigenvalue {e} carries more than one Jordan block"),
            None => "ok".to_string(),
        };
        report.push(
            STAT_REGULAR,
            format!("{path}.pieces[{j}]"),
            repeated.is_none(),
            message,
        );
    }
}

pub fn check_stationary_phase_conditions(data: &ConnectionData, tol: f64) -> AssumptionReport {
    let mut report = AssumptionReport::default();
    for (i, point) in data.log_points.iter().enumerate() {
        stationary_for_point(&point.pieces, &format!("log_points[{i}]"), tol, &mut report);
    }
    for (g, group) in data.infinity.groups.iter().enumerate() {
        stationary_for_point(
            &group.pieces,
            &format!("infinity.groups[{g}]"),
            tol,
            &mut report,
        );
    }
    report
}

/// Every hypothesis needed by the singularity-data transform.
pub fn check_all(data: &ConnectionData, tol: f64, assume_generic: bool) -> AssumptionReport {
    let mut report = check_main_assumptions(data, tol);
    report.extend(check_parabolic_sheaf_conditions(data, tol));
    report.extend(check_stationary_phase_conditions(data, tol));
    report.genericity_asserted = assume_generic;
    report
}
