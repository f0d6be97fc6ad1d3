//! Singularity data of a parabolic connection on the projective line.
//!
//! A datum records, for each logarithmic point, the graded pieces of the
//! parabolic filtration with the Jordan type of the graded residue, and for
//! the irregular point at infinity the eigenvalue groups of the leading term.
//! Only graded data is stored; flag bases are not modelled.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::scalar::{ComplexScalar, Q};

/// Which side of the non-abelian Hodge correspondence a datum lives on.
/// De Rham pieces carry (β, μ); Dolbeault pieces carry (α, λ).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Side {
    #[default]
    DeRham,
    Dolbeault,
}

impl Side {
    pub fn tag(self) -> &'static str {
        match self {
            Side::DeRham => "de_rham",
            Side::Dolbeault => "dolbeault",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct JordanBlock {
    pub eigenvalue: ComplexScalar,
    pub size: usize,
}

impl JordanBlock {
    pub fn new(eigenvalue: ComplexScalar, size: usize) -> Self {
        JordanBlock { eigenvalue, size }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GradedResiduePiece {
    pub weight: Q,
    pub blocks: Vec<JordanBlock>,
}

impl GradedResiduePiece {
    pub fn new(weight: Q, blocks: Vec<JordanBlock>) -> Self {
        GradedResiduePiece { weight, blocks }
    }

    pub fn dim(&self) -> usize {
        self.blocks.iter().map(|b| b.size).sum()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LogPoint {
    pub position: ComplexScalar,
    pub pieces: Vec<GradedResiduePiece>,
}

impl LogPoint {
    pub fn dim(&self) -> usize {
        self.pieces.iter().map(GradedResiduePiece::dim).sum()
    }

    pub fn graded_dimensions(&self) -> BTreeMap<Q, usize> {
        graded_dimensions(&self.pieces)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct IrregularGroup {
    pub leading: ComplexScalar,
    pub pieces: Vec<GradedResiduePiece>,
}

impl IrregularGroup {
    pub fn multiplicity(&self) -> usize {
        self.pieces.iter().map(GradedResiduePiece::dim).sum()
    }

    pub fn graded_dimensions(&self) -> BTreeMap<Q, usize> {
        graded_dimensions(&self.pieces)
    }
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct IrregularPoint {
    pub groups: Vec<IrregularGroup>,
}

impl IrregularPoint {
    pub fn dim(&self) -> usize {
        self.groups.iter().map(IrregularGroup::multiplicity).sum()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConnectionData {
    pub side: Side,
    pub rank: usize,
    pub degree: i64,
    pub log_points: Vec<LogPoint>,
    pub infinity: IrregularPoint,
}

/// Same shape as [`ConnectionData`], tagged [`Side::Dolbeault`].
pub type DolbeaultData = ConnectionData;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub path: String,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    fn push(&mut self, path: String, message: &str) {
        self.violations.push(Violation {
            path,
            message: message.to_string(),
        });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .violations
            .iter()
            .map(|v| format!("{}: {}", v.path, v.message))
            .collect();
        write!(f, "{}", parts.join("; "))
    }
}

pub const MSG_WEIGHT_ORDER: &str = "weights not strictly increasing";
pub const MSG_RANK_SUM: &str = "rank-sum mismatch";
pub const MSG_WEIGHT_RANGE: &str = "weight outside [0,1)";
pub const MSG_BLOCK_SIZE: &str = "block size must be positive";
pub const MSG_RANK: &str = "rank must be positive";
pub const MSG_POSITIONS: &str = "positions not pairwise distinct";
pub const MSG_LEADING: &str = "leading eigenvalues not pairwise distinct";
pub const MSG_NOT_FINITE: &str = "value not finite";
pub const MSG_EMPTY_GROUP: &str = "group has no blocks";

fn check_pieces(pieces: &[GradedResiduePiece], path: &str, report: &mut ValidationReport) {
    for (j, piece) in pieces.iter().enumerate() {
        let ppath = format!("{path}.pieces[{j}]");
        if piece.weight < Q::zero() || piece.weight >= Q::one() {
            report.push(format!("{ppath}.weight"), MSG_WEIGHT_RANGE);
        }
        if j > 0 && piece.weight <= pieces[j - 1].weight {
            report.push(format!("{ppath}.weight"), MSG_WEIGHT_ORDER);
        }
        for (m, block) in piece.blocks.iter().enumerate() {
            if block.size == 0 {
                report.push(format!("{ppath}.blocks[{m}].size"), MSG_BLOCK_SIZE);
            }
            if !block.eigenvalue.is_finite() {
                report.push(format!("{ppath}.blocks[{m}].eigenvalue"), MSG_NOT_FINITE);
            }
        }
    }
}

/// Lists every violated structural invariant with a path into the datum.
pub fn validate(data: &ConnectionData, tol: f64) -> ValidationReport {
    let mut report = ValidationReport::default();
    if data.rank == 0 {
        report.push("rank".into(), MSG_RANK);
    }
    for (i, point) in data.log_points.iter().enumerate() {
        let path = format!("log_points[{i}]");
        if !point.position.is_finite() {
            report.push(format!("{path}.position"), MSG_NOT_FINITE);
        }
        if data.log_points[..i]
            .iter()
            .any(|p| p.position.approx_eq(&point.position, tol))
        {
            report.push(format!("{path}.position"), MSG_POSITIONS);
        }
        check_pieces(&point.pieces, &path, &mut report);
        if point.dim() != data.rank {
            report.push(path, MSG_RANK_SUM);
        }
    }
    for (g, group) in data.infinity.groups.iter().enumerate() {
        let path = format!("infinity.groups[{g}]");
        if !group.leading.is_finite() {
            report.push(format!("{path}.leading"), MSG_NOT_FINITE);
        }
        if data.infinity.groups[..g]
            .iter()
            .any(|h| h.leading.approx_eq(&group.leading, tol))
        {
            report.push(format!("{path}.leading"), MSG_LEADING);
        }
        if group.multiplicity() == 0 {
            report.push(path.clone(), MSG_EMPTY_GROUP);
        }
        check_pieces(&group.pieces, &path, &mut report);
    }
    if data.infinity.dim() != data.rank {
        report.push("infinity".into(), MSG_RANK_SUM);
    }
    report
}

pub fn ensure_valid(data: &ConnectionData, tol: f64) -> Result<()> {
    let report = validate(data, tol);
    if report.is_valid() {
        Ok(())
    } else {
        Err(Error::Invalid(report))
    }
}

/// Maps each weight to the total size of its blocks.
pub fn graded_dimensions(pieces: &[GradedResiduePiece]) -> BTreeMap<Q, usize> {
    let mut out = BTreeMap::new();
    for piece in pieces {
        *out.entry(piece.weight.clone()).or_insert(0) += piece.dim();
    }
    out
}

fn weighted_dims(pieces: &[GradedResiduePiece]) -> Q {
    pieces.iter().fold(Q::zero(), |acc, p| {
        acc + &p.weight * Q::from_integer(p.dim().into())
    })
}

/// `deg + Σ weight · dim` over every graded piece of every point.
pub fn parabolic_degree(data: &ConnectionData) -> Result<Q> {
    ensure_valid(data, crate::scalar::DEFAULT_TOLERANCE)?;
    Ok(parabolic_degree_unchecked(data))
}

pub(crate) fn parabolic_degree_unchecked(data: &ConnectionData) -> Q {
    let mut total = Q::from_integer(data.degree.into());
    for point in &data.log_points {
        total += weighted_dims(&point.pieces);
    }
    for group in &data.infinity.groups {
        total += weighted_dims(&group.pieces);
    }
    total
}

fn sort_blocks(blocks: &mut [JordanBlock]) {
    blocks.sort_by(|a, b| {
        a.eigenvalue
            .canonical_cmp(&b.eigenvalue)
            .then(a.size.cmp(&b.size))
    });
}

fn merge_pieces(a: &[GradedResiduePiece], b: &[GradedResiduePiece]) -> Vec<GradedResiduePiece> {
    let mut by_weight: BTreeMap<Q, Vec<JordanBlock>> = BTreeMap::new();
    for piece in a.iter().chain(b) {
        by_weight
            .entry(piece.weight.clone())
            .or_default()
            .extend(piece.blocks.iter().cloned());
    }
    by_weight
        .into_iter()
        .map(|(weight, blocks)| GradedResiduePiece { weight, blocks })
        .collect()
}

impl ConnectionData {
    /// Copy with blocks sorted inside every piece and log points sorted by position.
    pub fn canonical(&self) -> ConnectionData {
        let mut out = self.clone();
        for point in &mut out.log_points {
            for piece in &mut point.pieces {
                sort_blocks(&mut piece.blocks);
            }
        }
        out.log_points
            .sort_by(|a, b| a.position.canonical_cmp(&b.position));
        for group in &mut out.infinity.groups {
            for piece in &mut group.pieces {
                sort_blocks(&mut piece.blocks);
            }
        }
        out.infinity
            .groups
            .sort_by(|a, b| a.leading.canonical_cmp(&b.leading));
        out
    }

    pub fn n_points(&self) -> usize {
        self.log_points.len()
    }
}

/// Direct sum of two data over the same marked points.
///
/// Log point positions and irregular leading eigenvalues are matched exactly;
/// pieces of equal weight are merged, ranks and degrees add.
pub fn direct_sum(a: &ConnectionData, b: &ConnectionData) -> Result<ConnectionData> {
    if a.side != b.side {
        return Err(Error::Inconsistent("direct sum across sides".into()));
    }
    if a.log_points.len() != b.log_points.len() {
        return Err(Error::Inconsistent(
            "direct sum needs the same marked points".into(),
        ));
    }
    let mut log_points = Vec::new();
    for pa in &a.log_points {
        let pb = b
            .log_points
            .iter()
            .find(|p| p.position == pa.position)
            .ok_or_else(|| Error::Inconsistent("direct sum needs the same marked points".into()))?;
        log_points.push(LogPoint {
            position: pa.position.clone(),
            pieces: merge_pieces(&pa.pieces, &pb.pieces),
        });
    }
    let mut groups: Vec<IrregularGroup> = a.infinity.groups.clone();
    for gb in &b.infinity.groups {
        match groups.iter_mut().find(|g| g.leading == gb.leading) {
            Some(g) => g.pieces = merge_pieces(&g.pieces, &gb.pieces),
            None => groups.push(gb.clone()),
        }
    }
    Ok(ConnectionData {
        side: a.side,
        rank: a.rank + b.rank,
        degree: a.degree + b.degree,
        log_points,
        infinity: IrregularPoint { groups },
    })
}
