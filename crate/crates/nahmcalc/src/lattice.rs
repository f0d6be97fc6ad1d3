//! Elementary modifications F and G of the underlying bundle, their β-refined
//! versions, and minimal-extension descriptors.
//!
//! A twist `m` at a vector `e` means the local generator `w^m · e`, where `w` is
//! the coordinate vanishing at the point (`z − z_i`, or `1/z` at infinity).
//! Positive twists shrink the sheaf, so a twist contributes `−m` to the degree.
//!
//! Inside a Jordan block `J_s` the weight filtration of the nilpotent part is
//! centred at 0 with gradation indices `s−1, s−3, …, 1−s`. Vectors with index
//! `k < −1` are listed first, then those with `k ≥ −1`.

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::scalar::{ceil_q, ComplexScalar, Q};
use crate::singularity_data::{ConnectionData, GradedResiduePiece, JordanBlock};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum PointId {
    Finite(usize),
    Infinity,
}

impl PointId {
    pub fn label(self) -> String {
        match self {
            PointId::Finite(i) => format!("log_points[{i}]"),
            PointId::Infinity => "infinity".to_string(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PointTwists {
    pub point: PointId,
    pub twists: Vec<i64>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LatticeSpec {
    pub points: Vec<PointTwists>,
    pub degree_delta: i64,
}

impl LatticeSpec {
    fn new(points: Vec<PointTwists>) -> Self {
        let total: i64 = points.iter().flat_map(|p| p.twists.iter()).sum();
        LatticeSpec {
            points,
            degree_delta: -total,
        }
    }

    pub fn finite_twist_sum(&self) -> i64 {
        self.points
            .iter()
            .filter(|p| p.point != PointId::Infinity)
            .flat_map(|p| p.twists.iter())
            .sum()
    }

    pub fn infinity_twist_sum(&self) -> i64 {
        self.points
            .iter()
            .filter(|p| p.point == PointId::Infinity)
            .flat_map(|p| p.twists.iter())
            .sum()
    }
}

/// Degree of the modified sheaf. Without the infinity modification only the
/// finite-point twists are applied.
pub fn sheaf_degree(
    spec: &LatticeSpec,
    base_degree: i64,
    include_infinity_modification: bool,
) -> i64 {
    if include_infinity_modification {
        base_degree + spec.degree_delta
    } else {
        base_degree - spec.finite_twist_sum()
    }
}

/// Number of vectors with filtration index `k < −1` and `k ≥ −1`.
pub fn weight_filtration_split(block: &JordanBlock) -> (usize, usize) {
    let below = block.size.saturating_sub(1) / 2;
    (below, block.size - below)
}

/// One basis vector of the graded data, in lattice order.
#[derive(Clone, Debug)]
pub struct VectorInfo {
    pub point: PointId,
    pub weight: Q,
    pub eigenvalue: ComplexScalar,
    pub below: bool,
}

fn piece_vectors(point: PointId, pieces: &[GradedResiduePiece], out: &mut Vec<VectorInfo>) {
    for piece in pieces {
        for block in &piece.blocks {
            let (below, above) = weight_filtration_split(block);
            for idx in 0..below + above {
                out.push(VectorInfo {
                    point,
                    weight: piece.weight.clone(),
                    eigenvalue: block.eigenvalue.clone(),
                    below: idx < below,
                });
            }
        }
    }
}

/// Every basis vector of the datum, finite points first, then infinity.
pub fn vectors(data: &ConnectionData) -> Vec<VectorInfo> {
    let mut out = Vec::new();
    for (i, point) in data.log_points.iter().enumerate() {
        piece_vectors(PointId::Finite(i), &point.pieces, &mut out);
    }
    for group in &data.infinity.groups {
        piece_vectors(PointId::Infinity, &group.pieces, &mut out);
    }
    out
}

fn is_trivial(v: &VectorInfo, tol: f64) -> bool {
    v.weight.is_zero() && v.eigenvalue.is_zero_tol(tol)
}

/// Number of finite-point vectors whose (weight, eigenvalue) is not (0, 0).
pub fn nontrivial_vector_count(data: &ConnectionData, tol: f64) -> usize {
    vectors(data)
        .iter()
        .filter(|v| v.point != PointId::Infinity && !is_trivial(v, tol))
        .count()
}

fn infinity_twist(v: &VectorInfo) -> i64 {
    match (v.weight.is_zero(), v.below) {
        (true, true) => 1,
        (true, false) => 2,
        (false, _) => 1,
    }
}

fn collect(data: &ConnectionData, rule: impl Fn(&VectorInfo) -> i64) -> LatticeSpec {
    let mut points: Vec<PointTwists> = Vec::new();
    for v in vectors(data) {
        let twist = rule(&v);
        match points.last_mut() {
            Some(p) if p.point == v.point => p.twists.push(twist),
            _ => points.push(PointTwists {
                point: v.point,
                twists: vec![twist],
            }),
        }
    }
    LatticeSpec::new(points)
}

pub fn frame_twists_g(data: &ConnectionData) -> LatticeSpec {
    collect(data, |v| match v.point {
        PointId::Infinity => infinity_twist(v),
        PointId::Finite(_) => match (v.weight.is_zero(), v.below) {
            (true, true) => 0,
            (true, false) => 1,
            (false, _) => 0,
        },
    })
}

pub fn frame_twists_f(data: &ConnectionData, tol: f64) -> LatticeSpec {
    collect(data, |v| match v.point {
        PointId::Infinity => infinity_twist(v),
        PointId::Finite(_) => {
            if !v.weight.is_zero() || v.eigenvalue.is_zero_tol(tol) || v.below {
                0
            } else {
                1
            }
        }
    })
}

/// The unique integer `m` with `β_vec + m − 1 < β ≤ β_vec + m`.
pub fn beta_shift(beta: &Q, vector_weight: &Q) -> BigInt {
    ceil_q(&(beta - vector_weight))
}

/// Twists of `F_β` (or `G_β`) from those of `F` (or `G`).
///
/// Vectors with weight 0 and eigenvalue 0 keep their twist; every other vector
/// gains the shift of [`beta_shift`].
pub fn beta_refined_twists(
    base: &LatticeSpec,
    data: &ConnectionData,
    beta: &Q,
    tol: f64,
) -> Result<LatticeSpec> {
    let vs = vectors(data);
    let flat: Vec<(PointId, i64)> = base
        .points
        .iter()
        .flat_map(|p| p.twists.iter().map(move |t| (p.point, *t)))
        .collect();
    if flat.len() != vs.len() {
        return Err(Error::Inconsistent(
            "lattice spec does not match the datum".into(),
        ));
    }
    let mut points: Vec<PointTwists> = Vec::new();
    for ((point, twist), v) in flat.into_iter().zip(&vs) {
        if point != v.point {
            return Err(Error::Inconsistent(
                "lattice spec does not match the datum".into(),
            ));
        }
        let shift = if is_trivial(v, tol) {
            0
        } else {
            beta_shift(beta, &v.weight)
                .to_i64()
                .ok_or_else(|| Error::Numeric("twist overflow".into()))?
        };
        let t = twist + shift;
        match points.last_mut() {
            Some(p) if p.point == point => p.twists.push(t),
            _ => points.push(PointTwists {
                point,
                twists: vec![t],
            }),
        }
    }
    Ok(LatticeSpec::new(points))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExtensionTag {
    /// Full meromorphic extension `O(*)·e`.
    Meromorphic,
    /// `O(n·{point})·e`, local generator `w^{−n}·e`.
    Lattice(i64),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PointExtension {
    pub point: PointId,
    /// One entry per Jordan block, one tag per vector along the chain `e¹ … e^s`.
    pub blocks: Vec<Vec<ExtensionTag>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MinimalExtensionSpec {
    pub points: Vec<PointExtension>,
}

/// Local minimal extension of a single Jordan block at a logarithmic point.
pub fn block_minimal_extension(block: &JordanBlock, tol: f64) -> Result<Vec<ExtensionTag>> {
    let mut tags = vec![ExtensionTag::Meromorphic; block.size];
    if let Some(n) = block.eigenvalue.as_integer(tol) {
        let n = n
            .to_i64()
            .ok_or_else(|| Error::Numeric("eigenvalue overflow".into()))?;
        if let Some(last) = tags.last_mut() {
            *last = ExtensionTag::Lattice(n);
        }
    }
    Ok(tags)
}

pub fn minimal_extension(data: &ConnectionData, tol: f64) -> Result<MinimalExtensionSpec> {
    let mut points = Vec::new();
    for (i, point) in data.log_points.iter().enumerate() {
        let mut blocks = Vec::new();
        for piece in &point.pieces {
            for block in &piece.blocks {
                blocks.push(block_minimal_extension(block, tol)?);
            }
        }
        points.push(PointExtension {
            point: PointId::Finite(i),
            blocks,
        });
    }
    let blocks = data
        .infinity
        .groups
        .iter()
        .flat_map(|g| g.pieces.iter().flat_map(|p| p.blocks.iter()))
        .map(|b| vec![ExtensionTag::Meromorphic; b.size])
        .collect();
    points.push(PointExtension {
        point: PointId::Infinity,
        blocks,
    });
    Ok(MinimalExtensionSpec { points })
}
