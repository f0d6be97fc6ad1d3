//! Simpson's table between de Rham parameters (μ, β) and Dolbeault parameters (α, λ).

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::ToPrimitive;

use crate::error::{Error, Result};
use crate::scalar::{floor_q, ComplexScalar, Q};
use crate::singularity_data::{
    ConnectionData, GradedResiduePiece, IrregularGroup, IrregularPoint, JordanBlock, LogPoint, Side,
};

#[derive(Clone, Debug, PartialEq)]
pub struct DolbeaultParams {
    pub alpha: Q,
    pub lambda: ComplexScalar,
}

/// `α = Re μ`, `λ = (μ − β)/2`. α is returned raw, without reduction mod 1.
pub fn de_rham_to_dolbeault(mu: &ComplexScalar, beta: &Q) -> DolbeaultParams {
    let half = Q::new(1.into(), 2.into());
    DolbeaultParams {
        alpha: mu.re_q(),
        lambda: (mu - &ComplexScalar::real(beta.clone())).scale(&half),
    }
}

/// `β = α − 2 Re λ`, `μ = β + 2λ`. Returns `(μ, β)`.
pub fn dolbeault_to_de_rham(alpha: &Q, lambda: &ComplexScalar) -> (ComplexScalar, Q) {
    let two = Q::from_integer(2.into());
    let beta = alpha - lambda.re_q() * &two;
    let mu = ComplexScalar::real(beta.clone()) + lambda.scale(&two);
    (mu, beta)
}

/// Reduces a weight into `[0,1)`. Returns `(normalized, shift)` with `normalized = raw + shift`.
pub fn normalize(raw: &Q) -> (Q, BigInt) {
    let shift = -floor_q(raw);
    (raw + Q::from_integer(shift.clone()), shift)
}

/// Regroups per-block parameters into pieces sorted by weight, blocks in canonical order.
fn regroup(entries: Vec<(Q, JordanBlock)>) -> Vec<GradedResiduePiece> {
    let mut by_weight: BTreeMap<Q, Vec<JordanBlock>> = BTreeMap::new();
    for (w, b) in entries {
        by_weight.entry(w).or_default().push(b);
    }
    by_weight
        .into_iter()
        .map(|(weight, mut blocks)| {
            blocks.sort_by(|a, b| {
                a.eigenvalue
                    .canonical_cmp(&b.eigenvalue)
                    .then(a.size.cmp(&b.size))
            });
            GradedResiduePiece { weight, blocks }
        })
        .collect()
}

fn pieces_to_dolbeault(pieces: &[GradedResiduePiece]) -> Vec<GradedResiduePiece> {
    let mut entries = Vec::new();
    for piece in pieces {
        for block in &piece.blocks {
            let p = de_rham_to_dolbeault(&block.eigenvalue, &piece.weight);
            entries.push((p.alpha, JordanBlock::new(p.lambda, block.size)));
        }
    }
    regroup(entries)
}

fn pieces_to_de_rham(pieces: &[GradedResiduePiece]) -> Vec<GradedResiduePiece> {
    let mut entries = Vec::new();
    for piece in pieces {
        for block in &piece.blocks {
            let (mu, beta) = dolbeault_to_de_rham(&piece.weight, &block.eigenvalue);
            entries.push((beta, JordanBlock::new(mu, block.size)));
        }
    }
    regroup(entries)
}

/// Halves the leading eigenvalue and converts every block through the table.
/// Pieces are regrouped by the raw α of each block.
pub fn irregular_de_rham_to_dolbeault(group: &IrregularGroup) -> IrregularGroup {
    let half = Q::new(1.into(), 2.into());
    IrregularGroup {
        leading: group.leading.scale(&half),
        pieces: pieces_to_dolbeault(&group.pieces),
    }
}

pub fn irregular_dolbeault_to_de_rham(group: &IrregularGroup) -> IrregularGroup {
    let two = Q::from_integer(2.into());
    IrregularGroup {
        leading: group.leading.scale(&two),
        pieces: pieces_to_de_rham(&group.pieces),
    }
}

fn normalize_pieces(
    pieces: Vec<GradedResiduePiece>,
    degree_shift: &mut BigInt,
) -> Vec<GradedResiduePiece> {
    let mut entries = Vec::new();
    for piece in pieces {
        let (w, shift) = normalize(&piece.weight);
        *degree_shift += &shift * BigInt::from(piece.dim());
        for block in piece.blocks {
            entries.push((w.clone(), block));
        }
    }
    regroup(entries)
}

/// Full Dolbeault datum of a de Rham datum.
///
/// Weights are reduced into `[0,1)`. The Dolbeault degree is fixed by equality of
/// parabolic degrees on both sides; it must come out integral.
pub fn to_dolbeault(data: &ConnectionData) -> Result<ConnectionData> {
    if data.side != Side::DeRham {
        return Err(Error::Inconsistent(
            "to_dolbeault expects a de Rham datum".into(),
        ));
    }
    let mut shift = BigInt::from(0);
    let log_points = data
        .log_points
        .iter()
        .map(|p| LogPoint {
            position: p.position.clone(),
            pieces: normalize_pieces(pieces_to_dolbeault(&p.pieces), &mut shift),
        })
        .collect();
    let groups = data
        .infinity
        .groups
        .iter()
        .map(|g| {
            let h = irregular_de_rham_to_dolbeault(g);
            IrregularGroup {
                leading: h.leading,
                pieces: normalize_pieces(h.pieces, &mut shift),
            }
        })
        .collect();
    let mut out = ConnectionData {
        side: Side::Dolbeault,
        rank: data.rank,
        degree: 0,
        log_points,
        infinity: IrregularPoint { groups },
    };
    let target = crate::singularity_data::parabolic_degree_unchecked(data);
    let weights = crate::singularity_data::parabolic_degree_unchecked(&out);
    let degree = target - weights;
    if !degree.is_integer() {
        return Err(Error::Inconsistent(format!(
            "Dolbeault degree {} is not integral",
            crate::scalar::q_to_string(&degree)
        )));
    }
    out.degree = degree
        .to_integer()
        .to_i64()
        .ok_or_else(|| Error::Numeric("degree overflow".into()))?;
    Ok(out)
}
