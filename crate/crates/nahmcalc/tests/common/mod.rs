//! Seeded generators for random singularity data.
#![allow(dead_code)]

use std::collections::BTreeMap;

use nahmcalc::hodge_table::to_dolbeault;
use nahmcalc::scalar::{q, ComplexScalar, Q};
use nahmcalc::singularity_data::{
    parabolic_degree, ConnectionData, GradedResiduePiece, IrregularGroup, IrregularPoint,
    JordanBlock, LogPoint, Side,
};
use nahmcalc::stationary_phase::{involution_defect, TransformOptions};
use num_traits::Zero;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use rand::SeedableRng;

pub type TestRng = ChaCha8Rng;

pub fn rng(seed: u64) -> TestRng {
    ChaCha8Rng::seed_from_u64(seed)
}

const WEIGHTS: [(i64, i64); 10] = [
    (0, 1),
    (1, 5),
    (1, 4),
    (1, 3),
    (2, 5),
    (1, 2),
    (3, 5),
    (2, 3),
    (3, 4),
    (4, 5),
];
const DENOMS: [i64; 5] = [2, 3, 4, 5, 6];

pub fn weight(rng: &mut TestRng) -> Q {
    let (n, d) = *WEIGHTS.choose(rng).unwrap();
    q(n, d)
}

/// Rational with a small denominator that is not an integer.
pub fn fraction(rng: &mut TestRng) -> Q {
    loop {
        let d = *DENOMS.choose(rng).unwrap();
        let x = q(rng.gen_range(-3 * d..=3 * d), d);
        if !x.is_integer() {
            return x;
        }
    }
}

/// Exact non-integer eigenvalue; occasionally with an imaginary part.
pub fn eigenvalue(rng: &mut TestRng) -> ComplexScalar {
    let re = fraction(rng);
    let im = if rng.gen_bool(0.25) {
        fraction(rng)
    } else {
        Q::zero()
    };
    ComplexScalar::exact(re, im)
}

pub fn composition(rng: &mut TestRng, n: usize) -> Vec<usize> {
    let mut parts = Vec::new();
    let mut left = n;
    while left > 0 {
        let s = rng.gen_range(1..=left);
        parts.push(s);
        left -= s;
    }
    parts
}

fn pieces(rng: &mut TestRng, dim: usize, allow_trivial: bool) -> Vec<GradedResiduePiece> {
    let mut by_weight: BTreeMap<Q, Vec<JordanBlock>> = BTreeMap::new();
    for s in composition(rng, dim) {
        if allow_trivial && s == 1 && rng.gen_bool(0.15) {
            by_weight
                .entry(Q::zero())
                .or_default()
                .push(JordanBlock::new(ComplexScalar::zero(), 1));
            continue;
        }
        by_weight
            .entry(weight(rng))
            .or_default()
            .push(JordanBlock::new(eigenvalue(rng), s));
    }
    by_weight
        .into_iter()
        .map(|(w, blocks)| GradedResiduePiece::new(w, blocks))
        .collect()
}

/// A log point carrying only trivial blocks is an apparent singularity and has
/// no counterpart in the transform; redraw until some block is non-trivial.
fn nontrivial_pieces(rng: &mut TestRng, dim: usize) -> Vec<GradedResiduePiece> {
    loop {
        let p = pieces(rng, dim, true);
        if p.iter().any(|piece| {
            !piece.weight.is_zero() || piece.blocks.iter().any(|b| !b.eigenvalue.is_zero())
        }) {
            return p;
        }
    }
}

fn distinct_points(rng: &mut TestRng, n: usize) -> Vec<ComplexScalar> {
    let mut pool: Vec<ComplexScalar> = Vec::new();
    for re in -4..=4 {
        for im in -1..=1 {
            pool.push(ComplexScalar::exact(
                Q::from_integer(re.into()),
                Q::from_integer(im.into()),
            ));
        }
    }
    pool.push(ComplexScalar::ratio(1, 2));
    pool.push(ComplexScalar::ratio(-5, 3));
    pool.shuffle(rng);
    pool.truncate(n);
    pool
}

/// Unfiltered random datum with `rank ≤ max_rank` and `n ≤ max_points` log points.
pub fn raw_datum(rng: &mut TestRng, max_rank: usize, max_points: usize) -> ConnectionData {
    let rank = rng.gen_range(1..=max_rank);
    let n = rng.gen_range(1..=max_points);
    let log_points = distinct_points(rng, n)
        .into_iter()
        .map(|position| LogPoint {
            position,
            pieces: nontrivial_pieces(rng, rank),
        })
        .collect();
    let mults = composition(rng, rank);
    let groups = distinct_points(rng, mults.len())
        .into_iter()
        .zip(mults)
        .map(|(leading, m)| IrregularGroup {
            leading,
            pieces: pieces(rng, m, false),
        })
        .collect();
    ConnectionData {
        side: Side::DeRham,
        rank,
        degree: rng.gen_range(-3..=3),
        log_points,
        infinity: IrregularPoint { groups },
    }
}

/// Sets the degree so that the parabolic degree vanishes, when that is possible.
pub fn with_zero_pardeg(mut d: ConnectionData) -> Option<ConnectionData> {
    d.degree = 0;
    let p = parabolic_degree(&d).ok()?;
    if !p.is_integer() {
        return None;
    }
    d.degree = -p.to_integer().try_into().ok()?;
    Some(d)
}

/// True when the datum and its transform satisfy every hypothesis in strict mode.
pub fn admissible(d: &ConnectionData) -> bool {
    involution_defect(d, &TransformOptions::default()).is_ok()
}

/// Parabolic degree zero with an integral Dolbeault degree.
pub fn pardeg_zero(d: &ConnectionData) -> bool {
    parabolic_degree(d).is_ok_and(|p| p.is_zero()) && to_dolbeault(d).is_ok()
}

/// Rejection-sampled corpus of admissible data. Every other accepted datum is
/// steered towards parabolic degree zero.
pub fn corpus(seed: u64, size: usize, max_rank: usize, max_points: usize) -> Vec<ConnectionData> {
    let mut rng = rng(seed);
    let mut out = Vec::with_capacity(size);
    let mut attempts = 0usize;
    while out.len() < size {
        attempts += 1;
        assert!(
            attempts < 200_000,
            "corpus generator starved after {} data",
            out.len()
        );
        let mut d = raw_datum(&mut rng, max_rank, max_points);
        if out.len() % 2 == 0 {
            match with_zero_pardeg(d) {
                Some(z) if pardeg_zero(&z) => d = z,
                _ => continue,
            }
        }
        if admissible(&d) {
            out.push(d);
        }
    }
    out
}

/// Rank-one datum `(z − z1)^μ e^{a z}` with matching exponent at infinity.
pub fn rank_one(rng: &mut TestRng) -> ConnectionData {
    loop {
        let pts = distinct_points(rng, 2);
        let (z1, a) = (pts[0].clone(), pts[1].clone());
        if a.is_zero() {
            continue;
        }
        let mu = eigenvalue(rng);
        let d = ConnectionData {
            side: Side::DeRham,
            rank: 1,
            degree: 0,
            log_points: vec![LogPoint {
                position: z1,
                pieces: vec![GradedResiduePiece::new(
                    weight(rng),
                    vec![JordanBlock::new(mu.clone(), 1)],
                )],
            }],
            infinity: IrregularPoint {
                groups: vec![IrregularGroup {
                    leading: a,
                    pieces: vec![GradedResiduePiece::new(
                        weight(rng),
                        vec![JordanBlock::new(mu, 1)],
                    )],
                }],
            },
        };
        if admissible(&d) {
            return d;
        }
    }
}
