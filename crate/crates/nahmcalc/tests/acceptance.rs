//! Acceptance run: one PASS/FAIL line per criterion. Exits non-zero on any failure.

mod common;

use std::collections::BTreeMap;
use std::time::Instant;

use common::*;
use nahmcalc::cli::rank_one_oracle;
use nahmcalc::hodge_table::{de_rham_to_dolbeault, dolbeault_to_de_rham};
use nahmcalc::lattice::{block_minimal_extension, ExtensionTag};
use nahmcalc::puiseux::{
    branch_count_at, char_poly, inverse_branches, puiseux_branches, LocalHiggsField,
};
use nahmcalc::scalar::{q, qi, ComplexScalar, GaussQ, Q};
use nahmcalc::singularity_data::{
    ConnectionData, GradedResiduePiece, IrregularGroup, IrregularPoint, JordanBlock, LogPoint, Side,
};
use nahmcalc::stationary_phase::{
    dolbeault_transform, grr_report, involution_defect, pardeg_report, transform_weights_dolbeault,
    transformed_rank, GradedClass, TransformOptions,
};
use nahmcalc::weyl::{
    invariant_lattice_search, singular_points, ConnectionMatrix, Laurent, SingularPoint, Variable,
    WeylOperator,
};
use num_complex::Complex64;
use num_traits::Zero;
use rand::Rng;

const PUISEUX_TOL: f64 = 1e-6;
const SEARCH_TRUNCATION: i64 = 8;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn gauss(rng: &mut TestRng) -> GaussQ {
    let re = q(rng.gen_range(-9..=9), rng.gen_range(1..=4));
    let im = if rng.gen_bool(0.3) {
        q(rng.gen_range(-4..=4), rng.gen_range(1..=3))
    } else {
        Q::zero()
    };
    GaussQ::new(re, im)
}

fn involution(corpus: &[ConnectionData]) -> Outcome {
    let mut failures = 0;
    for d in corpus {
        match involution_defect(d, &TransformOptions::default()) {
            Ok(defects) if defects.is_empty() => {}
            _ => failures += 1,
        }
    }
    let mut shape: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for d in corpus {
        *shape.entry((d.rank, d.n_points())).or_default() += 1;
    }
    let shape: Vec<String> = shape
        .iter()
        .map(|((r, n), c)| format!("r{r}n{n}:{c}"))
        .collect();
    outcome(
        failures == 0,
        format!(
            "{}/{} reproduced exactly; corpus {}",
            corpus.len() - failures,
            corpus.len(),
            shape.join(" ")
        ),
    )
}

fn pardeg(corpus: &[ConnectionData]) -> Outcome {
    let subset: Vec<&ConnectionData> = corpus.iter().filter(|d| pardeg_zero(d)).collect();
    let mut bad = Vec::new();
    for d in &subset {
        match pardeg_report(d, 1e-9) {
            Ok(r) if r.transformed.is_zero() => {}
            Ok(r) => bad.push(format!("pardeg {}", r.transformed)),
            Err(e) => bad.push(e.to_string()),
        }
    }
    let pass = bad.is_empty() && !subset.is_empty();
    outcome(
        pass,
        format!(
            "{}/{} with transformed pardeg exactly 0 {}",
            subset.len() - bad.len(),
            subset.len(),
            bad.join("; ")
        ),
    )
}

fn grr(corpus: &[ConnectionData]) -> Outcome {
    let mut bad = 0;
    let mut checked_dolbeault = 0;
    for d in corpus {
        let Ok(report) = grr_report(d, 1e-9) else {
            bad += 1;
            continue;
        };
        let mut ok = report.passes() && transformed_rank(d, 1e-9).ok() == Some(report.r_hat);
        if pardeg_zero(d) {
            checked_dolbeault += 1;
            let dol = nahmcalc::hodge_table::to_dolbeault(d).expect("integral Dolbeault degree");
            let t = dolbeault_transform(&dol, false, 1e-9).expect("Dolbeault transform");
            let p = pardeg_report(d, 1e-9).expect("pardeg report");
            ok &= p.rank_matches_de_rham && t.rank == report.r_hat;
            ok &= t.degree == t.f + d.rank as i64 + t.rank as i64;
        }
        if !ok {
            bad += 1;
        }
    }
    outcome(
        bad == 0,
        format!(
            "{}/{} consistent ({} also checked against the Dolbeault bookkeeping)",
            corpus.len() - bad,
            corpus.len(),
            checked_dolbeault
        ),
    )
}

fn simpson_round_trip() -> Outcome {
    let mut r = rng(404);
    let mut bad = 0;
    for _ in 0..1000 {
        let mu = ComplexScalar::Exact(gauss(&mut r));
        let beta = q(r.gen_range(-12..=12), r.gen_range(1..=7));
        let p = de_rham_to_dolbeault(&mu, &beta);
        let (mu2, beta2) = dolbeault_to_de_rham(&p.alpha, &p.lambda);
        let p2 = de_rham_to_dolbeault(&mu2, &beta2);
        if mu2 != mu || beta2 != beta || p2 != p {
            bad += 1;
        }
    }
    outcome(bad == 0, format!("{}/1000 exact", 1000 - bad))
}

fn weyl_oracle() -> Outcome {
    let mut r = rng(505);
    let mut shifts = Vec::new();
    let mut bad = Vec::new();
    for k in 0..20 {
        let d = rank_one(&mut r);
        let a = d.infinity.groups[0].leading.clone();
        let v = match rank_one_oracle(&d, &TransformOptions::default()) {
            Ok(v) => v,
            Err(e) => {
                bad.push(format!("#{k}: {e}"));
                continue;
            }
        };
        let op = nahmcalc::weyl::rank_one_model(
            d.log_points[0].position.as_exact().unwrap(),
            d.log_points[0].pieces[0].blocks[0]
                .eigenvalue
                .as_exact()
                .unwrap(),
            a.as_exact().unwrap(),
        );
        let locus = singular_points(&op.fourier_laplace(), 1e-9).unwrap_or_default();
        let exact_locus = locus == vec![SingularPoint::Finite(a.clone()), SingularPoint::Infinity]
            && a.is_exact();
        if !exact_locus || v["loci_match"] != true || v["shift_integral"] != true {
            bad.push(format!("#{k}: {}", v["shift"]));
        }
        shifts.push(v["shift"].clone());
    }
    let constant_one = shifts.iter().all(|s| s == &serde_json::json!(["1", "0"]));
    outcome(
        bad.is_empty() && constant_one && shifts.len() == 20,
        format!(
            "20 cases, loci exact {}, shift constant 1: {} {}",
            bad.is_empty(),
            constant_one,
            bad.join("; ")
        ),
    )
}

fn random_operator(rng: &mut TestRng) -> WeylOperator {
    let mut op = WeylOperator::zero(Variable::Z);
    for _ in 0..rng.gen_range(1..=5) {
        let m = WeylOperator::monomial(
            Variable::Z,
            gauss(rng),
            rng.gen_range(0..=4),
            rng.gen_range(0..=4),
        );
        op = op.add(&m).unwrap();
    }
    op
}

fn weyl_identities() -> Outcome {
    let mut r = rng(606);
    let ops: Vec<WeylOperator> = (0..50).map(|_| random_operator(&mut r)).collect();
    let (mut assoc, mut hom, mut square) = (0, 0, 0);
    for k in 0..ops.len() {
        let (p, s, t) = (&ops[k], &ops[(k + 1) % 50], &ops[(k + 2) % 50]);
        let left = p.multiply(s).unwrap().multiply(t).unwrap();
        let right = p.multiply(&s.multiply(t).unwrap()).unwrap();
        assoc += usize::from(left == right);
        let fl_prod = p.multiply(s).unwrap().fourier_laplace();
        hom += usize::from(fl_prod == p.fourier_laplace().multiply(&s.fourier_laplace()).unwrap());
        square += usize::from(p.fourier_laplace().fourier_laplace() == p.sign_pullback());
    }
    outcome(
        assoc == 50 && hom == 50 && square == 50,
        format!(
            "associativity {assoc}/50, FL homomorphism {hom}/50, FL∘FL = sign pullback {square}/50"
        ),
    )
}

fn c64(c: &ComplexScalar) -> Complex64 {
    c.to_c64()
}

fn puiseux_oracle(corpus: &[ConnectionData]) -> Outcome {
    let mut r = rng(707);
    let mut notes = Vec::new();
    let mut pass = true;
    let mut worst = 0.0f64;
    for rank in 1..=3usize {
        for _ in 0..3 {
            let lambda = ComplexScalar::float(r.gen_range(0.5..2.5), r.gen_range(-1.0..1.0));
            let a = ComplexScalar::float(r.gen_range(0.4..1.2), r.gen_range(-0.5..0.5));
            let run = || -> nahmcalc::Result<(bool, f64)> {
                let field = LocalHiggsField::jordan_model(lambda.clone(), rank, a.clone(), 16)?;
                let branches = puiseux_branches(&char_poly(&field)?, &ComplexScalar::zero(), 8)?;
                let mut ok = branches.len() == rank
                    && branches.iter().all(|b| b.ramification as usize == rank);
                let mut err = 0.0f64;
                for b in &branches {
                    err = err.max((b.indexed_coefficient(-(rank as i64)) - c64(&lambda)).norm());
                }
                for (_, inv) in inverse_branches(&branches, 8)? {
                    err = err.max((inv.indexed_coefficient(rank as i64) - c64(&lambda)).norm());
                }
                ok &= err < PUISEUX_TOL;
                Ok((ok, err))
            };
            match run() {
                Ok((ok, err)) => {
                    pass &= ok;
                    worst = worst.max(err);
                }
                Err(e) => {
                    pass = false;
                    notes.push(format!("r={rank}: {e}"));
                }
            }
        }
    }
    let zero_count =
        LocalHiggsField::jordan_model(ComplexScalar::zero(), 2, ComplexScalar::float(0.7, 0.3), 16)
            .and_then(|f| char_poly(&f))
            .and_then(|p| puiseux_branches(&p, &ComplexScalar::zero(), 8))
            .and_then(|b| inverse_branches(&b, 8))
            .map(|pairs| pairs.iter().map(|(_, inv)| inv.ramification).sum::<u32>());
    let zero_ok = matches!(zero_count, Ok(1));
    let mut counted = 0;
    let zeta = ComplexScalar::float(40.0, 10.0);
    for d in corpus.iter().take(20) {
        match (branch_count_at(d, &zeta, 1e-9), transformed_rank(d, 1e-9)) {
            (Ok(a), Ok(b)) if a == b => counted += 1,
            (a, b) => notes.push(format!("count {a:?} vs rank {b:?}")),
        }
    }
    outcome(
        pass && zero_ok && counted == 20,
        format!(
            "J_r(λ) r=1..3 max coefficient error {worst:.1e}; λ=0 r=2 inverse count {zero_count:?}; branch count = r̂ on {counted}/20 {}",
            notes.join("; ")
        ),
    )
}

fn scalar(entries: &[(i64, GaussQ)]) -> ConnectionMatrix {
    ConnectionMatrix {
        entries: vec![vec![entries.iter().cloned().collect::<Laurent>()]],
    }
}

fn minimal_extension_examples() -> Outcome {
    use ExtensionTag::{Lattice, Meromorphic};
    let tol = 1e-9;
    let tags =
        |mu: ComplexScalar, s| block_minimal_extension(&JordanBlock::new(mu, s), tol).unwrap();
    let mut checks: Vec<(&str, bool)> = vec![
        (
            "trivial",
            tags(ComplexScalar::zero(), 1) == vec![Lattice(0)],
        ),
        (
            "integer residue",
            tags(ComplexScalar::int(2), 1) == vec![Lattice(2)],
        ),
        (
            "non-integer residue",
            tags(ComplexScalar::ratio(1, 3), 1) == vec![Meromorphic],
        ),
        (
            "rank-2 nilpotent",
            tags(ComplexScalar::zero(), 2) == vec![Meromorphic, Lattice(0)],
        ),
        (
            "rank-2 integer",
            tags(ComplexScalar::int(-1), 2) == vec![Meromorphic, Lattice(-1)],
        ),
    ];
    let irregular = ConnectionData {
        side: Side::DeRham,
        rank: 1,
        degree: 0,
        log_points: vec![LogPoint {
            position: ComplexScalar::zero(),
            pieces: vec![GradedResiduePiece::new(
                q(1, 2),
                vec![JordanBlock::new(ComplexScalar::ratio(1, 3), 1)],
            )],
        }],
        infinity: IrregularPoint {
            groups: vec![IrregularGroup {
                leading: ComplexScalar::int(1),
                pieces: vec![GradedResiduePiece::new(
                    q(1, 2),
                    vec![JordanBlock::new(ComplexScalar::ratio(1, 3), 1)],
                )],
            }],
        },
    };
    let spec = nahmcalc::lattice::minimal_extension(&irregular, tol).unwrap();
    checks.push((
        "irregular",
        spec.points.last().unwrap().blocks == vec![vec![Meromorphic]],
    ));

    let g = |n: i64, d: i64| GaussQ::new(q(n, d), Q::zero());
    let empty = |c: &ConnectionMatrix, cand: &[ExtensionTag]| {
        invariant_lattice_search(c, cand, &[], SEARCH_TRUNCATION).is_ok_and(|w| w.is_empty())
    };
    let finds = |c: &ConnectionMatrix, cand: &[ExtensionTag]| {
        invariant_lattice_search(c, cand, &[], SEARCH_TRUNCATION).is_ok_and(|w| !w.is_empty())
    };
    let trivial = scalar(&[]);
    let integer = scalar(&[(-1, g(2, 1))]);
    let nonint = scalar(&[(-1, g(1, 3))]);
    let irr = scalar(&[(-2, g(1, 1))]);
    let zero = Laurent::new();
    let nilpotent = ConnectionMatrix {
        entries: vec![
            vec![zero.clone(), [(-1, g(1, 1))].into_iter().collect()],
            vec![zero.clone(), zero.clone()],
        ],
    };
    let trivial2 = ConnectionMatrix {
        entries: vec![vec![zero.clone(); 2]; 2],
    };
    checks.extend([
        ("search trivial minimal", empty(&trivial, &[Lattice(0)])),
        (
            "search trivial meromorphic not minimal",
            finds(&trivial, &[Meromorphic]),
        ),
        ("search integer minimal", empty(&integer, &[Lattice(2)])),
        (
            "search integer meromorphic not minimal",
            finds(&integer, &[Meromorphic]),
        ),
        ("search non-integer minimal", empty(&nonint, &[Meromorphic])),
        ("search irregular minimal", empty(&irr, &[Meromorphic])),
        (
            "search rank-2 nilpotent minimal",
            empty(&nilpotent, &[Meromorphic, Lattice(0)]),
        ),
        (
            "search rank-2 nilpotent meromorphic not minimal",
            finds(&nilpotent, &[Meromorphic, Meromorphic]),
        ),
        (
            "search rank-2 full lattice not minimal",
            finds(&trivial2, &[Meromorphic, Meromorphic]),
        ),
    ]);
    let failed: Vec<&str> = checks
        .iter()
        .filter(|(_, ok)| !ok)
        .map(|(n, _)| *n)
        .collect();
    outcome(
        failed.is_empty(),
        format!(
            "{}/{} descriptors and certificates {}",
            checks.len() - failed.len(),
            checks.len(),
            failed.join(", ")
        ),
    )
}

fn weight_rules() -> Outcome {
    let lambda = ComplexScalar::exact(q(1, 2), q(1, 3));
    let dol = ConnectionData {
        side: Side::Dolbeault,
        rank: 6,
        degree: 0,
        log_points: vec![LogPoint {
            position: ComplexScalar::zero(),
            pieces: vec![
                GradedResiduePiece::new(qi(0), vec![JordanBlock::new(lambda.clone(), 5)]),
                GradedResiduePiece::new(
                    q(2, 5),
                    vec![JordanBlock::new(ComplexScalar::ratio(-1, 4), 1)],
                ),
            ],
        }],
        infinity: IrregularPoint {
            groups: vec![IrregularGroup {
                leading: ComplexScalar::int(1),
                pieces: vec![GradedResiduePiece::new(
                    q(3, 4),
                    vec![JordanBlock::new(ComplexScalar::ratio(1, 5), 6)],
                )],
            }],
        },
    };
    let recs = match transform_weights_dolbeault(&dol, 1e-9) {
        Ok(r) => r,
        Err(e) => return outcome(false, e.to_string()),
    };
    let find =
        |class: GradedClass, src: &str| recs.iter().find(|r| r.class == class && r.source == src);
    let below = find(GradedClass::PsiNonzeroBelow, "log_points[0].pieces[0]");
    let above = find(GradedClass::PsiNonzeroAtOrAbove, "log_points[0].pieces[0]");
    let split_ok = below.is_some_and(|r| r.dim == 2 && r.raw == qi(-1))
        && above.is_some_and(|r| r.dim == 3 && r.raw == qi(0));
    let positive: Vec<_> = recs
        .iter()
        .filter(|r| r.class == GradedClass::Positive)
        .collect();
    let positive_ok = positive.len() == 2
        && positive
            .iter()
            .all(|r| r.raw == &r.input_weight - qi(1) && r.normalized == r.input_weight);
    outcome(
        split_ok && positive_ok,
        format!("J_5 split (2 at −1, 3 at 0): {split_ok}; α ∈ (0,1) → α−1 raw, α normalized: {positive_ok}"),
    )
}

fn main() {
    let start = Instant::now();
    let corpus = corpus(2024, 100, 4, 3);
    let results = [
        ("1 involution", involution(&corpus)),
        ("2 parabolic degree conservation", pardeg(&corpus)),
        ("3 rank and degree identity", grr(&corpus)),
        ("4 table round trip", simpson_round_trip()),
        ("5 operator oracle", weyl_oracle()),
        ("6 operator identities", weyl_identities()),
        ("7 spectral branches", puiseux_oracle(&corpus)),
        ("8 minimal extensions", minimal_extension_examples()),
        ("9 weight rules", weight_rules()),
    ];
    let mut failed = 0;
    for (name, o) in &results {
        println!(
            "{} {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail.trim_end()
        );
        failed += usize::from(!o.pass);
    }
    println!(
        "{} of {} criteria passed in {:.1?}",
        results.len() - failed,
        results.len(),
        start.elapsed()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
