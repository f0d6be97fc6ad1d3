//! Spectral-curve numerics: characteristic polynomials of local Higgs fields,
//! Newton polygons, Newton–Puiseux branch expansion, series inversion and
//! branch counting.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::hodge_table::de_rham_to_dolbeault;
use crate::roots::polynomial_roots;
use crate::scalar::{ComplexScalar, Q};
use crate::singularity_data::{ensure_valid, ConnectionData};

/// Laurent polynomial in the local coordinate.
pub type LaurentSeries = BTreeMap<i64, ComplexScalar>;

/// Local Higgs field `θ(w)` near a point, entries known through `w^N`.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalHiggsField {
    pub entries: Vec<Vec<LaurentSeries>>,
    pub truncation: i64,
    pub at_infinity: bool,
}

impl LocalHiggsField {
    pub fn new(
        entries: Vec<Vec<LaurentSeries>>,
        truncation: i64,
        at_infinity: bool,
    ) -> Result<Self> {
        let n = entries.len();
        if n == 0 || entries.iter().any(|row| row.len() != n) {
            return Err(Error::Inconsistent(
                "Higgs field must be a non-empty square matrix".into(),
            ));
        }
        let max_pole = if at_infinity { 2 } else { 1 };
        for (i, row) in entries.iter().enumerate() {
            for (j, e) in row.iter().enumerate() {
                if let Some((&k, _)) = e.iter().find(|(_, c)| !c.is_zero()) {
                    if k < -max_pole {
                        return Err(Error::Inconsistent(format!(
                            "entry ({i},{j}) has a pole of order {} above {max_pole}",
                            -k
                        )));
                    }
                }
                if e.keys().any(|&k| k > truncation) {
                    return Err(Error::Inconsistent(format!(
                        "entry ({i},{j}) exceeds the truncation order"
                    )));
                }
            }
        }
        Ok(LocalHiggsField {
            entries,
            truncation,
            at_infinity,
        })
    }

    /// `θ = (λ·Id + N)/w + a·E_{s,1}` for a Jordan block of size `s`; `a` is the
    /// genericity entry.
    pub fn jordan_model(
        lambda: ComplexScalar,
        size: usize,
        a: ComplexScalar,
        truncation: i64,
    ) -> Result<Self> {
        let mut entries = vec![vec![LaurentSeries::new(); size]; size];
        for (k, row) in entries.iter_mut().enumerate() {
            if !lambda.is_zero() {
                row[k].insert(-1, lambda.clone());
            }
            if k + 1 < size {
                row[k + 1].insert(-1, ComplexScalar::one());
            }
        }
        if !a.is_zero() {
            let e = &mut entries[size - 1][0];
            let c = e.remove(&0).unwrap_or_default();
            e.insert(0, &c + &a);
        }
        Self::new(entries, truncation, false)
    }

    pub fn rank(&self) -> usize {
        self.entries.len()
    }

    fn pole_order(&self) -> i64 {
        self.entries
            .iter()
            .flatten()
            .filter_map(|e| e.iter().find(|(_, c)| !c.is_zero()).map(|(&k, _)| -k))
            .max()
            .unwrap_or(0)
            .max(0)
    }
}

/// `Σ c_{pq} w^p ζ^q`.
#[derive(Clone, Debug, PartialEq)]
pub struct BivariatePolynomial {
    terms: BTreeMap<(i64, u32), ComplexScalar>,
    /// Highest reliable exponent of `w`, when the polynomial comes from truncated data.
    pub precision: Option<i64>,
}

impl BivariatePolynomial {
    pub fn from_terms(terms: impl IntoIterator<Item = ((i64, u32), ComplexScalar)>) -> Self {
        let mut out = BivariatePolynomial {
            terms: BTreeMap::new(),
            precision: None,
        };
        for ((p, q), c) in terms {
            out.add(p, q, c);
        }
        out
    }

    fn add(&mut self, p: i64, q: u32, c: ComplexScalar) {
        if c.is_zero() {
            return;
        }
        let e = self.terms.entry((p, q)).or_default();
        *e = &*e + &c;
        if e.is_zero() {
            self.terms.remove(&(p, q));
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(i64, u32), &ComplexScalar)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, p: i64, q: u32) -> ComplexScalar {
        self.terms.get(&(p, q)).cloned().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Degree in the spectral variable.
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|k| k.1).max().unwrap_or(0)
    }

    fn mul(&self, other: &BivariatePolynomial) -> BivariatePolynomial {
        let mut out = BivariatePolynomial {
            terms: BTreeMap::new(),
            precision: None,
        };
        for (&(p, q), a) in &self.terms {
            for (&(r, s), b) in &other.terms {
                out.add(p + r, q + s, a * b);
            }
        }
        out
    }

    fn combine(&self, other: &BivariatePolynomial, sign: i64) -> BivariatePolynomial {
        let mut out = self.clone();
        for (&(p, q), c) in &other.terms {
            out.add(p, q, if sign < 0 { -c } else { c.clone() });
        }
        out
    }

    /// Substitutes `ζ = w^{−k} ζ′` and clears denominators by `w^{k·deg}`.
    pub fn rescale_spectral(&self, k: i64) -> BivariatePolynomial {
        let deg = self.degree() as i64;
        BivariatePolynomial {
            terms: self
                .terms
                .iter()
                .map(|(&(p, q), c)| ((p - k * q as i64 + k * deg, q), c.clone()))
                .collect(),
            precision: self.precision.map(|n| n + k * deg),
        }
    }
}

fn det(m: &[Vec<BivariatePolynomial>]) -> BivariatePolynomial {
    let n = m.len();
    if n == 1 {
        return m[0][0].clone();
    }
    let mut out = BivariatePolynomial::from_terms([]);
    for col in 0..n {
        let minor: Vec<Vec<BivariatePolynomial>> = m[1..]
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|(c, _)| *c != col)
                    .map(|(_, x)| x.clone())
                    .collect()
            })
            .collect();
        let term = m[0][col].mul(&det(&minor));
        out = out.combine(&term, if col % 2 == 0 { 1 } else { -1 });
    }
    out
}

/// `det(ζ·Id − θ)`, with `ζ` standing for the rescaled spectral variable.
/// Terms beyond the reliable order `N − (r−1)·d` are dropped.
pub fn char_poly(field: &LocalHiggsField) -> Result<BivariatePolynomial> {
    let r = field.rank();
    let d = field.pole_order();
    let precision = field.truncation - (r as i64 - 1) * d;
    if precision < 0 {
        return Err(Error::Inconclusive(format!(
            "truncation {} too small for rank {r} and pole order {d}",
            field.truncation
        )));
    }
    let m: Vec<Vec<BivariatePolynomial>> = (0..r)
        .map(|i| {
            (0..r)
                .map(|j| {
                    let mut e = BivariatePolynomial::from_terms(
                        field.entries[i][j].iter().map(|(&p, c)| ((p, 0), -c)),
                    );
                    if i == j {
                        e.add(0, 1, ComplexScalar::one());
                    }
                    e
                })
                .collect()
        })
        .collect();
    let mut out = det(&m);
    out.terms.retain(|&(p, _), _| p <= precision);
    out.precision = Some(precision);
    Ok(out)
}

type NumPoly = BTreeMap<(Q, u32), Complex64>;

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, t| acc * (n - t) as f64 / (t + 1) as f64)
}

fn to_numeric(poly: &BivariatePolynomial, center: &ComplexScalar) -> NumPoly {
    let c = center.to_c64();
    let mut out = NumPoly::new();
    for (&(p, q), a) in poly.terms() {
        let a = a.to_c64();
        // a w^p (c + η)^q
        for k in 0..=q {
            let coeff = a * binomial(q, k) * c.powu(q - k);
            *out.entry((Q::from_integer(p.into()), k))
                .or_insert(Complex64::zero()) += coeff;
        }
    }
    clean(&mut out);
    out
}

fn clean(poly: &mut NumPoly) {
    let scale = poly.values().map(|c| c.norm()).fold(0.0, f64::max);
    poly.retain(|_, c| c.norm() > ZERO_TOL * scale);
}

const ZERO_TOL: f64 = 1e-10;
const CLUSTER_TOL: f64 = 1e-3;

#[derive(Clone, Debug, PartialEq)]
struct Edge {
    q_left: u32,
    q_right: u32,
    gamma: Q,
}

/// Lower convex hull of `(q, p)` restricted to `q ≤ q_max`, left to right.
fn hull_edges(poly: &NumPoly, q_max: u32) -> (u32, Vec<Edge>) {
    let mut lowest: BTreeMap<u32, Q> = BTreeMap::new();
    for (p, q) in poly.keys().map(|(p, q)| (p, *q)) {
        if q > q_max {
            continue;
        }
        let e = lowest.entry(q).or_insert_with(|| p.clone());
        if p < e {
            *e = p.clone();
        }
    }
    let pts: Vec<(u32, Q)> = lowest.into_iter().collect();
    let q_min = pts.first().map(|p| p.0).unwrap_or(0);
    let mut hull: Vec<(u32, Q)> = Vec::new();
    for pt in pts {
        while hull.len() >= 2 {
            let (a, b) = (&hull[hull.len() - 2], &hull[hull.len() - 1]);
            // remove b if it lies on or above segment a–pt
            let lhs = (&b.1 - &a.1) * Q::from_integer((pt.0 - a.0).into());
            let rhs = (&pt.1 - &a.1) * Q::from_integer((b.0 - a.0).into());
            if lhs >= rhs {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(pt);
    }
    let edges = hull
        .windows(2)
        .map(|w| Edge {
            q_left: w[0].0,
            q_right: w[1].0,
            gamma: (&w[0].1 - &w[1].1) / Q::from_integer((w[1].0 - w[0].0).into()),
        })
        .collect();
    (q_min, edges)
}

/// Edges of the Newton polygon after recentering `ζ ↦ center + η`, as
/// `(γ, length)` with branches `η ~ w^γ`; ordered by increasing `γ`.
pub fn newton_polygon(poly: &BivariatePolynomial, center: &ComplexScalar) -> Vec<(Q, usize)> {
    let num = to_numeric(poly, center);
    let q_max = num.keys().map(|k| k.1).max().unwrap_or(0);
    let (_, edges) = hull_edges(&num, q_max);
    let mut out: Vec<(Q, usize)> = edges
        .into_iter()
        .map(|e| (e.gamma, (e.q_right - e.q_left) as usize))
        .collect();
    out.sort_by(|a, b| a.0.cmp(&b.0));
    out
}

#[derive(Clone, Debug, PartialEq)]
pub enum BasePoint {
    /// Independent variable is `w`, the local coordinate at a finite point.
    Finite(ComplexScalar),
    /// Independent variable is `1/ζ`.
    Infinity,
}

/// `Σ c_e t^e` with `t` the local coordinate at the base point.
#[derive(Clone, Debug, PartialEq)]
pub struct PuiseuxBranch {
    pub base: BasePoint,
    /// Every exponent times `ramification` is an integer.
    pub ramification: u32,
    pub terms: Vec<(Q, ComplexScalar)>,
    /// Branches with the same class are Galois conjugate.
    pub class: usize,
}

impl PuiseuxBranch {
    pub fn leading(&self) -> Option<&(Q, ComplexScalar)> {
        self.terms.first()
    }

    /// Coefficient of `t^{k/ramification}`.
    pub fn indexed_coefficient(&self, k: i64) -> Complex64 {
        let e = Q::new(k.into(), (self.ramification as i64).into());
        self.coefficient(&e)
    }

    pub fn coefficient(&self, e: &Q) -> Complex64 {
        self.terms
            .iter()
            .find(|(x, _)| x == e)
            .map(|(_, c)| c.to_c64())
            .unwrap_or_default()
    }

    /// Evaluates at `t = s^ramification`, given `s`.
    pub fn eval_root(&self, s: Complex64) -> Complex64 {
        let r = Q::from_integer((self.ramification as i64).into());
        self.terms
            .iter()
            .map(|(e, c)| {
                let k = (e * &r).to_integer().to_i32().unwrap_or(0);
                c.to_c64() * s.powi(k)
            })
            .sum()
    }
}

fn horner(coeffs: &[Complex64], x: Complex64) -> Complex64 {
    coeffs
        .iter()
        .rev()
        .fold(Complex64::zero(), |acc, c| acc * x + c)
}

fn derivative(coeffs: &[Complex64]) -> Vec<Complex64> {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, c)| c * k as f64)
        .collect()
}

/// Distinct nonzero roots of the edge polynomial with multiplicities.
fn edge_roots(edge_poly: &[Complex64]) -> Result<Vec<(Complex64, u32)>> {
    let roots: Vec<Complex64> = polynomial_roots(edge_poly)?
        .into_iter()
        .filter(|r| r.norm() > 0.0)
        .collect();
    let scale = roots.iter().map(|r| r.norm()).fold(1.0, f64::max);
    // an m-fold root is resolved only to about eps^{1/m}
    let mut clusters: Vec<(Vec<Complex64>, u32)> = Vec::new();
    for r in roots {
        match clusters
            .iter_mut()
            .find(|(c, _)| (c[0] - r).norm() < CLUSTER_TOL * scale)
        {
            Some(c) => {
                c.0.push(r);
                c.1 += 1;
            }
            None => clusters.push((vec![r], 1)),
        }
    }
    let mut out = Vec::new();
    for (members, m) in clusters {
        let mut c: Complex64 = members.iter().sum::<Complex64>() / members.len() as f64;
        if m > 1 {
            // the (m−1)-th derivative has a simple root at the cluster
            let mut d = edge_poly.to_vec();
            for _ in 0..m - 1 {
                d = derivative(&d);
            }
            let dd = derivative(&d);
            for _ in 0..50 {
                let den = horner(&dd, c);
                if den.norm() == 0.0 {
                    break;
                }
                let step = horner(&d, c) / den;
                c -= step;
                if step.norm() < 1e-16 * scale {
                    break;
                }
            }
        }
        out.push((c, m));
    }
    Ok(out)
}

/// `P(w, c·w^γ + y)`.
fn substitute(poly: &NumPoly, gamma: &Q, c: Complex64) -> NumPoly {
    let mut out = NumPoly::new();
    for ((p, q), a) in poly {
        for k in 0..=*q {
            let coeff = a * binomial(*q, k) * c.powu(q - k);
            let e = p + gamma * Q::from_integer(((q - k) as i64).into());
            *out.entry((e, k)).or_insert(Complex64::zero()) += coeff;
        }
    }
    clean(&mut out);
    out
}

struct Expansion {
    depth: usize,
    out: Vec<Vec<(Q, Complex64)>>,
}

impl Expansion {
    /// Roots of `poly` in `y`, counted up to `q_max`, whose exponent exceeds `floor`.
    fn expand(
        &mut self,
        poly: &NumPoly,
        prefix: &[(Q, Complex64)],
        q_max: u32,
        floor: Option<&Q>,
    ) -> Result<()> {
        let (q_min, edges) = hull_edges(poly, q_max);
        // y = 0 is an exact root of multiplicity q_min
        for _ in 0..q_min.min(q_max) {
            self.out.push(prefix.to_vec());
        }
        for edge in edges {
            if let Some(f) = floor {
                if edge.gamma <= *f {
                    return Err(Error::Numeric(
                        "Newton polygon lost monotonicity; coefficients too noisy".into(),
                    ));
                }
            }
            let p_right = poly_p_at(poly, edge.q_right);
            let on_edge: Vec<Complex64> = (edge.q_left..=edge.q_right)
                .map(|q| {
                    let p = &p_right
                        + &edge.gamma * Q::from_integer(((edge.q_right - q) as i64).into());
                    poly.get(&(p, q)).copied().unwrap_or_default()
                })
                .collect();
            for (c, m) in edge_roots(&on_edge)? {
                let mut next = prefix.to_vec();
                next.push((edge.gamma.clone(), c));
                if next.len() >= self.depth {
                    for _ in 0..m {
                        self.out.push(next.clone());
                    }
                    continue;
                }
                let sub = substitute(poly, &edge.gamma, c);
                self.expand(&sub, &next, m, Some(&edge.gamma))?;
            }
        }
        Ok(())
    }
}

fn poly_p_at(poly: &NumPoly, q: u32) -> Q {
    poly.keys()
        .filter(|(_, qq)| *qq == q)
        .map(|(p, _)| p.clone())
        .min()
        .unwrap_or_default()
}

fn ramification_of(terms: &[(Q, Complex64)]) -> u32 {
    let lead = terms.first().map(|t| t.1.norm()).unwrap_or(1.0).max(1e-300);
    terms
        .iter()
        .filter(|(_, c)| c.norm() > 1e-8 * lead.max(1.0))
        .fold(1i64, |acc, (e, _)| {
            acc.lcm(&e.denom().to_i64().unwrap_or(1))
        }) as u32
}

fn conjugate(a: &[(Q, Complex64)], b: &[(Q, Complex64)], r: u32) -> bool {
    if a.len() != b.len() || a.iter().zip(b).any(|(x, y)| x.0 != y.0) {
        return false;
    }
    (0..r).any(|k| {
        a.iter().zip(b).all(|((e, x), (_, y))| {
            let n = (e * Q::from_integer((r as i64).into()))
                .to_integer()
                .to_i64()
                .unwrap_or(0);
            let w = Complex64::from_polar(1.0, 2.0 * PI * (k as f64) * (n as f64) / r as f64);
            (x * w - y).norm() <= 1e-6 * x.norm().max(1.0)
        })
    })
}

/// Puiseux expansions of the roots `ζ(w)` near `w = 0`, `depth` terms each.
/// Returns one branch per root, with multiplicity.
pub fn puiseux_branches(
    poly: &BivariatePolynomial,
    center: &ComplexScalar,
    depth: usize,
) -> Result<Vec<PuiseuxBranch>> {
    if poly.is_zero() {
        return Err(Error::Inconsistent("zero polynomial".into()));
    }
    if depth == 0 {
        return Err(Error::Inconsistent("depth must be positive".into()));
    }
    if let Some(n) = poly.precision {
        if depth as i64 > n.max(0) + 1 {
            return Err(Error::Inconclusive(format!(
                "depth {depth} exceeds what truncation order {n} supports"
            )));
        }
    }
    let num = to_numeric(poly, center);
    let q_max = num.keys().map(|k| k.1).max().unwrap_or(0);
    let mut exp = Expansion {
        depth,
        out: Vec::new(),
    };
    exp.expand(&num, &[], q_max, None)?;
    let c0 = center.to_c64();
    let mut raw: Vec<Vec<(Q, Complex64)>> = exp
        .out
        .into_iter()
        .map(|mut t| {
            if c0.norm() > 0.0 {
                match t.iter_mut().find(|(e, _)| e.is_zero()) {
                    Some(x) => x.1 += c0,
                    None => {
                        let pos = t
                            .iter()
                            .position(|(e, _)| e.is_positive())
                            .unwrap_or(t.len());
                        t.insert(pos, (Q::zero(), c0));
                    }
                }
            }
            t
        })
        .collect();
    raw.sort_by(|a, b| {
        let key = |t: &Vec<(Q, Complex64)>| t.first().map(|(e, c)| (e.clone(), c.arg()));
        let (ka, kb) = (key(a), key(b));
        match (ka, kb) {
            (Some((ea, aa)), Some((eb, ab))) => ea.cmp(&eb).then(aa.total_cmp(&ab)),
            (a, b) => a.is_some().cmp(&b.is_some()),
        }
    });
    let mut classes: Vec<(Vec<(Q, Complex64)>, u32)> = Vec::new();
    let mut out = Vec::new();
    for t in raw {
        let r = ramification_of(&t);
        let class = match classes
            .iter()
            .position(|(rep, rr)| *rr == r && conjugate(rep, &t, r))
        {
            Some(k) => k,
            None => {
                classes.push((t.clone(), r));
                classes.len() - 1
            }
        };
        out.push(PuiseuxBranch {
            base: BasePoint::Finite(ComplexScalar::zero()),
            ramification: r,
            terms: t
                .into_iter()
                .map(|(e, c)| (e, ComplexScalar::Float(c)))
                .collect(),
            class,
        });
    }
    Ok(out)
}

/// Residual `P(w, ζ(w))` at a sample point `w = s^r`, relative to the largest term.
pub fn branch_residual(poly: &BivariatePolynomial, branch: &PuiseuxBranch, s: Complex64) -> f64 {
    let w = s.powu(branch.ramification);
    let zeta = branch.eval_root(s);
    let mut total = Complex64::zero();
    let mut scale = 0.0f64;
    for (&(p, q), c) in poly.terms() {
        let t = c.to_c64() * w.powi(p as i32) * zeta.powu(q);
        scale = scale.max(t.norm());
        total += t;
    }
    if scale == 0.0 {
        0.0
    } else {
        total.norm() / scale
    }
}

type Series = Vec<Complex64>;

fn series_mul(a: &[Complex64], b: &[Complex64], n: usize) -> Series {
    let mut out = vec![Complex64::zero(); n];
    for (i, x) in a.iter().enumerate().take(n) {
        for (j, y) in b.iter().enumerate().take(n - i) {
            out[i + j] += x * y;
        }
    }
    out
}

/// `g^α` for a power series with `g(0) ≠ 0`, principal branch at the constant term.
fn series_pow(g: &[Complex64], alpha: f64, n: usize) -> Series {
    let mut f = vec![Complex64::zero(); n];
    f[0] = g[0].powf(alpha);
    for k in 1..n {
        let mut acc = Complex64::zero();
        for j in 1..=k {
            let gj = g.get(j).copied().unwrap_or_default();
            acc += gj * f[k - j] * (alpha * j as f64 - (k - j) as f64);
        }
        f[k] = acc / (k as f64 * g[0]);
    }
    f
}

/// Compositional inverse of `x = Σ_{k≥1} a_k u^k`.
fn series_revert(a: &[Complex64], n: usize) -> Series {
    let mut u = vec![Complex64::zero(); n];
    if n > 1 {
        u[1] = a[1].inv();
    }
    for _ in 0..n {
        // u ← (x − Σ_{k≥2} a_k u^k) / a_1
        let mut acc = vec![Complex64::zero(); n];
        let mut power = u.clone();
        for ak in a.iter().take(n).skip(2) {
            power = series_mul(&power, &u, n);
            for (i, p) in power.iter().enumerate() {
                acc[i] += ak * p;
            }
        }
        let mut next = vec![Complex64::zero(); n];
        if n > 1 {
            next[1] = Complex64::new(1.0, 0.0);
        }
        for i in 0..n {
            next[i] = (next[i] - acc[i]) / a[1];
        }
        u = next;
    }
    u
}

/// Inverse series `w(ζ)` near `ζ = ∞` of a pole-type branch `ζ(w)`.
///
/// With `ζ = u^{−m} g(u)`, `u = w^{1/r}`, the inverse is expanded in `x = ζ^{−1/m}`
/// and has ramification `m`.
pub fn invert_branch(branch: &PuiseuxBranch, depth: usize) -> Result<PuiseuxBranch> {
    let r = branch.ramification as i64;
    let (e0, _) = branch
        .leading()
        .ok_or_else(|| Error::Inconsistent("empty branch".into()))?;
    if !e0.is_negative() {
        return Err(Error::Inconsistent(
            "inversion needs a pole-type branch".into(),
        ));
    }
    let k0 = (e0 * Q::from_integer(r.into()))
        .to_integer()
        .to_i64()
        .unwrap_or(0);
    let m = -k0;
    let n = depth + 2;
    let mut g = vec![Complex64::zero(); n];
    for (e, c) in &branch.terms {
        let k = (e * Q::from_integer(r.into()))
            .to_integer()
            .to_i64()
            .unwrap_or(0)
            + m;
        if (k as usize) < n {
            g[k as usize] += c.to_c64();
        }
    }
    if g[0].norm() == 0.0 {
        return Err(Error::Numeric("leading coefficient vanishes".into()));
    }
    let h = series_pow(&g, -1.0 / m as f64, n);
    // x(u) = u h(u)
    let mut x = vec![Complex64::zero(); n];
    x[1..n].copy_from_slice(&h[..n - 1]);
    let u = series_revert(&x, n);
    let mut z = vec![Complex64::zero(); n];
    z[0] = Complex64::new(1.0, 0.0);
    for _ in 0..r {
        z = series_mul(&z, &u, n);
    }
    let scale = z.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if !scale.is_finite() || scale == 0.0 {
        return Err(Error::Numeric("series inversion failed".into()));
    }
    let terms: Vec<(Q, ComplexScalar)> = z
        .iter()
        .enumerate()
        .skip(r as usize)
        .take(depth)
        .filter(|(_, c)| c.norm() > 1e-12 * scale)
        .map(|(k, c)| {
            (
                Q::new((k as i64).into(), m.into()),
                ComplexScalar::Float(*c),
            )
        })
        .collect();
    Ok(PuiseuxBranch {
        base: BasePoint::Infinity,
        ramification: m as u32,
        terms,
        class: 0,
    })
}

/// Largest relative defect of `ζ(w(ζ)) = ζ` over sample points `|x| = radius`.
pub fn inversion_defect(forward: &PuiseuxBranch, inverse: &PuiseuxBranch, radius: f64) -> f64 {
    let m = inverse.ramification;
    let r = forward.ramification;
    let mut worst = 0.0f64;
    for k in 0..8 {
        let x = Complex64::from_polar(radius, 2.0 * PI * (k as f64 + 0.3) / 8.0);
        let zeta = x.powi(-(m as i32));
        let w = inverse.eval_root(x);
        let s0 = w.powf(1.0 / r as f64);
        let best = (0..r)
            .map(|j| {
                let s = s0 * Complex64::from_polar(1.0, 2.0 * PI * j as f64 / r as f64);
                (forward.eval_root(s) - zeta).norm() / zeta.norm()
            })
            .fold(f64::INFINITY, f64::min);
        worst = worst.max(best);
    }
    worst
}

/// Inverts one representative per conjugacy class of pole-type branches.
/// The number of inverse branches is the sum of the returned ramifications.
pub fn inverse_branches(
    branches: &[PuiseuxBranch],
    depth: usize,
) -> Result<Vec<(PuiseuxBranch, PuiseuxBranch)>> {
    let mut seen = Vec::new();
    let mut out = Vec::new();
    for b in branches {
        let pole = b.leading().is_some_and(|(e, _)| e.is_negative());
        if !pole || seen.contains(&b.class) {
            continue;
        }
        seen.push(b.class);
        out.push((b.clone(), invert_branch(b, depth)?));
    }
    Ok(out)
}

/// Genericity entry used for local models in branch counting.
const GENERIC_ENTRY: Complex64 = Complex64::new(0.7, 0.3);

/// Number of `w` near the finite points with `ζ/2` an eigenvalue of the local
/// model `θ(w)`, summed over Jordan blocks of the Dolbeault residues.
pub fn branch_count_at(
    data: &ConnectionData,
    zeta_sample: &ComplexScalar,
    tol: f64,
) -> Result<usize> {
    ensure_valid(data, tol)?;
    let zeta = zeta_sample.to_c64();
    let half = zeta / 2.0;
    let min_sep = data
        .log_points
        .iter()
        .enumerate()
        .flat_map(|(i, a)| {
            data.log_points[i + 1..]
                .iter()
                .map(move |b| (&a.position - &b.position).to_c64().norm())
        })
        .fold(f64::INFINITY, f64::min);
    let radius = if min_sep.is_finite() {
        min_sep / 2.0
    } else {
        f64::INFINITY
    };
    let mut count = 0;
    for point in &data.log_points {
        for piece in &point.pieces {
            for block in &piece.blocks {
                let lambda = de_rham_to_dolbeault(&block.eigenvalue, &piece.weight)
                    .lambda
                    .to_c64();
                let s = block.size as u32;
                // det((λ − wζ/2)·Id + N + a·w·E_{s1}) = (λ − wζ/2)^s + (−1)^{s−1} a w
                let mut coeffs = vec![Complex64::zero(); s as usize + 1];
                for k in 0..=s {
                    coeffs[k as usize] = binomial(s, k) * lambda.powu(s - k) * (-half).powu(k);
                }
                let sign = if s % 2 == 1 { 1.0 } else { -1.0 };
                coeffs[1] += GENERIC_ENTRY * sign;
                let roots = polynomial_roots(&coeffs)?;
                let scale = lambda.norm().max(1.0) / half.norm().max(1e-300);
                let genuine: Vec<Complex64> = roots
                    .into_iter()
                    .filter(|w| w.norm() > 1e-9 * scale)
                    .collect();
                for (i, a) in genuine.iter().enumerate() {
                    if genuine[i + 1..]
                        .iter()
                        .any(|b| (a - b).norm() < 1e-7 * scale)
                    {
                        return Err(Error::Inconclusive(
                            "sample too close to the discriminant; resample ζ".into(),
                        ));
                    }
                    if a.norm() >= radius {
                        return Err(Error::Inconclusive(
                            "solutions leave the local neighbourhood; use a larger |ζ|".into(),
                        ));
                    }
                }
                count += genuine.len();
            }
        }
    }
    Ok(count)
}
