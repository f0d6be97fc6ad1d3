//! Rational Weyl algebra, the Fourier–Laplace automorphism, local exponents of
//! operators, and a bounded search for sub-D-modules inside a candidate lattice.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::lattice::ExtensionTag;
use crate::roots::polynomial_roots;
use crate::scalar::{parse_q, q_to_string, ComplexScalar, GaussQ, Q};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Variable {
    Z,
    Zeta,
}

impl Variable {
    pub fn name(self) -> &'static str {
        match self {
            Variable::Z => "z",
            Variable::Zeta => "zeta",
        }
    }

    pub fn derivation(self) -> &'static str {
        match self {
            Variable::Z => "Dz",
            Variable::Zeta => "Dzeta",
        }
    }

    pub fn dual(self) -> Variable {
        match self {
            Variable::Z => Variable::Zeta,
            Variable::Zeta => Variable::Z,
        }
    }
}

/// `Σ c_{ij} x^i ∂^j` in normal order, with exact Gaussian-rational coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeylOperator {
    pub var: Variable,
    terms: BTreeMap<(u32, u32), GaussQ>,
}

fn gq(n: i64) -> GaussQ {
    GaussQ::new(Q::from_integer(n.into()), Q::zero())
}

fn binomial(n: u32, k: u32) -> BigInt {
    (0..k).fold(BigInt::one(), |acc, t| {
        acc * BigInt::from(n - t) / BigInt::from(t + 1)
    })
}

fn falling(n: u32, k: u32) -> BigInt {
    (0..k).fold(BigInt::one(), |acc, t| acc * BigInt::from(n - t))
}

fn gq_big(n: BigInt) -> GaussQ {
    GaussQ::new(Q::from_integer(n), Q::zero())
}

impl WeylOperator {
    pub fn zero(var: Variable) -> Self {
        WeylOperator {
            var,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(var: Variable, c: GaussQ) -> Self {
        Self::monomial(var, c, 0, 0)
    }

    /// `c · x^i ∂^j`.
    pub fn monomial(var: Variable, c: GaussQ, i: u32, j: u32) -> Self {
        let mut op = Self::zero(var);
        op.add_term(i, j, c);
        op
    }

    pub fn x(var: Variable) -> Self {
        Self::monomial(var, gq(1), 1, 0)
    }

    pub fn d(var: Variable) -> Self {
        Self::monomial(var, gq(1), 0, 1)
    }

    fn add_term(&mut self, i: u32, j: u32, c: GaussQ) {
        if c.is_zero() {
            return;
        }
        let e = self.terms.entry((i, j)).or_insert_with(GaussQ::zero);
        *e = e.clone() + c;
        if e.is_zero() {
            self.terms.remove(&(i, j));
        }
    }

    /// Terms `((i, j), c)` for `c · x^i ∂^j`.
    pub fn terms(&self) -> impl Iterator<Item = (&(u32, u32), &GaussQ)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, i: u32, j: u32) -> GaussQ {
        self.terms
            .get(&(i, j))
            .cloned()
            .unwrap_or_else(GaussQ::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Order in `∂`; `None` for the zero operator.
    pub fn order(&self) -> Option<u32> {
        self.terms.keys().map(|&(_, j)| j).max()
    }

    pub fn add(&self, other: &WeylOperator) -> Result<WeylOperator> {
        self.same_var(other)?;
        let mut out = self.clone();
        for (&(i, j), c) in &other.terms {
            out.add_term(i, j, c.clone());
        }
        Ok(out)
    }

    pub fn neg(&self) -> WeylOperator {
        self.scale(&gq(-1))
    }

    pub fn sub(&self, other: &WeylOperator) -> Result<WeylOperator> {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &GaussQ) -> WeylOperator {
        let mut out = Self::zero(self.var);
        for (&(i, j), a) in &self.terms {
            out.add_term(i, j, a.clone() * c.clone());
        }
        out
    }

    fn same_var(&self, other: &WeylOperator) -> Result<()> {
        if self.var != other.var {
            return Err(Error::Inconsistent(format!(
                "operators in {} and {} cannot be combined",
                self.var.name(),
                other.var.name()
            )));
        }
        Ok(())
    }

    /// Product in the Weyl algebra, using `∂^j x^k = Σ_t C(j,t) k!/(k−t)! x^{k−t} ∂^{j−t}`.
    pub fn multiply(&self, other: &WeylOperator) -> Result<WeylOperator> {
        self.same_var(other)?;
        let mut out = Self::zero(self.var);
        for (&(i, j), a) in &self.terms {
            for (&(k, l), b) in &other.terms {
                let ab = a.clone() * b.clone();
                for t in 0..=j.min(k) {
                    let c = gq_big(binomial(j, t) * falling(k, t));
                    out.add_term(i + k - t, j - t + l, ab.clone() * c);
                }
            }
        }
        Ok(out)
    }

    pub fn commutator(&self, other: &WeylOperator) -> Result<WeylOperator> {
        self.multiply(other)?.sub(&other.multiply(self)?)
    }

    /// Fourier–Laplace automorphism `x ↦ −∂_y`, `∂_x ↦ y` into the dual variable.
    pub fn fourier_laplace(&self) -> WeylOperator {
        let var = self.var.dual();
        let mut out = Self::zero(var);
        for (&(i, j), c) in &self.terms {
            // (−∂)^i y^j, normal ordered
            let sign = if i % 2 == 0 { gq(1) } else { gq(-1) };
            for t in 0..=i.min(j) {
                let k = gq_big(binomial(i, t) * falling(j, t));
                out.add_term(j - t, i - t, c.clone() * sign.clone() * k);
            }
        }
        out
    }

    /// Pullback by `x ↦ −x`.
    pub fn sign_pullback(&self) -> WeylOperator {
        let mut out = Self::zero(self.var);
        for (&(i, j), c) in &self.terms {
            let c = if (i + j) % 2 == 0 {
                c.clone()
            } else {
                -c.clone()
            };
            out.add_term(i, j, c);
        }
        out
    }

    /// Coefficients of `∂^j` as polynomials in `x`, ascending.
    fn coefficient_polynomial(&self, j: u32) -> Vec<GaussQ> {
        let deg = self.terms.keys().filter(|k| k.1 == j).map(|k| k.0).max();
        let Some(deg) = deg else { return Vec::new() };
        (0..=deg).map(|i| self.coefficient(i, j)).collect()
    }
}

fn fmt_coeff(c: &GaussQ) -> String {
    if c.im.is_zero() {
        q_to_string(&c.re)
    } else if c.re.is_zero() {
        format!("{}*i", q_to_string(&c.im))
    } else {
        let sign = if c.im.is_negative() { "-" } else { "+" };
        format!(
            "({}{}{}*i)",
            q_to_string(&c.re),
            sign,
            q_to_string(&c.im.abs())
        )
    }
}

impl fmt::Display for WeylOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        // highest order in ∂ first, then highest power of x
        let mut terms: Vec<_> = self.terms.iter().collect();
        terms.sort_by_key(|t| std::cmp::Reverse((t.0 .1, t.0 .0)));
        for (&(i, j), c) in terms {
            let negative = c.im.is_zero() && c.re.is_negative();
            let mag = if negative { -c.clone() } else { c.clone() };
            if first {
                if negative {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if negative { "-" } else { "+" })?;
            }
            first = false;
            let mut factors = Vec::new();
            if !(mag.is_one() && (i > 0 || j > 0)) {
                factors.push(fmt_coeff(&mag));
            }
            if i > 0 {
                factors.push(if i == 1 {
                    self.var.name().to_string()
                } else {
                    format!("{}^{i}", self.var.name())
                });
            }
            if j > 0 {
                let d = self.var.derivation();
                factors.push(if j == 1 {
                    d.to_string()
                } else {
                    format!("{d}^{j}")
                });
            }
            write!(f, "{}", factors.join("*"))?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Token {
    Num(Q),
    Ident(String),
    Op(char),
}

fn tokenize(text: &str) -> Result<Vec<Token>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut k = 0;
    while k < chars.len() {
        let ch = chars[k];
        if ch.is_whitespace() {
            k += 1;
        } else if ch.is_ascii_digit() || ch == '.' {
            let start = k;
            while k < chars.len() && (chars[k].is_ascii_digit() || chars[k] == '.') {
                k += 1;
            }
            let s: String = chars[start..k].iter().collect();
            let v =
                parse_q(&s).ok_or_else(|| Error::parse("operator", format!("bad number '{s}'")))?;
            out.push(Token::Num(v));
        } else if ch.is_ascii_alphabetic() {
            let start = k;
            while k < chars.len() && chars[k].is_ascii_alphanumeric() {
                k += 1;
            }
            out.push(Token::Ident(chars[start..k].iter().collect()));
        } else if "+-*/^()".contains(ch) {
            out.push(Token::Op(ch));
            k += 1;
        } else {
            return Err(Error::parse(
                "operator",
                format!("unexpected character '{ch}'"),
            ));
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    var: Option<Variable>,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn eat(&mut self, op: char) -> bool {
        if self.peek() == Some(&Token::Op(op)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn var(&self) -> Variable {
        self.var.unwrap_or(Variable::Z)
    }

    fn set_var(&mut self, v: Variable) -> Result<()> {
        match self.var {
            Some(w) if w != v => Err(Error::parse("operator", "mixes z and zeta")),
            _ => {
                self.var = Some(v);
                Ok(())
            }
        }
    }

    fn expr(&mut self) -> Result<WeylOperator> {
        let mut acc = if self.eat('-') {
            self.term()?.neg()
        } else {
            self.term()?
        };
        loop {
            if self.eat('+') {
                let t = self.term()?;
                acc = self.combine(acc, t, |a, b| a.add(b))?;
            } else if self.eat('-') {
                let t = self.term()?;
                acc = self.combine(acc, t, |a, b| a.sub(b))?;
            } else {
                return Ok(acc);
            }
        }
    }

    /// Constants are parsed before the variable is known; rebase them on demand.
    fn combine(
        &self,
        a: WeylOperator,
        b: WeylOperator,
        f: impl Fn(&WeylOperator, &WeylOperator) -> Result<WeylOperator>,
    ) -> Result<WeylOperator> {
        let v = self.var();
        f(&rebase(a, v), &rebase(b, v))
    }

    fn term(&mut self) -> Result<WeylOperator> {
        let mut acc = self.unary()?;
        loop {
            if self.eat('*') {
                let u = self.unary()?;
                acc = self.combine(acc, u, |a, b| a.multiply(b))?;
            } else if self.eat('/') {
                let u = self.unary()?;
                if u.terms.keys().any(|&k| k != (0, 0)) || u.is_zero() {
                    return Err(Error::parse(
                        "operator",
                        "division only by non-zero constants",
                    ));
                }
                let c = u.coefficient(0, 0);
                acc = acc.scale(&(gq(1) / c));
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self) -> Result<WeylOperator> {
        if self.eat('-') {
            return Ok(self.unary()?.neg());
        }
        let base = self.atom()?;
        if self.eat('^') {
            let Some(Token::Num(n)) = self.peek().cloned() else {
                return Err(Error::parse(
                    "operator",
                    "exponent must be a non-negative integer",
                ));
            };
            self.pos += 1;
            if !n.is_integer() || n.is_negative() {
                return Err(Error::parse(
                    "operator",
                    "exponent must be a non-negative integer",
                ));
            }
            let n: u32 = n
                .to_integer()
                .try_into()
                .map_err(|_| Error::parse("operator", "exponent too large"))?;
            let v = self.var();
            let base = rebase(base, v);
            let mut out = WeylOperator::constant(v, gq(1));
            for _ in 0..n {
                out = out.multiply(&base)?;
            }
            return Ok(out);
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<WeylOperator> {
        let tok = self
            .peek()
            .cloned()
            .ok_or_else(|| Error::parse("operator", "unexpected end of input"))?;
        self.pos += 1;
        let v = self.var();
        match tok {
            Token::Num(n) => Ok(WeylOperator::constant(v, GaussQ::new(n, Q::zero()))),
            Token::Ident(name) => match name.as_str() {
                "i" => Ok(WeylOperator::constant(v, GaussQ::new(Q::zero(), Q::one()))),
                "z" | "x" => {
                    self.set_var(Variable::Z)?;
                    Ok(WeylOperator::x(Variable::Z))
                }
                "Dz" | "Dx" => {
                    self.set_var(Variable::Z)?;
                    Ok(WeylOperator::d(Variable::Z))
                }
                "zeta" => {
                    self.set_var(Variable::Zeta)?;
                    Ok(WeylOperator::x(Variable::Zeta))
                }
                "Dzeta" => {
                    self.set_var(Variable::Zeta)?;
                    Ok(WeylOperator::d(Variable::Zeta))
                }
                other => Err(Error::parse(
                    "operator",
                    format!("unknown symbol '{other}'"),
                )),
            },
            Token::Op('(') => {
                let e = self.expr()?;
                if !self.eat(')') {
                    return Err(Error::parse("operator", "missing ')'"));
                }
                Ok(e)
            }
            Token::Op(c) => Err(Error::parse("operator", format!("unexpected '{c}'"))),
        }
    }
}

fn rebase(op: WeylOperator, v: Variable) -> WeylOperator {
    if op.var == v || op.terms.keys().any(|&k| k != (0, 0)) {
        op
    } else {
        WeylOperator {
            var: v,
            terms: op.terms,
        }
    }
}

/// Parses text such as `(z-1)*Dz - 1/3 - 2*(z-1)` or `zeta^2*Dzeta + i`.
pub fn parse_operator(text: &str) -> Result<WeylOperator> {
    let tokens = tokenize(text)?;
    if tokens.is_empty() {
        return Err(Error::parse("operator", "empty input"));
    }
    let mut p = Parser {
        tokens,
        pos: 0,
        var: None,
    };
    let out = p.expr()?;
    if p.pos != p.tokens.len() {
        return Err(Error::parse(
            "operator",
            format!("trailing input at token {}", p.pos),
        ));
    }
    Ok(rebase(out, p.var()))
}

/// `[FL(∂), FL(x)]` against `FL([∂, x]) = 1`.
pub fn fourier_laplace_self_test() -> bool {
    let x = WeylOperator::x(Variable::Z);
    let d = WeylOperator::d(Variable::Z);
    let fx = x.fourier_laplace();
    let fd = d.fourier_laplace();
    let lhs = fx.commutator(&fd).ok();
    let rhs = x.commutator(&d).ok().map(|c| c.fourier_laplace());
    let one = WeylOperator::constant(Variable::Zeta, gq(-1));
    lhs.is_some() && lhs == rhs && lhs == Some(one)
}

/// `(x − x₁)∂ − μ − a(x − x₁)`: rank one, logarithmic at `x₁` with residue `μ`,
/// exponential factor `e^{a x}` at infinity.
pub fn rank_one_model(x1: &GaussQ, mu: &GaussQ, a: &GaussQ) -> WeylOperator {
    let v = Variable::Z;
    let mut op = WeylOperator::zero(v);
    op.add_term(1, 1, gq(1));
    op.add_term(0, 1, -x1.clone());
    op.add_term(0, 0, -mu.clone() + a.clone() * x1.clone());
    op.add_term(1, 0, -a.clone());
    op
}

#[derive(Clone, Debug, PartialEq)]
pub enum SingularPoint {
    Finite(ComplexScalar),
    Infinity,
}

fn to_c64(c: &GaussQ) -> Complex64 {
    ComplexScalar::Exact(c.clone()).to_c64()
}

fn dedupe(points: Vec<ComplexScalar>, tol: f64) -> Vec<ComplexScalar> {
    let mut out: Vec<ComplexScalar> = Vec::new();
    for p in points {
        if !out.iter().any(|q| q.approx_eq(&p, tol.max(1e-6))) {
            out.push(p);
        }
    }
    out
}

/// Roots of an exact polynomial (ascending coefficients): exact when linear after
/// removing powers of `x`, numerical otherwise.
fn exact_poly_roots(coeffs: &[GaussQ]) -> Result<Vec<ComplexScalar>> {
    let low = coeffs.iter().position(|c| !c.is_zero()).unwrap_or(0);
    let top = coeffs.iter().rposition(|c| !c.is_zero()).unwrap_or(0);
    let mut out = vec![ComplexScalar::zero(); low];
    let rest = &coeffs[low..=top];
    match rest.len() {
        0 | 1 => {}
        2 => out.push(ComplexScalar::Exact(-rest[0].clone() / rest[1].clone())),
        _ => {
            let f: Vec<Complex64> = rest.iter().map(to_c64).collect();
            out.extend(polynomial_roots(&f)?.into_iter().map(ComplexScalar::Float));
        }
    }
    Ok(out)
}

/// Zeros of the leading coefficient, followed by the point at infinity, which
/// is always listed.
pub fn singular_points(op: &WeylOperator, tol: f64) -> Result<Vec<SingularPoint>> {
    let m = op
        .order()
        .ok_or_else(|| Error::Inconsistent("zero operator".into()))?;
    let lead = op.coefficient_polynomial(m);
    let roots = dedupe(exact_poly_roots(&lead)?, tol);
    let mut out: Vec<SingularPoint> = roots.into_iter().map(SingularPoint::Finite).collect();
    out.push(SingularPoint::Infinity);
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct IndicialData {
    /// Coefficients of the indicial polynomial in `ρ`, ascending.
    pub polynomial: Vec<ComplexScalar>,
    /// Local exponents: `w^ρ` with `w = x − x₀`, or `w = 1/x` at infinity.
    pub exponents: Vec<ComplexScalar>,
    /// Fuchs condition at the point.
    pub regular: bool,
}

fn falling_poly(j: u32) -> Vec<ComplexScalar> {
    // ρ(ρ−1)…(ρ−j+1), ascending coefficients
    let mut p = vec![ComplexScalar::one()];
    for t in 0..j {
        let mut next = vec![ComplexScalar::zero(); p.len() + 1];
        for (k, c) in p.iter().enumerate() {
            next[k + 1] = &next[k + 1] + c;
            next[k] = &next[k] - &(c * &ComplexScalar::int(t as i64));
        }
        p = next;
    }
    p
}

fn scalar_roots(coeffs: &[ComplexScalar], tol: f64) -> Result<Vec<ComplexScalar>> {
    let top = coeffs.iter().rposition(|c| !c.is_zero_tol(tol));
    let Some(top) = top else {
        return Err(Error::Inconclusive("indicial polynomial vanishes".into()));
    };
    let coeffs = &coeffs[..=top];
    if coeffs.len() == 1 {
        return Ok(Vec::new());
    }
    if let (2, Some(a), Some(b)) = (coeffs.len(), coeffs[0].as_exact(), coeffs[1].as_exact()) {
        return Ok(vec![ComplexScalar::Exact(-a.clone() / b.clone())]);
    }
    let f: Vec<Complex64> = coeffs.iter().map(|c| c.to_c64()).collect();
    Ok(polynomial_roots(&f)?
        .into_iter()
        .map(ComplexScalar::Float)
        .collect())
}

fn indicial_from_terms(
    terms: &[(i64, u32, ComplexScalar)],
    m: u32,
    extreme: i64,
    tol: f64,
) -> Result<(Vec<ComplexScalar>, bool)> {
    let mut poly = vec![ComplexScalar::zero(); m as usize + 1];
    let mut regular = false;
    for (shift, j, c) in terms {
        if *shift != extreme || c.is_zero_tol(tol) {
            continue;
        }
        if *j == m {
            regular = true;
        }
        for (k, f) in falling_poly(*j).iter().enumerate() {
            poly[k] = &poly[k] + &(c * f);
        }
    }
    Ok((poly, regular))
}

/// Indicial polynomial and local exponents at a finite point or at infinity.
pub fn indicial_data(op: &WeylOperator, point: &SingularPoint, tol: f64) -> Result<IndicialData> {
    let m = op
        .order()
        .ok_or_else(|| Error::Inconsistent("zero operator".into()))?;
    match point {
        SingularPoint::Finite(x0) => {
            // expand coefficients in w = x − x₀: c x^i = c Σ_t C(i,t) x₀^{i−t} w^t
            let mut shifted: BTreeMap<(u32, u32), ComplexScalar> = BTreeMap::new();
            for (&(i, j), c) in op.terms() {
                let c = ComplexScalar::Exact(c.clone());
                let mut pow = ComplexScalar::one();
                let mut powers = vec![pow.clone()];
                for _ in 0..i {
                    pow = &pow * x0;
                    powers.push(pow.clone());
                }
                for t in 0..=i {
                    let k = ComplexScalar::Exact(gq_big(binomial(i, t)));
                    let e = shifted.entry((t, j)).or_insert_with(ComplexScalar::zero);
                    *e = &*e + &(&(&c * &k) * &powers[(i - t) as usize]);
                }
            }
            let terms: Vec<(i64, u32, ComplexScalar)> = shifted
                .into_iter()
                .filter(|(_, c)| !c.is_zero_tol(tol))
                .map(|((t, j), c)| (t as i64 - j as i64, j, c))
                .collect();
            let extreme = terms.iter().map(|t| t.0).min().unwrap_or(0);
            let (polynomial, regular) = indicial_from_terms(&terms, m, extreme, tol)?;
            let exponents = scalar_roots(&polynomial, tol)?;
            Ok(IndicialData {
                polynomial,
                exponents,
                regular,
            })
        }
        SingularPoint::Infinity => {
            let terms: Vec<(i64, u32, ComplexScalar)> = op
                .terms()
                .map(|(&(i, j), c)| (i as i64 - j as i64, j, ComplexScalar::Exact(c.clone())))
                .collect();
            let extreme = terms.iter().map(|t| t.0).max().unwrap_or(0);
            let (polynomial, regular) = indicial_from_terms(&terms, m, extreme, tol)?;
            let exponents = scalar_roots(&polynomial, tol)?
                .into_iter()
                .map(|r| -r)
                .collect();
            Ok(IndicialData {
                polynomial,
                exponents,
                regular,
            })
        }
    }
}

/// Laurent polynomial `Σ c_k z^k`.
pub type Laurent = BTreeMap<i64, GaussQ>;

/// Local connection `∂ e^j = Σ_i A_{ij}(z) e^i` near `z = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConnectionMatrix {
    pub entries: Vec<Vec<Laurent>>,
}

impl ConnectionMatrix {
    pub fn rank(&self) -> usize {
        self.entries.len()
    }

    fn entry(&self, i: usize, j: usize) -> &Laurent {
        &self.entries[i][j]
    }

    /// Order of the pole of the block indexed by `idx`, at least 0.
    fn pole_order(&self, idx: &[usize]) -> i64 {
        let mut d = 0;
        for &i in idx {
            for &j in idx {
                if let Some((&k, _)) = self.entry(i, j).iter().find(|(_, c)| !c.is_zero()) {
                    d = d.max(-k);
                }
            }
        }
        d
    }
}

/// A sub-D-module `O(*)·e_T ⊕ O·s_1 ⊕ … ⊕ O·s_k` of the candidate lattice.
#[derive(Clone, Debug, PartialEq)]
pub struct SubmoduleWitness {
    /// Basis directions that stay fully localized.
    pub localized: Vec<usize>,
    /// Horizontal sections of the quotient, one Laurent polynomial per remaining direction.
    pub sections: Vec<Vec<Laurent>>,
    /// Valuation of the determinant of the sections.
    pub det_valuation: i64,
}

/// Reduced row echelon form in place; returns pivot columns.
fn rref(rows: &mut [Vec<GaussQ>], ncols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        let Some(p) = (r..rows.len()).find(|&k| !rows[k][c].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let inv = GaussQ::one() / rows[r][c].clone();
        for x in rows[r].iter_mut() {
            *x = x.clone() * inv.clone();
        }
        for k in 0..rows.len() {
            if k != r && !rows[k][c].is_zero() {
                let f = rows[k][c].clone();
                let pivot = rows[r].clone();
                for (x, v) in rows[k].iter_mut().zip(&pivot).take(ncols) {
                    *x = x.clone() - v.clone() * f.clone();
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    pivots
}

/// Basis of `{x : M x = 0}` over the Gaussian rationals.
pub fn nullspace(matrix: &[Vec<GaussQ>], ncols: usize) -> Vec<Vec<GaussQ>> {
    let mut rows: Vec<Vec<GaussQ>> = matrix.to_vec();
    let pivots = rref(&mut rows, ncols);
    let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![GaussQ::zero(); ncols];
            v[f] = GaussQ::one();
            for (r, &p) in pivots.iter().enumerate() {
                v[p] = -rows[r][f].clone();
            }
            v
        })
        .collect()
}

fn rank_of(vectors: &[Vec<GaussQ>]) -> usize {
    if vectors.is_empty() {
        return 0;
    }
    let n = vectors[0].len();
    let mut rows = vectors.to_vec();
    rref(&mut rows, n).len()
}

fn laurent_mul(a: &Laurent, b: &Laurent) -> Laurent {
    let mut out = Laurent::new();
    for (i, x) in a {
        for (j, y) in b {
            let e = out.entry(i + j).or_insert_with(GaussQ::zero);
            *e = e.clone() + x.clone() * y.clone();
        }
    }
    out.retain(|_, c| !c.is_zero());
    out
}

fn laurent_det(m: &[Vec<Laurent>]) -> Laurent {
    let k = m.len();
    if k == 0 {
        return Laurent::from([(0, GaussQ::one())]);
    }
    let mut out = Laurent::new();
    for col in 0..k {
        let minor: Vec<Vec<Laurent>> = m[1..]
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|(c, _)| *c != col)
                    .map(|(_, x)| x.clone())
                    .collect()
            })
            .collect();
        let term = laurent_mul(&m[0][col], &laurent_det(&minor));
        let sign = if col % 2 == 0 { gq(1) } else { gq(-1) };
        for (e, c) in term {
            let v = out.entry(e).or_insert_with(GaussQ::zero);
            *v = v.clone() + c * sign.clone();
        }
    }
    out.retain(|_, c| !c.is_zero());
    out
}

fn subsets(items: &[usize]) -> Vec<Vec<usize>> {
    (0..1u32 << items.len())
        .map(|mask| {
            items
                .iter()
                .enumerate()
                .filter(|(k, _)| mask >> k & 1 == 1)
                .map(|(_, &x)| x)
                .collect()
        })
        .collect()
}

/// Searches for proper sub-D-modules of the candidate lattice with the same
/// localization. Coefficients of meromorphic directions range over `z^{−N} … z^N`.
///
/// Only submodules whose localized part is spanned by basis directions are
/// considered. `subranks` restricts the number of lattice generators `k`; empty
/// means all. An empty result certifies minimality within that range.
pub fn invariant_lattice_search(
    conn: &ConnectionMatrix,
    candidate: &[ExtensionTag],
    subranks: &[usize],
    bound: i64,
) -> Result<Vec<SubmoduleWitness>> {
    let m = conn.rank();
    if candidate.len() != m || conn.entries.iter().any(|row| row.len() != m) {
        return Err(Error::Inconsistent(
            "candidate and connection ranks differ".into(),
        ));
    }
    let all: Vec<usize> = (0..m).collect();
    let d_all = conn.pole_order(&all);
    if bound < 2 || 2 * d_all > bound {
        return Err(Error::Inconclusive(format!(
            "search bound {bound} too small for pole order {d_all}"
        )));
    }
    let mer: Vec<usize> = (0..m)
        .filter(|&j| candidate[j] == ExtensionTag::Meromorphic)
        .collect();
    let mut found = Vec::new();
    for t in subsets(&mer) {
        let k = m - t.len();
        if k == 0 || (!subranks.is_empty() && !subranks.contains(&k)) {
            continue;
        }
        let rest: Vec<usize> = (0..m).filter(|j| !t.contains(j)).collect();
        let stable = rest.iter().all(|&i| {
            t.iter()
                .all(|&j| conn.entry(i, j).values().all(|c| c.is_zero()))
        });
        if !stable {
            continue;
        }
        if let Some(w) = quotient_sections(conn, candidate, &t, &rest, bound)? {
            found.push(w);
        }
    }
    Ok(found)
}

fn quotient_sections(
    conn: &ConnectionMatrix,
    candidate: &[ExtensionTag],
    t: &[usize],
    rest: &[usize],
    bound: i64,
) -> Result<Option<SubmoduleWitness>> {
    let d = conn.pole_order(rest).max(1);
    let lo: Vec<i64> = rest
        .iter()
        .map(|&j| match candidate[j] {
            ExtensionTag::Meromorphic => -bound,
            ExtensionTag::Lattice(n) => -n,
        })
        .collect();
    // unknown index of coefficient z^o in direction rest[a]
    let mut index = BTreeMap::new();
    for (a, &l) in lo.iter().enumerate() {
        for o in l..=bound {
            let next = index.len();
            index.insert((a, o), next);
        }
    }
    let n_unknowns = index.len();
    let qlo = lo.iter().min().copied().unwrap_or(0) - d;
    let qhi = bound - d;
    let mut rows = Vec::new();
    for (a, &i) in rest.iter().enumerate() {
        for q in qlo..=qhi {
            let mut row = vec![GaussQ::zero(); n_unknowns];
            if let Some(&u) = index.get(&(a, q + 1)) {
                row[u] = row[u].clone() + gq(q + 1);
            }
            for (b, &j) in rest.iter().enumerate() {
                for (&p, c) in conn.entry(i, j) {
                    if let Some(&u) = index.get(&(b, q - p)) {
                        row[u] = row[u].clone() + c.clone();
                    }
                }
            }
            if row.iter().any(|c| !c.is_zero()) {
                rows.push(row);
            }
        }
    }
    let basis = nullspace(&rows, n_unknowns);
    let trusted: Vec<usize> = index
        .iter()
        .filter(|((_, o), _)| *o <= qhi)
        .map(|(_, &u)| u)
        .collect();
    let project = |v: &Vec<GaussQ>| trusted.iter().map(|&u| v[u].clone()).collect::<Vec<_>>();
    let k = rest.len();
    let mut chosen: Vec<Vec<GaussQ>> = Vec::new();
    let mut chosen_proj: Vec<Vec<GaussQ>> = Vec::new();
    for v in &basis {
        let mut trial = chosen_proj.clone();
        trial.push(project(v));
        if rank_of(&trial) > chosen_proj.len() {
            chosen_proj = trial;
            chosen.push(v.clone());
        }
        if chosen.len() == k {
            break;
        }
    }
    if chosen.len() < k {
        return Ok(None);
    }
    let sections: Vec<Vec<Laurent>> = chosen
        .iter()
        .map(|v| {
            (0..k)
                .map(|a| {
                    index
                        .iter()
                        .filter(|((b, _), _)| *b == a)
                        .filter(|(_, &u)| !v[u].is_zero())
                        .map(|(&(_, o), &u)| (o, v[u].clone()))
                        .collect()
                })
                .collect()
        })
        .collect();
    let det = laurent_det(&sections);
    let det_valuation = match det.keys().next() {
        Some(&v) => v,
        None => return Ok(None),
    };
    let has_mer = rest
        .iter()
        .any(|&j| candidate[j] == ExtensionTag::Meromorphic);
    let lattice_sum: i64 = rest
        .iter()
        .map(|&j| match candidate[j] {
            ExtensionTag::Lattice(n) => n,
            ExtensionTag::Meromorphic => 0,
        })
        .sum();
    if has_mer || det_valuation > -lattice_sum {
        Ok(Some(SubmoduleWitness {
            localized: t.to_vec(),
            sections,
            det_valuation,
        }))
    } else {
        Ok(None)
    }
}
