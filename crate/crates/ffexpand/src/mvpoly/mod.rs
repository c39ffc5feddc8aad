//! Sparse multivariate polynomials over a [`FieldCtx`].
//!
//! A polynomial in n variables is a map from exponent vectors (length n,
//! one entry per variable) to nonzero coefficients, kept in a `BTreeMap` so
//! every traversal, printout and serialization is deterministic.  The zero
//! polynomial is the empty map and has no degree ([`MvPoly::total_degree`]
//! returns `None`, which orders below every `Some(d)`).
//!
//! Variables are indexed 0..n-1 internally and named x1..xN in text, with
//! x, y, z accepted as aliases for n <= 3 (see [`MvPoly::parse`]).
//!
//! Binary operators panic on mismatched contexts or variable counts, like
//! the element operators in [`crate::gf`]; the fallible boundaries (parsing,
//! evaluation, substitution, decomposition) return errors instead.

mod parse;

use std::collections::BTreeMap;
use std::fmt;

use serde::ser::{SerializeMap, SerializeSeq};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::gf::{element_from_json, FieldCtx, FieldElement};

/// Exponent vectors; entries are per-variable exponents.
pub type Exp = Vec<u32>;

/// Parsed exponents are capped here so degree arithmetic stays in range.
pub const MAX_EXPONENT: u32 = 1 << 20;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MvPoly {
    ctx: FieldCtx,
    nvars: usize,
    /// Exponent vector -> nonzero packed coefficient.
    terms: BTreeMap<Exp, u64>,
}

/// P written as a polynomial in one distinguished variable:
/// P = a x^d + sum_k parts[k-1] x^{d-k}, with d the *total* degree of P.
#[derive(Clone, Debug)]
pub struct Decomposition {
    /// Constant leading coefficient a (possibly zero).
    pub leading: FieldElement,
    /// P_1..P_d over the remaining variables (nvars one less than the input).
    pub parts: Vec<MvPoly>,
    /// Index of the distinguished variable in the original polynomial.
    pub distinguished: usize,
    /// d, the total degree of the input.
    pub degree: usize,
    nvars_original: usize,
}

impl MvPoly {
    // ---- Constructors ----

    pub fn zero(ctx: &FieldCtx, nvars: usize) -> MvPoly {
        MvPoly { ctx: ctx.clone(), nvars, terms: BTreeMap::new() }
    }

    pub fn constant(c: &FieldElement, nvars: usize) -> MvPoly {
        let mut poly = MvPoly::zero(c.ctx(), nvars);
        poly.add_term(vec![0; nvars], c.packed());
        poly
    }

    /// The variable x_{i} (0-based).
    pub fn variable(ctx: &FieldCtx, nvars: usize, i: usize) -> Result<MvPoly> {
        if i >= nvars {
            return Err(Error::domain(format!("variable index {i} out of range for {nvars} variables")));
        }
        let mut exp = vec![0u32; nvars];
        exp[i] = 1;
        let mut poly = MvPoly::zero(ctx, nvars);
        poly.add_term(exp, 1);
        Ok(poly)
    }

    /// A single term c * x^exp.
    pub fn monomial(c: &FieldElement, exp: Exp) -> MvPoly {
        let mut poly = MvPoly::zero(c.ctx(), exp.len());
        poly.add_term(exp, c.packed());
        poly
    }

    /// Parses the text grammar: integer coefficients of any size (reduced
    /// mod p, negatives allowed), variables x1..xN with x, y, z accepted for
    /// nvars <= 3, operators `+ - *`, `^` with non-negative integer literal
    /// exponents, and parentheses.  Errors carry the byte position.
    pub fn parse(ctx: &FieldCtx, nvars: usize, text: &str) -> Result<MvPoly> {
        parse::parse(ctx, nvars, text)
    }

    /// A polynomial with up to `terms` random monomials of total degree
    /// <= `degree`.  Coincident monomials merge, so the result can have
    /// fewer terms (and can be zero).
    pub fn random_sparse(
        ctx: &FieldCtx,
        nvars: usize,
        degree: u32,
        terms: usize,
        rng: &mut impl rand::RngExt,
    ) -> MvPoly {
        let mut poly = MvPoly::zero(ctx, nvars);
        for _ in 0..terms {
            let mut exp = vec![0u32; nvars];
            let mut left = degree;
            for slot in exp.iter_mut() {
                let e = rng.random_range(0..=left);
                *slot = e;
                left -= e;
            }
            let coeff = rng.random_range(1..ctx.q());
            let cur = poly.terms.get(&exp).copied().unwrap_or(0);
            let merged = ctx.add_raw(cur, coeff);
            if merged == 0 {
                poly.terms.remove(&exp);
            } else {
                poly.terms.insert(exp, merged);
            }
        }
        poly
    }

    // ---- Accessors ----

    pub fn ctx(&self) -> &FieldCtx {
        &self.ctx
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Total degree, or `None` for the zero polynomial (ordered below every
    /// constant's `Some(0)`).
    pub fn total_degree(&self) -> Option<usize> {
        self.terms.keys().map(|e| e.iter().map(|&x| x as usize).sum()).max()
    }

    /// Degree in variable i alone.
    pub fn degree_in(&self, i: usize) -> Option<usize> {
        if self.is_zero() {
            return None;
        }
        Some(self.terms.keys().map(|e| e[i] as usize).max().unwrap_or(0))
    }

    pub fn coefficient(&self, exp: &[u32]) -> FieldElement {
        let val = self.terms.get(exp).copied().unwrap_or(0);
        self.ctx.from_packed(val).expect("stored coefficients are canonical")
    }

    /// True if variable i occurs in some term with positive exponent.
    pub fn occurs(&self, i: usize) -> bool {
        self.terms.keys().any(|e| e[i] > 0)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exp, FieldElement)> + '_ {
        self.terms
            .iter()
            .map(|(e, &c)| (e, self.ctx.from_packed(c).expect("stored coefficients are canonical")))
    }

    pub fn is_constant(&self) -> bool {
        self.total_degree().is_none_or(|d| d == 0)
    }

    fn add_term(&mut self, exp: Exp, coeff: u64) {
        debug_assert_eq!(exp.len(), self.nvars);
        if coeff == 0 {
            return;
        }
        let merged = self.ctx.add_raw(self.terms.get(&exp).copied().unwrap_or(0), coeff);
        if merged == 0 {
            self.terms.remove(&exp);
        } else {
            self.terms.insert(exp, merged);
        }
    }

    fn assert_compatible(&self, other: &MvPoly) {
        assert!(self.ctx == other.ctx, "polynomial contexts differ");
        assert_eq!(self.nvars, other.nvars, "polynomial variable counts differ");
    }

    // ---- Arithmetic ----

    pub fn scale(&self, c: &FieldElement) -> MvPoly {
        assert!(self.ctx == *c.ctx(), "polynomial contexts differ");
        let mut out = MvPoly::zero(&self.ctx, self.nvars);
        if c.is_zero() {
            return out;
        }
        for (e, &v) in &self.terms {
            out.terms.insert(e.clone(), self.ctx.mul_raw(v, c.packed()));
        }
        out
    }

    pub fn pow(&self, e: u32) -> MvPoly {
        let one = self.ctx.one();
        let mut acc = MvPoly::constant(&one, self.nvars);
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        acc
    }

    /// g(P) for univariate g, via Horner's rule.
    pub fn compose_univariate(g: &MvPoly, p: &MvPoly) -> Result<MvPoly> {
        if g.nvars != 1 {
            return Err(Error::domain(format!("outer polynomial has {} variables, expected 1", g.nvars)));
        }
        g.ctx.check_same(&p.ctx, "composition operands")?;
        let deg = match g.total_degree() {
            None => return Ok(MvPoly::zero(&p.ctx, p.nvars)),
            Some(d) => d,
        };
        let mut acc = MvPoly::zero(&p.ctx, p.nvars);
        for j in (0..=deg).rev() {
            acc = &acc * p;
            let c = g.coefficient(&[j as u32]);
            if !c.is_zero() {
                acc = &acc + &MvPoly::constant(&c, p.nvars);
            }
        }
        Ok(acc)
    }

    /// Substitutes subs[i] for variable i; all subs must share a context and
    /// a variable count, which becomes the result's.
    pub fn substitute(&self, subs: &[MvPoly]) -> Result<MvPoly> {
        if subs.len() != self.nvars {
            return Err(Error::domain(format!(
                "{} substitutions given for {} variables",
                subs.len(),
                self.nvars
            )));
        }
        if self.nvars == 0 {
            return Err(Error::domain("substitution needs at least one variable"));
        }
        let m = subs[0].nvars;
        for s in subs {
            self.ctx.check_same(&s.ctx, "substitution operands")?;
            if s.nvars != m {
                return Err(Error::domain("substituted polynomials have differing variable counts"));
            }
        }
        // Cache powers of each substituted polynomial up to its largest use.
        let mut powers: Vec<Vec<MvPoly>> = Vec::with_capacity(self.nvars);
        for (i, s) in subs.iter().enumerate() {
            let max_e = self.terms.keys().map(|e| e[i]).max().unwrap_or(0) as usize;
            let mut row = Vec::with_capacity(max_e + 1);
            row.push(MvPoly::constant(&self.ctx.one(), m));
            for _ in 0..max_e {
                let next = &row[row.len() - 1] * s;
                row.push(next);
            }
            powers.push(row);
        }
        let mut out = MvPoly::zero(&self.ctx, m);
        for (e, &c) in &self.terms {
            let celem = self.ctx.from_packed(c).expect("canonical");
            let mut term = MvPoly::constant(&celem, m);
            for (i, &ei) in e.iter().enumerate() {
                if ei > 0 {
                    term = &term * &powers[i][ei as usize];
                }
            }
            out = &out + &term;
        }
        Ok(out)
    }

    /// Renames variables: old variable i becomes `map[i]` in a polynomial
    /// with `new_nvars` variables.  The map must be injective.
    pub fn embed(&self, new_nvars: usize, map: &[usize]) -> Result<MvPoly> {
        if map.len() != self.nvars {
            return Err(Error::domain("embedding map length must equal the variable count"));
        }
        let mut seen = vec![false; new_nvars];
        for &t in map {
            if t >= new_nvars {
                return Err(Error::domain(format!("embedding target {t} out of range")));
            }
            if seen[t] {
                return Err(Error::domain("embedding map must be injective"));
            }
            seen[t] = true;
        }
        let mut out = MvPoly::zero(&self.ctx, new_nvars);
        for (e, &c) in &self.terms {
            let mut exp = vec![0u32; new_nvars];
            for (i, &ei) in e.iter().enumerate() {
                exp[map[i]] = ei;
            }
            out.terms.insert(exp, c);
        }
        Ok(out)
    }

    // ---- Evaluation ----

    pub fn eval(&self, point: &[FieldElement]) -> Result<FieldElement> {
        if point.len() != self.nvars {
            return Err(Error::domain(format!(
                "point has {} coordinates but the polynomial has {} variables",
                point.len(),
                self.nvars
            )));
        }
        for x in point {
            self.ctx.check_same(x.ctx(), "evaluation point")?;
        }
        let raw: Vec<u64> = point.iter().map(FieldElement::packed).collect();
        Ok(self.ctx.from_packed(self.eval_raw(&raw)).expect("canonical"))
    }

    /// Evaluation on packed values (all < q, length checked by callers).
    pub(crate) fn eval_raw(&self, point: &[u64]) -> u64 {
        debug_assert_eq!(point.len(), self.nvars);
        let mut acc = 0u64;
        for (e, &c) in &self.terms {
            let mut term = c;
            for (i, &ei) in e.iter().enumerate() {
                if ei > 0 {
                    term = self.ctx.mul_raw(term, self.ctx.pow_raw(point[i], ei as u64));
                }
            }
            acc = self.ctx.add_raw(acc, term);
        }
        acc
    }

    // ---- Calculus and decomposition ----

    /// Formal partial derivative with respect to variable i.  Exponents are
    /// reduced mod p, so terms whose exponent is divisible by p vanish.
    pub fn partial(&self, i: usize) -> Result<MvPoly> {
        if i >= self.nvars {
            return Err(Error::domain(format!("variable index {i} out of range for {} variables", self.nvars)));
        }
        let mut out = MvPoly::zero(&self.ctx, self.nvars);
        for (e, &c) in &self.terms {
            if e[i] == 0 {
                continue;
            }
            let factor = e[i] as u64 % self.ctx.p();
            if factor == 0 {
                continue;
            }
            let mut exp = e.clone();
            exp[i] -= 1;
            out.add_term(exp, self.ctx.mul_raw(c, factor));
        }
        Ok(out)
    }

    /// Writes P = a x_i^d + sum_k P_k x_i^{d-k} with d the total degree of P;
    /// the parts live over the remaining variables in their original order.
    pub fn decompose(&self, i: usize) -> Result<Decomposition> {
        if self.nvars < 2 {
            return Err(Error::domain("decomposition needs at least two variables"));
        }
        if i >= self.nvars {
            return Err(Error::domain(format!("variable index {i} out of range for {} variables", self.nvars)));
        }
        let degree = match self.total_degree() {
            None | Some(0) => {
                return Err(Error::domain("decomposition needs a nonconstant polynomial"))
            }
            Some(d) => d,
        };
        let mut leading = 0u64;
        let mut parts: Vec<MvPoly> = (0..degree).map(|_| MvPoly::zero(&self.ctx, self.nvars - 1)).collect();
        for (e, &c) in &self.terms {
            let ei = e[i] as usize;
            let mut rest: Exp = Vec::with_capacity(self.nvars - 1);
            rest.extend(e.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &x)| x));
            if ei == degree {
                debug_assert!(rest.iter().all(|&x| x == 0), "total degree bounds the leading exponent");
                leading = c;
            } else {
                // Contribution to P_k with k = d - ei.
                parts[degree - ei - 1].terms.insert(rest, c);
            }
        }
        for (idx, part) in parts.iter().enumerate() {
            let k = idx + 1;
            assert!(
                part.total_degree().is_none_or(|d| d <= k),
                "part P_{k} must have degree <= {k}"
            );
        }
        Ok(Decomposition {
            leading: self.ctx.from_packed(leading).expect("canonical"),
            parts,
            distinguished: i,
            degree,
            nvars_original: self.nvars,
        })
    }
}

impl Decomposition {
    /// Rebuilds the original polynomial: a x_i^d + sum_k P_k x_i^{d-k}.
    pub fn reassemble(&self) -> MvPoly {
        let ctx = self.leading.ctx().clone();
        let n = self.nvars_original;
        let i = self.distinguished;
        let map: Vec<usize> = (0..n).filter(|&j| j != i).collect();
        let xi = MvPoly::variable(&ctx, n, i).expect("distinguished index is in range");
        let mut out = &MvPoly::constant(&self.leading, n) * &xi.pow(self.degree as u32);
        for (idx, part) in self.parts.iter().enumerate() {
            let k = idx + 1;
            let lifted = part.embed(n, &map).expect("reindexing the remaining variables");
            out = &out + &(&lifted * &xi.pow((self.degree - k) as u32));
        }
        out
    }
}

impl std::ops::Add for &MvPoly {
    type Output = MvPoly;

    fn add(self, rhs: &MvPoly) -> MvPoly {
        self.assert_compatible(rhs);
        let mut out = self.clone();
        for (e, &c) in &rhs.terms {
            out.add_term(e.clone(), c);
        }
        out
    }
}

impl std::ops::Sub for &MvPoly {
    type Output = MvPoly;

    fn sub(self, rhs: &MvPoly) -> MvPoly {
        self.assert_compatible(rhs);
        self + &(-rhs)
    }
}

impl std::ops::Neg for &MvPoly {
    type Output = MvPoly;

    fn neg(self) -> MvPoly {
        let mut out = MvPoly::zero(&self.ctx, self.nvars);
        for (e, &c) in &self.terms {
            out.terms.insert(e.clone(), self.ctx.neg_raw(c));
        }
        out
    }
}

impl std::ops::Mul for &MvPoly {
    type Output = MvPoly;

    fn mul(self, rhs: &MvPoly) -> MvPoly {
        self.assert_compatible(rhs);
        let mut out = MvPoly::zero(&self.ctx, self.nvars);
        for (ea, &ca) in &self.terms {
            for (eb, &cb) in &rhs.terms {
                let exp: Exp = ea
                    .iter()
                    .zip(eb)
                    .map(|(&a, &b)| a.checked_add(b).expect("exponent overflow in multiplication"))
                    .collect();
                out.add_term(exp, self.ctx.mul_raw(ca, cb));
            }
        }
        out
    }
}

impl fmt::Display for MvPoly {
    /// Prints a form that [`MvPoly::parse`] accepts whenever every
    /// coefficient lies in the prime subfield; proper extension-field
    /// coefficients render as digit lists for display only.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let name = |i: usize| -> String {
            if self.nvars <= 3 {
                ["x", "y", "z"][i].to_string()
            } else {
                format!("x{}", i + 1)
            }
        };
        let mut first = true;
        for (e, &c) in self.terms.iter().rev() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let celem = self.ctx.from_packed(c).expect("canonical");
            let is_const_term = e.iter().all(|&x| x == 0);
            let mut factors: Vec<String> = Vec::new();
            if c != 1 || is_const_term {
                factors.push(celem.to_string());
            }
            for (i, &ei) in e.iter().enumerate() {
                match ei {
                    0 => {}
                    1 => factors.push(name(i)),
                    _ => factors.push(format!("{}^{}", name(i), ei)),
                }
            }
            write!(f, "{}", factors.join("*"))?;
        }
        Ok(())
    }
}

impl Serialize for MvPoly {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Term<'a> {
            e: &'a [u32],
            c: &'a FieldElement,
        }
        struct Terms<'a>(&'a MvPoly);
        impl Serialize for Terms<'_> {
            fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
                let mut seq = serializer.serialize_seq(Some(self.0.terms.len()))?;
                for (e, c) in self.0.terms() {
                    seq.serialize_element(&Term { e, c: &c })?;
                }
                seq.end()
            }
        }
        let mut map = serializer.serialize_map(Some(2))?;
        map.serialize_entry("nvars", &self.nvars)?;
        map.serialize_entry("terms", &Terms(self))?;
        map.end()
    }
}

/// Reads the JSON form produced by the `Serialize` impl.
pub fn poly_from_json(ctx: &FieldCtx, value: &serde_json::Value) -> Result<MvPoly> {
    let obj = value.as_object().ok_or_else(|| Error::domain("polynomial JSON must be an object"))?;
    let nvars = obj
        .get("nvars")
        .and_then(serde_json::Value::as_u64)
        .ok_or_else(|| Error::domain("polynomial JSON needs an integer `nvars`"))? as usize;
    let terms = obj
        .get("terms")
        .and_then(serde_json::Value::as_array)
        .ok_or_else(|| Error::domain("polynomial JSON needs a `terms` array"))?;
    let mut poly = MvPoly::zero(ctx, nvars);
    for t in terms {
        let e = t
            .get("e")
            .and_then(serde_json::Value::as_array)
            .ok_or_else(|| Error::domain("term needs an exponent array `e`"))?;
        if e.len() != nvars {
            return Err(Error::domain("term exponent length must equal nvars"));
        }
        let exp: Exp = e
            .iter()
            .map(|v| {
                v.as_u64()
                    .filter(|&x| x <= MAX_EXPONENT as u64)
                    .map(|x| x as u32)
                    .ok_or_else(|| Error::domain("exponents must be small non-negative integers"))
            })
            .collect::<Result<_>>()?;
        let c = element_from_json(ctx, t.get("c").ok_or_else(|| Error::domain("term needs a coefficient `c`"))?)?;
        poly.add_term(exp, c.packed());
    }
    Ok(poly)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded_rng;
    use rand::RngExt;

    fn f(spec: &str) -> FieldCtx {
        FieldCtx::parse_spec(spec).unwrap()
    }

    fn p(ctx: &FieldCtx, nvars: usize, text: &str) -> MvPoly {
        MvPoly::parse(ctx, nvars, text).unwrap()
    }

    #[test]
    fn parses_three_square_sum() {
        let poly = p(&f("5"), 3, "x^2 + y^2 + z^2");
        assert_eq!(poly.num_terms(), 3);
        assert_eq!(poly.total_degree(), Some(2));
    }

    #[test]
    fn parses_with_parentheses_and_distributes() {
        let poly = p(&f("5"), 3, "2*z^2 + (x+y)*z + x*y");
        assert_eq!(poly.num_terms(), 4);
        assert_eq!(poly.total_degree(), Some(2));
    }

    #[test]
    fn coefficients_reduce_mod_p() {
        let poly = p(&f("7"), 2, "x^2 - 7*y");
        assert_eq!(poly.num_terms(), 1);
        let big = p(&f("7"), 1, "100000000000000000000000000003");
        // 10^29 mod 7: 10 == 3 (mod 7), 3^29 == 3^(29 mod 6) == 3^5 == 5; 5 + 3 == 1.
        assert_eq!(big, MvPoly::constant(&f("7").from_int(1), 1));
    }

    #[test]
    fn rejects_bad_syntax_with_position() {
        let err = MvPoly::parse(&f("5"), 2, "x + * y").unwrap_err();
        match err {
            Error::Parse { pos, .. } => assert_eq!(pos, 4),
            other => panic!("expected a parse error, got {other}"),
        }
    }

    #[test]
    fn rejects_out_of_range_variables() {
        assert!(MvPoly::parse(&f("5"), 2, "z + 1").is_err());
        assert!(MvPoly::parse(&f("5"), 3, "x4").is_err());
        assert!(MvPoly::parse(&f("5"), 4, "x").is_err());
        assert!(MvPoly::parse(&f("5"), 4, "x4 + x1").is_ok());
    }

    #[test]
    fn rejects_huge_exponents() {
        assert!(MvPoly::parse(&f("5"), 1, "x^99999999999999").is_err());
        assert!(MvPoly::parse(&f("5"), 1, "x^-2").is_err());
    }

    #[test]
    fn print_parse_roundtrip_is_identity() {
        let ctx = f("13");
        let mut rng = seeded_rng(3);
        for _ in 0..1000 {
            let poly = MvPoly::random_sparse(&ctx, 3, 5, 6, &mut rng);
            let reparsed = MvPoly::parse(&ctx, 3, &poly.to_string()).unwrap();
            assert_eq!(poly, reparsed, "text was `{poly}`");
        }
        // Many variables use the x1..xN names.
        for _ in 0..200 {
            let poly = MvPoly::random_sparse(&ctx, 5, 4, 6, &mut rng);
            let reparsed = MvPoly::parse(&ctx, 5, &poly.to_string()).unwrap();
            assert_eq!(poly, reparsed);
        }
        assert_eq!(MvPoly::parse(&ctx, 2, "0").unwrap(), MvPoly::zero(&ctx, 2));
        assert_eq!(MvPoly::zero(&ctx, 2).to_string(), "0");
    }

    #[test]
    fn evaluates_like_a_ring_homomorphism() {
        let ctx = f("11");
        let mut rng = seeded_rng(17);
        for _ in 0..2000 {
            let a = MvPoly::random_sparse(&ctx, 3, 4, 4, &mut rng);
            let b = MvPoly::random_sparse(&ctx, 3, 4, 4, &mut rng);
            let pt: Vec<FieldElement> =
                (0..3).map(|_| ctx.from_packed(rng.random_range(0..ctx.q())).unwrap()).collect();
            let av = a.eval(&pt).unwrap();
            let bv = b.eval(&pt).unwrap();
            assert_eq!((&a + &b).eval(&pt).unwrap(), &av + &bv);
            assert_eq!((&a * &b).eval(&pt).unwrap(), &av * &bv);
        }
    }

    #[test]
    fn eval_matches_spec_example() {
        let ctx = f("5");
        let poly = p(&ctx, 2, "x^2 + y");
        let v = poly.eval(&[ctx.from_int(2), ctx.from_int(3)]).unwrap();
        assert_eq!(v, ctx.from_int(2));
    }

    #[test]
    fn eval_rejects_mixed_context_points() {
        let poly = p(&f("5"), 1, "x");
        assert!(poly.eval(&[f("7").one()]).is_err());
        assert!(poly.eval(&[]).is_err());
    }

    #[test]
    fn product_of_conjugates() {
        let ctx = f("5");
        let lhs = &p(&ctx, 2, "x + y") * &p(&ctx, 2, "x - y");
        assert_eq!(lhs, p(&ctx, 2, "x^2 + 4*y^2"));
    }

    #[test]
    fn additive_inverse_cancels() {
        let ctx = f("7");
        let mut rng = seeded_rng(5);
        for _ in 0..200 {
            let a = MvPoly::random_sparse(&ctx, 2, 5, 5, &mut rng);
            assert!((&a + &(-&a)).is_zero());
        }
    }

    #[test]
    fn composes_univariate_polynomials() {
        let ctx = f("7");
        let g = p(&ctx, 1, "x^2");
        let inner = p(&ctx, 3, "x + y + z");
        let composed = MvPoly::compose_univariate(&g, &inner).unwrap();
        assert_eq!(composed, p(&ctx, 3, "x^2 + y^2 + z^2 + 2*x*y + 2*x*z + 2*y*z"));
    }

    #[test]
    fn derivative_follows_leibniz() {
        let ctx = f("7");
        let mut rng = seeded_rng(23);
        for _ in 0..500 {
            let a = MvPoly::random_sparse(&ctx, 3, 4, 4, &mut rng);
            let b = MvPoly::random_sparse(&ctx, 3, 4, 4, &mut rng);
            for i in 0..3 {
                let lhs = (&a * &b).partial(i).unwrap();
                let rhs = &(&a.partial(i).unwrap() * &b) + &(&a * &b.partial(i).unwrap());
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn derivative_kills_pth_powers() {
        let ctx = f("3");
        assert!(p(&ctx, 1, "x^3").partial(0).unwrap().is_zero());
        let ctx5 = f("5");
        assert_eq!(p(&ctx5, 2, "x^2*y").partial(0).unwrap(), p(&ctx5, 2, "2*x*y"));
        assert!(p(&ctx5, 2, "x^2").partial(1).unwrap().is_zero());
    }

    #[test]
    fn decomposes_running_example() {
        let ctx = f("5");
        let poly = p(&ctx, 3, "2*z^2 + (x+y)*z + x*y");
        let d = poly.decompose(2).unwrap();
        assert_eq!(d.degree, 2);
        assert_eq!(d.leading, ctx.from_int(2));
        assert_eq!(d.parts[0], p(&ctx, 2, "x + y"));
        assert_eq!(d.parts[1], p(&ctx, 2, "x*y"));
    }

    #[test]
    fn decomposes_diagonal_quadratic() {
        let ctx = f("5");
        let d = p(&ctx, 3, "x^2 + y^2 + z^2").decompose(2).unwrap();
        assert_eq!(d.leading, ctx.one());
        assert!(d.parts[0].is_zero());
        assert_eq!(d.parts[1], p(&ctx, 2, "x^2 + y^2"));
    }

    #[test]
    fn decomposes_with_zero_leading_coefficient() {
        let ctx = f("5");
        let d = p(&ctx, 2, "x*y").decompose(1).unwrap();
        assert!(d.leading.is_zero());
        assert_eq!(d.parts[0], p(&ctx, 1, "x"));
        assert!(d.parts[1].is_zero());
    }

    #[test]
    fn decompose_rejects_degenerate_inputs() {
        let ctx = f("5");
        assert!(MvPoly::zero(&ctx, 2).decompose(0).is_err());
        assert!(p(&ctx, 2, "3").decompose(0).is_err());
        assert!(p(&ctx, 1, "x").decompose(0).is_err());
        assert!(p(&ctx, 2, "x*y").decompose(2).is_err());
    }

    #[test]
    fn decomposition_reassembles_exactly() {
        let ctx = f("7");
        let mut rng = seeded_rng(29);
        let mut checked = 0;
        while checked < 1000 {
            let poly = MvPoly::random_sparse(&ctx, 3, 5, 6, &mut rng);
            if poly.is_constant() {
                continue;
            }
            for i in 0..3 {
                let d = poly.decompose(i).unwrap();
                assert_eq!(d.reassemble(), poly);
            }
            checked += 1;
        }
    }

    #[test]
    fn substitution_expands_composites() {
        let ctx = f("5");
        let q = p(&ctx, 2, "x^2 - y");
        let f1 = p(&ctx, 2, "x*y");
        let f2 = p(&ctx, 2, "x^2*y^2");
        let composed = q.substitute(&[f1, f2]).unwrap();
        assert!(composed.is_zero());
    }

    #[test]
    fn json_roundtrip() {
        let ctx = f("3^2");
        let mut rng = seeded_rng(31);
        for _ in 0..200 {
            let poly = MvPoly::random_sparse(&ctx, 3, 4, 5, &mut rng);
            let json = serde_json::to_value(&poly).unwrap();
            let back = poly_from_json(&ctx, &json).unwrap();
            assert_eq!(poly, back);
        }
    }
}
