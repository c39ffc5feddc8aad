//! Finite-field arithmetic for F_q, q = p^k.
//!
//! A [`FieldCtx`] fixes the prime p, the extension degree k and, for k > 1,
//! the reducing modulus: the lexicographically smallest monic irreducible
//! polynomial of degree k over F_p, coefficient tuples ordered
//! low-degree-first.  Every element is stored packed: the residue class with
//! base-p digits (c_0, ..., c_{k-1}), i.e. c_0 + c_1 t + ... + c_{k-1} t^{k-1}
//! modulo the modulus, packs to the integer c_0 + c_1 p + ... + c_{k-1} p^{k-1}.
//! Packed values are canonical, so equality, hashing and enumeration order all
//! read straight off them; prime fields enumerate as 0, 1, ..., p-1.
//!
//! Field sizes are capped at [`MAX_Q`].  Everything here is immutable after
//! construction; a context can be cloned freely (it is one `Arc`).

use std::fmt;
use std::sync::Arc;

use serde::ser::SerializeSeq;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// Largest supported field size: q = p^k <= 2^20.
pub const MAX_Q: u64 = 1 << 20;

/// Largest supported extension degree (2^20 = p^k with p >= 2 forces k <= 20).
const MAX_K: usize = 20;

#[derive(Debug)]
struct CtxInner {
    p: u64,
    k: u32,
    q: u64,
    /// Modulus coefficients c_0..c_k, low-degree-first, monic (c_k = 1).
    /// Empty for prime fields.
    modulus: Vec<u64>,
}

/// A fixed finite field F_q with q = p^k.
#[derive(Clone, Debug)]
pub struct FieldCtx {
    inner: Arc<CtxInner>,
}

impl PartialEq for FieldCtx {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner)
            || (self.inner.p == other.inner.p && self.inner.k == other.inner.k)
    }
}

impl Eq for FieldCtx {}

impl fmt::Display for FieldCtx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F_{}", self.spec_string())
    }
}

impl FieldCtx {
    /// Builds F_{p^k}.  For k > 1 the modulus is found by scanning monic
    /// degree-k polynomials in packed-value order and keeping the first
    /// irreducible one, which is exactly the lexicographic minimum over
    /// low-degree-first coefficient tuples.
    pub fn new(p: u64, k: u32) -> Result<FieldCtx> {
        if !is_prime(p) {
            return Err(Error::domain(format!("{p} is not prime")));
        }
        if k == 0 {
            return Err(Error::domain("extension degree k must be >= 1"));
        }
        let mut q: u64 = 1;
        for _ in 0..k {
            q = q
                .checked_mul(p)
                .filter(|&v| v <= MAX_Q)
                .ok_or_else(|| Error::cap(format!("q = {p}^{k} exceeds the cap {MAX_Q}")))?;
        }
        let modulus = if k == 1 { Vec::new() } else { smallest_irreducible(p, k as usize) };
        Ok(FieldCtx { inner: Arc::new(CtxInner { p, k, q, modulus }) })
    }

    /// Parses a field spec string: a prime like `"7"` or a prime power like `"3^2"`.
    pub fn parse_spec(spec: &str) -> Result<FieldCtx> {
        let bad = |msg: &str| Error::FieldSpec { spec: spec.to_string(), msg: msg.to_string() };
        let (p_str, k_str) = match spec.split_once('^') {
            Some((a, b)) => (a, b),
            None => (spec, "1"),
        };
        let p: u64 = p_str.trim().parse().map_err(|_| bad("base must be an integer"))?;
        let k: u32 = k_str.trim().parse().map_err(|_| bad("exponent must be an integer"))?;
        FieldCtx::new(p, k).map_err(|e| bad(&e.to_string()))
    }

    /// Inverse of [`FieldCtx::parse_spec`]: `"7"` or `"3^2"`.
    pub fn spec_string(&self) -> String {
        if self.k() == 1 { format!("{}", self.p()) } else { format!("{}^{}", self.p(), self.k()) }
    }

    pub fn p(&self) -> u64 {
        self.inner.p
    }

    pub fn k(&self) -> u32 {
        self.inner.k
    }

    pub fn q(&self) -> u64 {
        self.inner.q
    }

    /// Modulus coefficients c_0..c_k (low-degree-first, monic), or `None`
    /// for prime fields.
    pub fn modulus(&self) -> Option<&[u64]> {
        if self.inner.modulus.is_empty() { None } else { Some(&self.inner.modulus) }
    }

    pub fn zero(&self) -> FieldElement {
        FieldElement { ctx: self.clone(), val: 0 }
    }

    pub fn one(&self) -> FieldElement {
        FieldElement { ctx: self.clone(), val: 1 }
    }

    /// Embeds an integer as a constant, reducing mod p (negatives allowed).
    pub fn from_int(&self, n: i64) -> FieldElement {
        let p = self.p() as i64;
        let r = n.rem_euclid(p) as u64;
        FieldElement { ctx: self.clone(), val: r }
    }

    /// Builds an element from digits c_0..c_{m-1} (low-degree-first, m <= k),
    /// each reduced mod p.
    pub fn from_coeffs(&self, coeffs: &[i64]) -> Result<FieldElement> {
        if coeffs.len() > self.k() as usize {
            return Err(Error::domain(format!(
                "{} coefficients given but the field has degree {}",
                coeffs.len(),
                self.k()
            )));
        }
        let p = self.p() as i64;
        let mut val = 0u64;
        for &c in coeffs.iter().rev() {
            val = val * self.p() + c.rem_euclid(p) as u64;
        }
        Ok(FieldElement { ctx: self.clone(), val })
    }

    /// Builds an element from its packed value (must be < q).
    pub fn from_packed(&self, val: u64) -> Result<FieldElement> {
        if val >= self.q() {
            return Err(Error::domain(format!("packed value {val} >= q = {}", self.q())));
        }
        Ok(FieldElement { ctx: self.clone(), val })
    }

    /// All q elements in packed-value order: 0 first, 1 second.
    pub fn enumerate(&self) -> impl Iterator<Item = FieldElement> + '_ {
        (0..self.q()).map(move |val| FieldElement { ctx: self.clone(), val })
    }

    /// Wraps a packed value known to be in range (an invariant of every
    /// internal container, so no re-validation).
    pub(crate) fn element_raw(&self, val: u64) -> FieldElement {
        debug_assert!(val < self.q());
        FieldElement { ctx: self.clone(), val }
    }

    pub(crate) fn check_same(&self, other: &FieldCtx, what: &str) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::CtxMismatch(format!("{what}: F_{} vs F_{}", self.spec_string(), other.spec_string())))
        }
    }

    // ---- Raw arithmetic on packed values ----
    //
    // The hot loops (image scans, incidence counts) run on packed u64 values
    // to avoid per-element allocation; the checked element API below wraps
    // these.  All inputs must already be < q.

    pub fn add_raw(&self, a: u64, b: u64) -> u64 {
        let inner = &*self.inner;
        if inner.k == 1 {
            let s = a + b;
            return if s >= inner.p { s - inner.p } else { s };
        }
        let (mut da, mut db) = ([0u64; MAX_K], [0u64; MAX_K]);
        let k = inner.k as usize;
        unpack(inner.p, k, a, &mut da);
        unpack(inner.p, k, b, &mut db);
        for i in 0..k {
            da[i] += db[i];
            if da[i] >= inner.p {
                da[i] -= inner.p;
            }
        }
        pack(inner.p, k, &da)
    }

    pub fn sub_raw(&self, a: u64, b: u64) -> u64 {
        self.add_raw(a, self.neg_raw(b))
    }

    pub fn neg_raw(&self, a: u64) -> u64 {
        let inner = &*self.inner;
        if inner.k == 1 {
            return if a == 0 { 0 } else { inner.p - a };
        }
        let mut d = [0u64; MAX_K];
        let k = inner.k as usize;
        unpack(inner.p, k, a, &mut d);
        for c in d.iter_mut().take(k) {
            if *c != 0 {
                *c = inner.p - *c;
            }
        }
        pack(inner.p, k, &d)
    }

    pub fn mul_raw(&self, a: u64, b: u64) -> u64 {
        let inner = &*self.inner;
        if inner.k == 1 {
            return a * b % inner.p;
        }
        let (mut da, mut db) = ([0u64; MAX_K], [0u64; MAX_K]);
        let k = inner.k as usize;
        unpack(inner.p, k, a, &mut da);
        unpack(inner.p, k, b, &mut db);
        let mut prod = [0u64; 2 * MAX_K - 1];
        for i in 0..k {
            if da[i] == 0 {
                continue;
            }
            for j in 0..k {
                prod[i + j] = (prod[i + j] + da[i] * db[j]) % inner.p;
            }
        }
        // Monic modulus: t^k = -(c_0 + c_1 t + ... + c_{k-1} t^{k-1}).
        for i in (k..2 * k - 1).rev() {
            let c = prod[i];
            if c == 0 {
                continue;
            }
            prod[i] = 0;
            for j in 0..k {
                let m = inner.modulus[j];
                if m != 0 {
                    prod[i - k + j] = (prod[i - k + j] + (inner.p - m) * c) % inner.p;
                }
            }
        }
        pack(inner.p, k, &prod[..k])
    }

    pub fn pow_raw(&self, a: u64, mut e: u64) -> u64 {
        let mut base = a;
        let mut acc = 1u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul_raw(acc, base);
            }
            base = self.mul_raw(base, base);
            e >>= 1;
        }
        acc
    }

    /// Multiplicative inverse via the extended Euclidean algorithm
    /// (integer form for prime fields, polynomial form for extensions).
    pub fn inv_raw(&self, a: u64) -> Result<u64> {
        if a == 0 {
            return Err(Error::domain("inversion of zero"));
        }
        let inner = &*self.inner;
        if inner.k == 1 {
            return Ok(inv_mod_prime(a, inner.p));
        }
        let k = inner.k as usize;
        let mut digits = [0u64; MAX_K];
        unpack(inner.p, k, a, &mut digits);
        let inv = poly_inv_mod(&digits[..k], &inner.modulus, inner.p).ok_or_else(|| {
            Error::Internal("element not invertible modulo an irreducible modulus".into())
        })?;
        let mut padded = [0u64; MAX_K];
        padded[..inv.len()].copy_from_slice(&inv);
        Ok(pack(inner.p, k, &padded[..k]))
    }

    pub(crate) fn unpack_digits(&self, val: u64) -> Vec<u64> {
        let k = self.k() as usize;
        let mut d = vec![0u64; k];
        let mut v = val;
        for digit in d.iter_mut() {
            *digit = v % self.p();
            v /= self.p();
        }
        d
    }
}

/// An element of a fixed [`FieldCtx`].
///
/// Binary operators panic if the operands belong to different contexts;
/// fallible entry points live on the owning structures (polynomials, sets)
/// and return [`Error::CtxMismatch`] instead.
#[derive(Clone, Debug)]
pub struct FieldElement {
    ctx: FieldCtx,
    val: u64,
}

impl PartialEq for FieldElement {
    fn eq(&self, other: &Self) -> bool {
        self.ctx == other.ctx && self.val == other.val
    }
}

impl Eq for FieldElement {}

impl std::hash::Hash for FieldElement {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.ctx.p().hash(state);
        self.ctx.k().hash(state);
        self.val.hash(state);
    }
}

impl FieldElement {
    pub fn ctx(&self) -> &FieldCtx {
        &self.ctx
    }

    /// Canonical packed value in [0, q).
    pub fn packed(&self) -> u64 {
        self.val
    }

    /// Digits c_0..c_{k-1}, low-degree-first.
    pub fn coeffs(&self) -> Vec<u64> {
        self.ctx.unpack_digits(self.val)
    }

    /// Canonical integer representative in [0, p).  Errors on extension
    /// fields, where no such representative exists.
    pub fn canon_rep(&self) -> Result<u64> {
        if self.ctx.k() == 1 {
            Ok(self.val)
        } else {
            Err(Error::domain("canonical integer representatives exist only in prime fields"))
        }
    }

    pub fn is_zero(&self) -> bool {
        self.val == 0
    }

    pub fn inv(&self) -> Result<FieldElement> {
        Ok(FieldElement { ctx: self.ctx.clone(), val: self.ctx.inv_raw(self.val)? })
    }

    pub fn pow(&self, e: u64) -> FieldElement {
        FieldElement { ctx: self.ctx.clone(), val: self.ctx.pow_raw(self.val, e) }
    }

    fn assert_same_ctx(&self, other: &FieldElement) {
        assert!(
            self.ctx == other.ctx,
            "field context mismatch: F_{} vs F_{}",
            self.ctx.spec_string(),
            other.ctx.spec_string()
        );
    }
}

impl std::ops::Add for &FieldElement {
    type Output = FieldElement;

    fn add(self, rhs: &FieldElement) -> FieldElement {
        self.assert_same_ctx(rhs);
        FieldElement { ctx: self.ctx.clone(), val: self.ctx.add_raw(self.val, rhs.val) }
    }
}

impl std::ops::Sub for &FieldElement {
    type Output = FieldElement;

    fn sub(self, rhs: &FieldElement) -> FieldElement {
        self.assert_same_ctx(rhs);
        FieldElement { ctx: self.ctx.clone(), val: self.ctx.sub_raw(self.val, rhs.val) }
    }
}

impl std::ops::Mul for &FieldElement {
    type Output = FieldElement;

    fn mul(self, rhs: &FieldElement) -> FieldElement {
        self.assert_same_ctx(rhs);
        FieldElement { ctx: self.ctx.clone(), val: self.ctx.mul_raw(self.val, rhs.val) }
    }
}

impl std::ops::Neg for &FieldElement {
    type Output = FieldElement;

    fn neg(self) -> FieldElement {
        FieldElement { ctx: self.ctx.clone(), val: self.ctx.neg_raw(self.val) }
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.ctx.k() == 1 {
            write!(f, "{}", self.val)
        } else {
            let digits: Vec<String> = self.coeffs().iter().map(u64::to_string).collect();
            write!(f, "[{}]", digits.join(","))
        }
    }
}

/// JSON form: a plain integer for prime fields, a digit list for extensions.
impl Serialize for FieldElement {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        if self.ctx.k() == 1 {
            serializer.serialize_u64(self.val)
        } else {
            let digits = self.coeffs();
            let mut seq = serializer.serialize_seq(Some(digits.len()))?;
            for d in digits {
                seq.serialize_element(&d)?;
            }
            seq.end()
        }
    }
}

/// Reads an element from its JSON form (integer, or digit list for k > 1).
pub fn element_from_json(ctx: &FieldCtx, value: &serde_json::Value) -> Result<FieldElement> {
    match value {
        serde_json::Value::Number(n) => {
            let v = n
                .as_i64()
                .ok_or_else(|| Error::domain(format!("element {n} is not a plain integer")))?;
            Ok(ctx.from_int(v))
        }
        serde_json::Value::Array(items) => {
            let mut coeffs = Vec::with_capacity(items.len());
            for it in items {
                let v = it
                    .as_i64()
                    .ok_or_else(|| Error::domain("element digit is not an integer".to_string()))?;
                coeffs.push(v);
            }
            ctx.from_coeffs(&coeffs)
        }
        other => Err(Error::domain(format!("cannot read a field element from {other}"))),
    }
}

// ---- Subsets of F_q ----

/// A subset of F_q, stored as sorted, deduplicated packed values.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Subset {
    ctx: FieldCtx,
    vals: Vec<u64>,
}

impl Subset {
    pub fn from_elements(ctx: &FieldCtx, elems: &[FieldElement]) -> Result<Subset> {
        let mut vals = Vec::with_capacity(elems.len());
        for e in elems {
            ctx.check_same(e.ctx(), "subset element")?;
            vals.push(e.packed());
        }
        Ok(Subset::from_raw(ctx, vals))
    }

    pub(crate) fn from_raw(ctx: &FieldCtx, mut vals: Vec<u64>) -> Subset {
        vals.sort_unstable();
        vals.dedup();
        debug_assert!(vals.last().is_none_or(|&v| v < ctx.q()));
        Subset { ctx: ctx.clone(), vals }
    }

    /// The full field.
    pub fn full(ctx: &FieldCtx) -> Subset {
        Subset { ctx: ctx.clone(), vals: (0..ctx.q()).collect() }
    }

    pub fn ctx(&self) -> &FieldCtx {
        &self.ctx
    }

    pub fn len(&self) -> usize {
        self.vals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vals.is_empty()
    }

    pub fn contains(&self, e: &FieldElement) -> bool {
        self.ctx == *e.ctx() && self.vals.binary_search(&e.packed()).is_ok()
    }

    /// Packed values, sorted ascending.
    pub fn packed_vals(&self) -> &[u64] {
        &self.vals
    }

    pub fn iter(&self) -> impl Iterator<Item = FieldElement> + '_ {
        self.vals.iter().map(|&val| FieldElement { ctx: self.ctx.clone(), val })
    }
}

impl Serialize for Subset {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.vals.len()))?;
        for e in self.iter() {
            seq.serialize_element(&e)?;
        }
        seq.end()
    }
}

// ---- Primality and polynomial helpers over F_p ----

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

fn inv_mod_prime(a: u64, p: u64) -> u64 {
    // Extended Euclid on (a, p); p prime and a != 0 mod p.
    let (mut r0, mut r1) = (a as i64, p as i64);
    let (mut s0, mut s1) = (1i64, 0i64);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
    }
    debug_assert_eq!(r0, 1);
    s0.rem_euclid(p as i64) as u64
}

fn unpack(p: u64, k: usize, val: u64, out: &mut [u64; MAX_K]) {
    let mut v = val;
    for slot in out.iter_mut().take(k) {
        *slot = v % p;
        v /= p;
    }
}

fn pack(p: u64, k: usize, digits: &[u64]) -> u64 {
    let mut val = 0u64;
    for i in (0..k).rev() {
        val = val * p + digits[i];
    }
    val
}

/// Degree of a coefficient vector, or `None` for the zero polynomial.
fn poly_deg(a: &[u64]) -> Option<usize> {
    a.iter().rposition(|&c| c != 0)
}

fn poly_trim(mut a: Vec<u64>) -> Vec<u64> {
    while a.last() == Some(&0) {
        a.pop();
    }
    a
}

/// Remainder of a modulo b over F_p (b nonzero).
fn poly_rem(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let db = poly_deg(b).expect("division by the zero polynomial");
    let lead_inv = inv_mod_prime(b[db], p);
    let mut r: Vec<u64> = a.to_vec();
    while let Some(dr) = poly_deg(&r) {
        if dr < db {
            break;
        }
        let coef = r[dr] * lead_inv % p;
        let shift = dr - db;
        for (i, &bc) in b.iter().enumerate().take(db + 1) {
            if bc != 0 {
                let sub = coef * bc % p;
                r[shift + i] = (r[shift + i] + p - sub) % p;
            }
        }
    }
    poly_trim(r)
}

fn poly_mul(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &ac) in a.iter().enumerate() {
        if ac == 0 {
            continue;
        }
        for (j, &bc) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + ac * bc) % p;
        }
    }
    poly_trim(out)
}

fn poly_sub(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let mut out = vec![0u64; a.len().max(b.len())];
    for (i, slot) in out.iter_mut().enumerate() {
        let av = a.get(i).copied().unwrap_or(0);
        let bv = b.get(i).copied().unwrap_or(0);
        *slot = (av + p - bv) % p;
    }
    poly_trim(out)
}

/// Inverse of a modulo m over F_p, or `None` if gcd(a, m) != 1.
fn poly_inv_mod(a: &[u64], m: &[u64], p: u64) -> Option<Vec<u64>> {
    let (mut r0, mut r1) = (m.to_vec(), poly_trim(a.to_vec()));
    let (mut s0, mut s1): (Vec<u64>, Vec<u64>) = (Vec::new(), vec![1]);
    while !r1.is_empty() {
        // Quotient-free step: r0 mod r1 with the Bezout update folded in.
        let (q_times_s1, rem) = {
            let db = poly_deg(&r1).unwrap();
            let lead_inv = inv_mod_prime(r1[db], p);
            let mut r = r0.clone();
            let mut quot = vec![0u64; r.len().saturating_sub(db) + 1];
            while let Some(dr) = poly_deg(&r) {
                if dr < db {
                    break;
                }
                let coef = r[dr] * lead_inv % p;
                quot[dr - db] = coef;
                for (i, &bc) in r1.iter().enumerate().take(db + 1) {
                    if bc != 0 {
                        let sub = coef * bc % p;
                        r[dr - db + i] = (r[dr - db + i] + p - sub) % p;
                    }
                }
            }
            (poly_mul(&poly_trim(quot), &s1, p), poly_trim(r))
        };
        (r0, r1) = (r1, rem);
        (s0, s1) = (s1, poly_sub(&s0, &q_times_s1, p));
    }
    let d = poly_deg(&r0)?;
    if d != 0 {
        return None;
    }
    let scale = inv_mod_prime(r0[0], p);
    Some(poly_trim(s0.iter().map(|&c| c * scale % p).collect()))
}

/// True if the monic polynomial has no monic divisor of degree 1..=deg/2.
fn is_irreducible(poly: &[u64], p: u64) -> bool {
    let deg = poly_deg(poly).unwrap();
    debug_assert!(deg >= 1 && poly[deg] == 1);
    for d in 1..=deg / 2 {
        let count = p.pow(d as u32);
        for packed_div in 0..count {
            let mut divisor = vec![0u64; d + 1];
            let mut v = packed_div;
            for slot in divisor.iter_mut().take(d) {
                *slot = v % p;
                v /= p;
            }
            divisor[d] = 1;
            if poly_rem(poly, &divisor, p).is_empty() {
                return false;
            }
        }
    }
    true
}

/// Lexicographically smallest monic irreducible of degree k over F_p,
/// low-degree-first coefficient order.
fn smallest_irreducible(p: u64, k: usize) -> Vec<u64> {
    let count = p.pow(k as u32);
    for packed in 0..count {
        let mut cand = vec![0u64; k + 1];
        let mut v = packed;
        for slot in cand.iter_mut().take(k) {
            *slot = v % p;
            v /= p;
        }
        cand[k] = 1;
        if is_irreducible(&cand, p) {
            return cand;
        }
    }
    unreachable!("irreducible polynomials exist in every degree");
}
