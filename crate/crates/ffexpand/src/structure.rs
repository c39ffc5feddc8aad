//! Algebraic-independence machinery for coefficient decompositions.
//!
//! The central question: given a nonconstant P in n variables of total
//! degree d, does some distinguished variable give a decomposition
//! P = a x^d + P_1 x^{d-1} + ... + P_d whose parts P_1..P_d are algebraically
//! independent over the remaining variables?  [`is_nice`] answers with a
//! three-way verdict carrying checkable certificates:
//!
//! * a nonzero Jacobian determinant (or, for fewer parts than variables, a
//!   nonzero maximal minor) certifies independence — sound over any finite
//!   field because F_q is perfect;
//! * a verified annihilator Q with Q(P_1,...,P_d) = 0 certifies dependence;
//! * anything else is `Inconclusive`: the annihilator search is a bounded
//!   linear-algebra procedure, not a decision procedure, and the bound it
//!   ran with is recorded on the verdict.
//!
//! [`classify_quadratic`] is an independent closed-form classifier for
//! ternary quadratics over odd fields (missing variable / no cross terms /
//! completed square); agreement with [`is_nice`] is enforced by tests.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::gf::{FieldCtx, FieldElement};
use crate::linalg::MatrixGF;
use crate::mvpoly::{Exp, MvPoly};

/// Size limits for the annihilator linear system.  `max_columns` bounds the
/// candidate-coefficient count C(M+m, m); `max_rows` bounds the number of
/// distinct monomials the expanded products may touch.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct AnnihilatorBudget {
    pub max_columns: usize,
    pub max_rows: usize,
}

impl Default for AnnihilatorBudget {
    fn default() -> Self {
        AnnihilatorBudget { max_columns: 5_000, max_rows: 200_000 }
    }
}

/// Options for [`is_nice_with`].
#[derive(Clone, Copy, Debug, Default)]
pub struct NicenessOptions {
    /// Fixed annihilator degree bound; `None` picks a per-choice default
    /// (product of part degrees, raised to the counting bound when that
    /// guarantees existence) capped to fit the budget.
    pub bound_override: Option<usize>,
    pub budget: AnnihilatorBudget,
}

/// A verified algebraic dependence: `relation` is nonzero and
/// `relation(polys[0], ..., polys[m-1])` expands to the zero polynomial.
#[derive(Clone, Debug, Serialize)]
pub struct AnnihilatorRelation {
    pub polys: Vec<MvPoly>,
    pub relation: MvPoly,
    pub degree: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NicenessStatus {
    Nice,
    NotNice,
    Inconclusive,
}

/// Evidence about a family of polynomials over a shared variable set.
#[derive(Clone, Debug, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FamilyStatus {
    /// A nonzero maximal minor of the family's Jacobian.
    Independent { witness: MvPoly },
    /// A verified annihilator among the members.
    Dependent { relation: AnnihilatorRelation },
    /// No certificate either way within the searched degree bound.
    Unknown { bound_searched: usize },
}

impl FamilyStatus {
    pub fn is_independent(&self) -> bool {
        matches!(self, FamilyStatus::Independent { .. })
    }

    pub fn is_dependent(&self) -> bool {
        matches!(self, FamilyStatus::Dependent { .. })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FamilyReport {
    pub status: FamilyStatus,
    /// Annihilator degree bound the search ran with; 0 when a short-circuit
    /// (constant member or Jacobian witness) settled the family first.
    pub bound_used: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct ChoiceReport {
    pub distinguished: usize,
    pub outcome: FamilyStatus,
}

#[derive(Clone, Debug, Serialize)]
pub struct NicenessVerdict {
    pub status: NicenessStatus,
    /// The witnessing distinguished variable when `status` is `Nice`.
    pub distinguished: Option<usize>,
    /// Per-choice evidence, in variable order; stops early once a choice
    /// certifies independence.
    pub choices: Vec<ChoiceReport>,
    /// Largest annihilator degree bound any choice searched with.
    pub bound_used: usize,
}

// ---- Jacobians ----

/// The matrix of partial derivatives: row k is grad polys[k], one column per
/// variable of the inputs.
pub fn jacobian_matrix(polys: &[MvPoly]) -> Result<Vec<Vec<MvPoly>>> {
    let first = polys.first().ok_or_else(|| Error::domain("jacobian of an empty family"))?;
    let nvars = first.nvars();
    let mut rows = Vec::with_capacity(polys.len());
    for p in polys {
        first.ctx().check_same(p.ctx(), "jacobian family")?;
        if p.nvars() != nvars {
            return Err(Error::domain("jacobian family members have differing variable counts"));
        }
        let mut row = Vec::with_capacity(nvars);
        for j in 0..nvars {
            row.push(p.partial(j)?);
        }
        rows.push(row);
    }
    Ok(rows)
}

/// det(d polys[k] / d x_j) for a family whose length equals its variable
/// count.  Cofactor expansion; families here have at most a handful of parts.
pub fn jacobian_det(polys: &[MvPoly]) -> Result<MvPoly> {
    let m = jacobian_matrix(polys)?;
    if m.len() != polys[0].nvars() {
        return Err(Error::domain(format!(
            "jacobian determinant needs as many polynomials as variables, got {} in {}",
            m.len(),
            polys[0].nvars()
        )));
    }
    Ok(det(&m))
}

fn det(m: &[Vec<MvPoly>]) -> MvPoly {
    let n = m.len();
    let ctx = m[0][0].ctx().clone();
    let nvars = m[0][0].nvars();
    if n == 1 {
        return m[0][0].clone();
    }
    let mut acc = MvPoly::zero(&ctx, nvars);
    for (j, entry) in m[0].iter().enumerate() {
        if entry.is_zero() {
            continue;
        }
        let minor: Vec<Vec<MvPoly>> = m[1..]
            .iter()
            .map(|row| row.iter().enumerate().filter(|&(c, _)| c != j).map(|(_, p)| p.clone()).collect())
            .collect();
        let cofactor = &det(&minor) * entry;
        if j % 2 == 0 {
            acc = &acc + &cofactor;
        } else {
            acc = &acc - &cofactor;
        }
    }
    acc
}

/// Searches for a nonzero m x m minor of the Jacobian of m polynomials in
/// r >= m variables, scanning column subsets in lexicographic order.  A
/// nonzero minor proves algebraic independence over a perfect base field.
fn jacobian_independence_witness(polys: &[MvPoly]) -> Result<Option<MvPoly>> {
    let m = polys.len();
    let r = polys[0].nvars();
    debug_assert!(m <= r);
    let jac = jacobian_matrix(polys)?;
    let mut cols: Vec<usize> = (0..m).collect();
    loop {
        let sub: Vec<Vec<MvPoly>> =
            jac.iter().map(|row| cols.iter().map(|&c| row[c].clone()).collect()).collect();
        let d = det(&sub);
        if !d.is_zero() {
            return Ok(Some(d));
        }
        // Next lexicographic m-subset of 0..r.
        let mut i = m;
        loop {
            if i == 0 {
                return Ok(None);
            }
            i -= 1;
            if cols[i] < r - (m - i) {
                cols[i] += 1;
                for j in i + 1..m {
                    cols[j] = cols[j - 1] + 1;
                }
                break;
            }
        }
    }
}

// ---- Counting bound ----

/// Binomial coefficient, saturating at u128::MAX.
fn binom(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        match acc.checked_mul(n - i) {
            Some(v) => acc = v / (i + 1),
            None => return u128::MAX,
        }
    }
    acc
}

/// Smallest M >= 1 with C(M+m, m) > C(d*M + n, n): at that degree a
/// coefficient count forces a nontrivial kernel, so m polynomials of degree
/// <= d in n variables must satisfy a relation of degree <= M.  `None` when
/// no such M exists (m <= n, where the left side can never catch up).
pub fn perron_bound(m: usize, n: usize, d: usize) -> Option<usize> {
    if m <= n || d == 0 {
        return None;
    }
    let (m128, n128, d128) = (m as u128, n as u128, d as u128);
    (1..=100_000u128)
        .find(|&big_m| binom(big_m + m128, m128) > binom(d128 * big_m + n128, n128))
        .map(|v| v as usize)
}

// ---- Annihilator search ----

/// All exponent vectors of length m with coordinate sum <= bound, ascending
/// lexicographic order.
fn monomials_up_to(m: usize, bound: usize) -> Vec<Exp> {
    fn rec(m: usize, bound: u32, prefix: &mut Exp, out: &mut Vec<Exp>) {
        if prefix.len() == m {
            out.push(prefix.clone());
            return;
        }
        let used: u32 = prefix.iter().sum();
        for e in 0..=(bound - used) {
            prefix.push(e);
            rec(m, bound, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(m, bound as u32, &mut Vec::new(), &mut out);
    out.sort();
    out
}

/// Looks for a nonzero Q of total degree <= `bound` with
/// Q(polys[0], ..., polys[m-1]) = 0, deepening the degree one step at a time
/// so the returned relation has minimal degree.  The kernel search at degree
/// M subsumes all lower degrees, so "none" means no relation exists up to
/// `bound`.  Every returned relation is re-expanded symbolically before it
/// is handed back.
pub fn find_annihilator(
    polys: &[MvPoly],
    bound: usize,
    budget: &AnnihilatorBudget,
) -> Result<Option<AnnihilatorRelation>> {
    let first = polys.first().ok_or_else(|| Error::domain("annihilator search on an empty family"))?;
    let ctx = first.ctx().clone();
    let nvars = first.nvars();
    for p in polys {
        ctx.check_same(p.ctx(), "annihilator family")?;
        if p.nvars() != nvars {
            return Err(Error::domain("annihilator family members have differing variable counts"));
        }
    }
    if bound == 0 {
        return Err(Error::domain("annihilator degree bound must be >= 1"));
    }
    let m = polys.len();
    let columns_at = |deg: usize| binom((deg + m) as u128, m as u128);
    if columns_at(bound) > budget.max_columns as u128 {
        return Err(Error::cap(format!(
            "annihilator system would need {} columns at degree {bound}, over the cap {}",
            columns_at(bound),
            budget.max_columns
        )));
    }

    // Expanded products polys^alpha, reused across deepening steps.  Each
    // exponent vector's predecessor (one step down in its first positive
    // coordinate) is always enumerated first.
    let mut products: std::collections::BTreeMap<Exp, MvPoly> = std::collections::BTreeMap::new();
    let one = MvPoly::constant(&ctx.one(), nvars);
    products.insert(vec![0; m], one);

    for deg in 1..=bound {
        let monos = monomials_up_to(m, deg);
        for alpha in &monos {
            if products.contains_key(alpha) {
                continue;
            }
            let i = alpha.iter().position(|&e| e > 0).expect("zero vector is pre-seeded");
            let mut prev = alpha.clone();
            prev[i] -= 1;
            let grown = &products[&prev] * &polys[i];
            products.insert(alpha.clone(), grown);
        }

        // Row index: every monomial reachable by any candidate product.
        let mut row_of: std::collections::BTreeMap<Exp, usize> = std::collections::BTreeMap::new();
        for alpha in &monos {
            for (e, _) in products[alpha].terms() {
                let next = row_of.len();
                row_of.entry(e.clone()).or_insert(next);
            }
        }
        if row_of.len() > budget.max_rows {
            return Err(Error::cap(format!(
                "annihilator system would need {} rows at degree {deg}, over the cap {}",
                row_of.len(),
                budget.max_rows
            )));
        }
        let rows = row_of.len().max(1);
        let mut matrix = MatrixGF::zero(&ctx, rows, monos.len());
        for (col, alpha) in monos.iter().enumerate() {
            for (e, c) in products[alpha].terms() {
                matrix.set_raw(row_of[e], col, c.packed());
            }
        }
        let kernel = matrix.kernel();
        if let Some(coeffs) = kernel.first() {
            let mut relation = MvPoly::zero(&ctx, m);
            for (alpha, c) in monos.iter().zip(coeffs) {
                if !c.is_zero() {
                    relation = &relation + &MvPoly::monomial(c, alpha.clone());
                }
            }
            let recomposed = relation.substitute(polys)?;
            if !recomposed.is_zero() {
                return Err(Error::Internal(
                    "kernel vector did not expand to a zero relation".into(),
                ));
            }
            let degree = relation.total_degree().ok_or_else(|| {
                Error::Internal("kernel produced a zero relation polynomial".into())
            })?;
            return Ok(Some(AnnihilatorRelation { polys: polys.to_vec(), relation, degree }));
        }
    }
    Ok(None)
}

/// Default degree bound for a part family: the product of the part degrees,
/// raised to the counting bound when more parts than variables guarantees a
/// relation by then, and lowered until the system fits the budget.
fn default_bound(degrees: &[usize], nvars: usize, budget: &AnnihilatorBudget) -> usize {
    let m = degrees.len();
    let product = degrees.iter().map(|&d| d.max(1)).fold(1usize, |a, b| a.saturating_mul(b));
    let max_deg = degrees.iter().copied().max().unwrap_or(1).max(1);
    let target = match perron_bound(m, nvars, max_deg) {
        Some(existence) => product.max(existence),
        None => product,
    };
    let mut eff = 1usize;
    while eff < target && binom((eff + 1 + m) as u128, m as u128) <= budget.max_columns as u128 {
        eff += 1;
    }
    eff
}

// ---- Family classification and niceness ----

/// Settles one family: a constant member or a Jacobian witness decides it
/// outright, otherwise the annihilator search runs up to the configured (or
/// derived) degree bound.
pub fn classify_family(polys: &[MvPoly], opts: &NicenessOptions) -> Result<FamilyReport> {
    let first = polys.first().ok_or_else(|| Error::domain("cannot classify an empty family"))?;
    let ctx = first.ctx().clone();
    let r = first.nvars();
    let m = polys.len();

    // A constant member is an immediate dependence: u_k - c kills it.
    if let Some(k) = polys.iter().position(MvPoly::is_constant) {
        let c = polys[k].coefficient(&vec![0u32; r]);
        let mut exp: Exp = vec![0; m];
        exp[k] = 1;
        let relation = &MvPoly::monomial(&ctx.one(), exp) - &MvPoly::constant(&c, m);
        debug_assert!(relation.substitute(polys)?.is_zero());
        return Ok(FamilyReport {
            status: FamilyStatus::Dependent {
                relation: AnnihilatorRelation { polys: polys.to_vec(), relation, degree: 1 },
            },
            bound_used: 0,
        });
    }

    if m <= r {
        if let Some(witness) = jacobian_independence_witness(polys)? {
            return Ok(FamilyReport { status: FamilyStatus::Independent { witness }, bound_used: 0 });
        }
    }

    let degrees: Vec<usize> = polys.iter().map(|q| q.total_degree().unwrap_or(0)).collect();
    let bound = match opts.bound_override {
        Some(b) => b,
        None => default_bound(&degrees, r, &opts.budget),
    };
    let status = match find_annihilator(polys, bound, &opts.budget)? {
        Some(relation) => FamilyStatus::Dependent { relation },
        None => FamilyStatus::Unknown { bound_searched: bound },
    };
    Ok(FamilyReport { status, bound_used: bound })
}

/// Decides whether some distinguished variable decomposes `p` into
/// algebraically independent parts.  See the module docs for the verdict
/// semantics; the default options apply.
pub fn is_nice(p: &MvPoly) -> Result<NicenessVerdict> {
    is_nice_with(p, &NicenessOptions::default())
}

pub fn is_nice_with(p: &MvPoly, opts: &NicenessOptions) -> Result<NicenessVerdict> {
    if p.nvars() < 2 {
        return Err(Error::domain("niceness is defined for polynomials in at least two variables"));
    }
    if p.is_constant() {
        return Err(Error::domain("niceness is defined for nonconstant polynomials"));
    }
    let n = p.nvars();
    let mut choices = Vec::with_capacity(n);
    let mut bound_used = 0usize;
    let mut all_dependent = true;
    for i in 0..n {
        let dec = p.decompose(i)?;
        let report = classify_family(&dec.parts, opts)?;
        bound_used = bound_used.max(report.bound_used);
        match &report.status {
            FamilyStatus::Independent { .. } => {
                choices.push(ChoiceReport { distinguished: i, outcome: report.status });
                return Ok(NicenessVerdict {
                    status: NicenessStatus::Nice,
                    distinguished: Some(i),
                    choices,
                    bound_used,
                });
            }
            FamilyStatus::Dependent { .. } => {
                choices.push(ChoiceReport { distinguished: i, outcome: report.status });
            }
            FamilyStatus::Unknown { .. } => {
                all_dependent = false;
                choices.push(ChoiceReport { distinguished: i, outcome: report.status });
            }
        }
    }
    let status = if all_dependent { NicenessStatus::NotNice } else { NicenessStatus::Inconclusive };
    Ok(NicenessVerdict { status, distinguished: None, choices, bound_used })
}

// ---- Ternary quadratic classifier ----

/// Why a ternary quadratic fails to be nice.
#[derive(Clone, Debug, Serialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum NotNiceReason {
    /// Some variable does not occur at all.
    MissingVariable { variable: usize },
    /// No mixed monomial x_i x_j: the polynomial splits into univariate pieces.
    NoCrossTerms,
    /// Q = scale * (form . x + shift)^2 + offset.
    CompletedSquare {
        scale: FieldElement,
        form: Vec<FieldElement>,
        shift: FieldElement,
        offset: FieldElement,
    },
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum QuadraticVerdict {
    Nice,
    NotNice { reason: NotNiceReason },
}

impl QuadraticVerdict {
    pub fn is_nice(&self) -> bool {
        matches!(self, QuadraticVerdict::Nice)
    }
}

/// True if all three variables of a ternary polynomial occur.
pub fn genuinely_ternary(p: &MvPoly) -> Result<bool> {
    if p.nvars() != 3 {
        return Err(Error::domain("expected a polynomial in exactly three variables"));
    }
    Ok((0..3).all(|i| p.occurs(i)))
}

/// Closed-form niceness classifier for ternary quadratics over odd fields:
/// not nice exactly when a variable is missing, there are no cross terms, or
/// the polynomial is a completed square e(L + u)^2 + v in a linear form L.
pub fn classify_quadratic(p: &MvPoly) -> Result<QuadraticVerdict> {
    let ctx = p.ctx().clone();
    if ctx.p() == 2 {
        return Err(Error::domain("the quadratic classifier requires odd q"));
    }
    if p.nvars() != 3 {
        return Err(Error::domain("expected a ternary polynomial"));
    }
    if p.total_degree() != Some(2) {
        return Err(Error::domain("expected total degree exactly 2"));
    }

    for variable in 0..3 {
        if !p.occurs(variable) {
            return Ok(QuadraticVerdict::NotNice {
                reason: NotNiceReason::MissingVariable { variable },
            });
        }
    }

    let coeff = |e: [u32; 3]| p.coefficient(&e);
    let cross = [coeff([0, 1, 1]), coeff([1, 0, 1]), coeff([1, 1, 0])];
    if cross.iter().all(FieldElement::is_zero) {
        return Ok(QuadraticVerdict::NotNice { reason: NotNiceReason::NoCrossTerms });
    }

    // Symmetric matrix of the quadratic part: S[i][i] = a_i, S[i][j]ents
    // half the x_i x_j coefficient.
    let half = ctx.from_int(2).inv().expect("odd q");
    let diag = [coeff([2, 0, 0]), coeff([0, 2, 0]), coeff([0, 0, 2])];
    let off = |i: usize, j: usize| {
        let mut e = [0u32; 3];
        e[i] += 1;
        e[j] += 1;
        &coeff(e) * &half
    };
    let mut s_rows: Vec<Vec<FieldElement>> = Vec::with_capacity(3);
    for i in 0..3 {
        let mut row = Vec::with_capacity(3);
        for j in 0..3 {
            row.push(if i == j { diag[i].clone() } else { off(i.min(j), i.max(j)) });
        }
        s_rows.push(row);
    }
    let s = MatrixGF::from_rows(&ctx, &s_rows)?;
    if s.rank() != 1 {
        return Ok(QuadraticVerdict::Nice);
    }

    // Rank one: S = e' v v^T with v a row whose diagonal entry is nonzero
    // (over odd characteristic such a row always exists).
    let j = (0..3)
        .find(|&i| !s_rows[i][i].is_zero())
        .ok_or_else(|| Error::Internal("rank-one symmetric matrix with zero diagonal".into()))?;
    let v: Vec<FieldElement> = s_rows[j].clone();
    let scale = s_rows[j][j].inv().expect("nonzero diagonal entry");
    let form = linear_form(&ctx, &v);
    if quadratic_part(p) != form.pow(2).scale(&scale) {
        return Err(Error::Internal("rank-one quadratic part is not a scaled square".into()));
    }

    // The linear part must be a multiple of the same form.
    let linear = [coeff([1, 0, 0]), coeff([0, 1, 0]), coeff([0, 0, 1])];
    let pivot = (0..3).find(|&i| !v[i].is_zero()).expect("rank-one row is nonzero");
    let t = &linear[pivot] * &v[pivot].inv().expect("pivot is nonzero");
    let proportional = (0..3).all(|i| linear[i] == &t * &v[i]);
    if !proportional {
        return Ok(QuadraticVerdict::Nice);
    }

    let two_scale_inv = (&ctx.from_int(2) * &scale).inv().expect("odd q, nonzero scale");
    let shift = &t * &two_scale_inv;
    let offset = &coeff([0, 0, 0]) - &(&scale * &(&shift * &shift));

    // Belt and braces: Q == scale*(form + shift)^2 + offset.
    let rebuilt = {
        let shifted = &form + &MvPoly::constant(&shift, 3);
        let sq = shifted.pow(2).scale(&scale);
        &sq + &MvPoly::constant(&offset, 3)
    };
    if rebuilt != *p {
        return Err(Error::Internal("completed-square reconstruction mismatch".into()));
    }
    Ok(QuadraticVerdict::NotNice {
        reason: NotNiceReason::CompletedSquare { scale, form: v, shift, offset },
    })
}

fn linear_form(ctx: &FieldCtx, v: &[FieldElement]) -> MvPoly {
    let mut acc = MvPoly::zero(ctx, 3);
    for (i, c) in v.iter().enumerate() {
        if !c.is_zero() {
            let mut e = vec![0u32; 3];
            e[i] = 1;
            acc = &acc + &MvPoly::monomial(c, e);
        }
    }
    acc
}

fn quadratic_part(p: &MvPoly) -> MvPoly {
    let ctx = p.ctx().clone();
    let mut acc = MvPoly::zero(&ctx, 3);
    for (e, c) in p.terms() {
        if e.iter().sum::<u32>() == 2 {
            acc = &acc + &MvPoly::monomial(&c, e.clone());
        }
    }
    acc
}
