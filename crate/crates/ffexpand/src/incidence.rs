//! Points and graph curves in F_q^2 with exact incidence counting.
//!
//! A curve of degree n is the graph y = a_n x^n + ... + a_1 x + a_0, stored
//! as its coefficient vector (a_n, ..., a_0).  Under q > n two distinct
//! vectors give distinct graphs (their difference has at most n roots), so
//! the vector is a faithful encoding and every family constructor enforces
//! q > n.  Incidence counts are exact integers end to end; the square-root
//! cancellation check [`vinh_deviation`] squares both sides of the
//! comparison so the verdict never touches floating point.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gf::{FieldCtx, FieldElement};

/// Ceiling on the number of enumerated points or curves in any one set.
pub const MAX_ENUM: u64 = 1 << 22;

/// A set of points in F_q^2, stored as sorted unique packed pairs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PointSet {
    ctx: FieldCtx,
    points: Vec<(u64, u64)>,
}

impl PointSet {
    pub fn from_elements(ctx: &FieldCtx, pairs: &[(FieldElement, FieldElement)]) -> Result<PointSet> {
        let mut raw = Vec::with_capacity(pairs.len());
        for (x, y) in pairs {
            ctx.check_same(x.ctx(), "point x coordinate")?;
            ctx.check_same(y.ctx(), "point y coordinate")?;
            raw.push((x.packed(), y.packed()));
        }
        Self::from_raw(ctx, raw)
    }

    pub(crate) fn from_raw(ctx: &FieldCtx, mut points: Vec<(u64, u64)>) -> Result<PointSet> {
        let q = ctx.q();
        if let Some(&(x, y)) = points.iter().find(|&&(x, y)| x >= q || y >= q) {
            return Err(Error::domain(format!("point ({x}, {y}) outside the field of order {q}")));
        }
        points.sort_unstable();
        points.dedup();
        if points.len() as u64 > MAX_ENUM {
            return Err(Error::cap(format!("point set larger than the cap {MAX_ENUM}")));
        }
        Ok(PointSet { ctx: ctx.clone(), points })
    }

    /// All q^2 points of the plane.
    pub fn full(ctx: &FieldCtx) -> Result<PointSet> {
        let q = ctx.q();
        if q.saturating_mul(q) > MAX_ENUM {
            return Err(Error::cap(format!("full plane has {q}^2 points, over the cap {MAX_ENUM}")));
        }
        let mut points = Vec::with_capacity((q * q) as usize);
        for x in 0..q {
            for y in 0..q {
                points.push((x, y));
            }
        }
        Ok(PointSet { ctx: ctx.clone(), points })
    }

    /// `size` distinct uniform points.  Small planes are shuffled in place;
    /// large ones are rejection-sampled, so the strategy depends only on q.
    pub fn random(ctx: &FieldCtx, size: u64, rng: &mut impl rand::RngExt) -> Result<PointSet> {
        let q = ctx.q();
        let total = q.saturating_mul(q);
        if size > total {
            return Err(Error::domain(format!("requested {size} points but the plane has {total}")));
        }
        if size > MAX_ENUM {
            return Err(Error::cap(format!("point set larger than the cap {MAX_ENUM}")));
        }
        let points = if total <= MAX_ENUM {
            sample_indices(total, size, rng).into_iter().map(|i| (i / q, i % q)).collect()
        } else {
            let mut seen = std::collections::BTreeSet::new();
            while (seen.len() as u64) < size {
                seen.insert((rng.random_range(0..q), rng.random_range(0..q)));
            }
            seen.into_iter().collect()
        };
        Self::from_raw(ctx, points)
    }

    /// The q points (x, f(x)) of one curve's graph.
    pub fn graph_of(curve: &Curve) -> PointSet {
        let ctx = curve.ctx.clone();
        let points = (0..ctx.q()).map(|x| (x, eval_curve(&ctx, &curve.coeffs, x))).collect();
        PointSet { ctx, points }
    }

    pub fn ctx(&self) -> &FieldCtx {
        &self.ctx
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn contains(&self, x: &FieldElement, y: &FieldElement) -> bool {
        self.points.binary_search(&(x.packed(), y.packed())).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = (FieldElement, FieldElement)> + '_ {
        self.points
            .iter()
            .map(|&(x, y)| (self.ctx.element_raw(x), self.ctx.element_raw(y)))
    }

    pub(crate) fn raw_points(&self) -> &[(u64, u64)] {
        &self.points
    }

    pub fn to_json(&self) -> serde_json::Value {
        let pairs: Vec<serde_json::Value> = self
            .iter()
            .map(|(x, y)| serde_json::json!([x, y]))
            .collect();
        serde_json::json!({ "points": pairs })
    }

    pub fn from_json(ctx: &FieldCtx, value: &serde_json::Value) -> Result<PointSet> {
        let pairs = value
            .get("points")
            .and_then(serde_json::Value::as_array)
            .ok_or_else(|| Error::domain("point set JSON must have a \"points\" array"))?;
        let mut raw = Vec::with_capacity(pairs.len());
        for pair in pairs {
            let xy = pair
                .as_array()
                .filter(|a| a.len() == 2)
                .ok_or_else(|| Error::domain("each point must be a two-element array"))?;
            let x = crate::gf::element_from_json(ctx, &xy[0])?;
            let y = crate::gf::element_from_json(ctx, &xy[1])?;
            raw.push((x.packed(), y.packed()));
        }
        Self::from_raw(ctx, raw)
    }
}

/// One curve y = a_n x^n + ... + a_0, coefficients highest degree first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Curve {
    ctx: FieldCtx,
    coeffs: Vec<u64>,
}

impl Curve {
    pub fn from_elements(ctx: &FieldCtx, coeffs: &[FieldElement]) -> Result<Curve> {
        let mut raw = Vec::with_capacity(coeffs.len());
        for c in coeffs {
            ctx.check_same(c.ctx(), "curve coefficient")?;
            raw.push(c.packed());
        }
        Self::from_raw(ctx, raw)
    }

    pub(crate) fn from_raw(ctx: &FieldCtx, coeffs: Vec<u64>) -> Result<Curve> {
        if coeffs.is_empty() {
            return Err(Error::domain("a curve needs at least a constant coefficient"));
        }
        let degree = coeffs.len() - 1;
        if ctx.q() <= degree as u64 {
            return Err(Error::domain(format!(
                "curve degree {degree} needs q > {degree}, got q = {}",
                ctx.q()
            )));
        }
        if let Some(&c) = coeffs.iter().find(|&&c| c >= ctx.q()) {
            return Err(Error::domain(format!("coefficient {c} outside the field")));
        }
        Ok(Curve { ctx: ctx.clone(), coeffs })
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval(&self, x: &FieldElement) -> FieldElement {
        self.ctx.element_raw(eval_curve(&self.ctx, &self.coeffs, x.packed()))
    }
}

/// A family of same-degree curves: sorted unique coefficient vectors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CurveFamily {
    ctx: FieldCtx,
    degree: usize,
    curves: Vec<Vec<u64>>,
}

impl CurveFamily {
    pub fn from_elements(ctx: &FieldCtx, degree: usize, vectors: &[Vec<FieldElement>]) -> Result<CurveFamily> {
        let mut raw = Vec::with_capacity(vectors.len());
        for v in vectors {
            let mut row = Vec::with_capacity(v.len());
            for c in v {
                ctx.check_same(c.ctx(), "curve coefficient")?;
                row.push(c.packed());
            }
            raw.push(row);
        }
        Self::from_raw(ctx, degree, raw)
    }

    pub(crate) fn from_raw(ctx: &FieldCtx, degree: usize, mut curves: Vec<Vec<u64>>) -> Result<CurveFamily> {
        check_degree(ctx, degree)?;
        let q = ctx.q();
        for v in &curves {
            if v.len() != degree + 1 {
                return Err(Error::domain(format!(
                    "degree-{degree} curve needs {} coefficients, got {}",
                    degree + 1,
                    v.len()
                )));
            }
            if let Some(&c) = v.iter().find(|&&c| c >= q) {
                return Err(Error::domain(format!("coefficient {c} outside the field")));
            }
        }
        curves.sort_unstable();
        curves.dedup();
        if curves.len() as u64 > MAX_ENUM {
            return Err(Error::cap(format!("curve family larger than the cap {MAX_ENUM}")));
        }
        Ok(CurveFamily { ctx: ctx.clone(), degree, curves })
    }

    /// All q^{n+1} coefficient vectors of degree at most n.
    pub fn full(ctx: &FieldCtx, degree: usize) -> Result<CurveFamily> {
        check_degree(ctx, degree)?;
        let q = ctx.q();
        let total = q
            .checked_pow(degree as u32 + 1)
            .filter(|&t| t <= MAX_ENUM)
            .ok_or_else(|| {
                Error::cap(format!("full degree-{degree} family has q^{} curves, over the cap {MAX_ENUM}", degree + 1))
            })?;
        let curves = (0..total).map(|i| index_to_vector(i, q, degree + 1)).collect();
        Ok(CurveFamily { ctx: ctx.clone(), degree, curves })
    }

    /// `size` distinct uniform coefficient vectors.
    pub fn random(ctx: &FieldCtx, degree: usize, size: u64, rng: &mut impl rand::RngExt) -> Result<CurveFamily> {
        check_degree(ctx, degree)?;
        let q = ctx.q();
        let total = (0..=degree as u32).try_fold(1u64, |acc, _| acc.checked_mul(q));
        if let Some(total) = total {
            if size > total {
                return Err(Error::domain(format!(
                    "requested {size} curves but only {total} exist at degree {degree}"
                )));
            }
        }
        if size > MAX_ENUM {
            return Err(Error::cap(format!("curve family larger than the cap {MAX_ENUM}")));
        }
        let curves: Vec<Vec<u64>> = match total.filter(|&t| t <= MAX_ENUM) {
            Some(t) => sample_indices(t, size, rng)
                .into_iter()
                .map(|i| index_to_vector(i, q, degree + 1))
                .collect(),
            None => {
                let mut seen = std::collections::BTreeSet::new();
                while (seen.len() as u64) < size {
                    let v: Vec<u64> = (0..=degree).map(|_| rng.random_range(0..q)).collect();
                    seen.insert(v);
                }
                seen.into_iter().collect()
            }
        };
        let mut curves = curves;
        curves.sort_unstable();
        Ok(CurveFamily { ctx: ctx.clone(), degree, curves })
    }

    /// All q^n curves of degree n through one fixed point: free choice of
    /// (a_n, ..., a_1), constant pinned to y - sum a_i x^i.
    pub fn through_point(ctx: &FieldCtx, degree: usize, x: &FieldElement, y: &FieldElement) -> Result<CurveFamily> {
        check_degree(ctx, degree)?;
        ctx.check_same(x.ctx(), "pivot point")?;
        ctx.check_same(y.ctx(), "pivot point")?;
        let q = ctx.q();
        let total = q
            .checked_pow(degree as u32)
            .filter(|&t| t <= MAX_ENUM)
            .ok_or_else(|| Error::cap(format!("q^{degree} curves through a point, over the cap {MAX_ENUM}")))?;
        let (xr, yr) = (x.packed(), y.packed());
        let mut curves = Vec::with_capacity(total as usize);
        for i in 0..total {
            let mut v = index_to_vector(i, q, degree);
            let partial = eval_curve(ctx, &v, xr);
            let a0 = ctx.sub_raw(yr, ctx.mul_raw(partial, xr));
            v.push(a0);
            curves.push(v);
        }
        curves.sort_unstable();
        Ok(CurveFamily { ctx: ctx.clone(), degree, curves })
    }

    pub fn ctx(&self) -> &FieldCtx {
        &self.ctx
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.curves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.curves.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = Curve> + '_ {
        self.curves.iter().map(|v| Curve { ctx: self.ctx.clone(), coeffs: v.clone() })
    }

    pub fn to_json(&self) -> serde_json::Value {
        let rows: Vec<serde_json::Value> = self
            .curves
            .iter()
            .map(|v| {
                let coeffs: Vec<serde_json::Value> = v
                    .iter()
                    .map(|&c| serde_json::to_value(self.ctx.element_raw(c)).expect("element JSON"))
                    .collect();
                serde_json::Value::Array(coeffs)
            })
            .collect();
        serde_json::json!({ "degree": self.degree, "curves": rows })
    }

    pub fn from_json(ctx: &FieldCtx, value: &serde_json::Value) -> Result<CurveFamily> {
        let degree = value
            .get("degree")
            .and_then(serde_json::Value::as_u64)
            .ok_or_else(|| Error::domain("curve family JSON must have a \"degree\" number"))?
            as usize;
        let rows = value
            .get("curves")
            .and_then(serde_json::Value::as_array)
            .ok_or_else(|| Error::domain("curve family JSON must have a \"curves\" array"))?;
        let mut raw = Vec::with_capacity(rows.len());
        for row in rows {
            let coeffs = row
                .as_array()
                .ok_or_else(|| Error::domain("each curve must be an array of coefficients"))?;
            let mut v = Vec::with_capacity(coeffs.len());
            for c in coeffs {
                v.push(crate::gf::element_from_json(ctx, c)?.packed());
            }
            raw.push(v);
        }
        Self::from_raw(ctx, degree, raw)
    }
}

fn check_degree(ctx: &FieldCtx, degree: usize) -> Result<()> {
    if degree == 0 {
        return Err(Error::domain("curve degree must be at least 1"));
    }
    if ctx.q() <= degree as u64 {
        return Err(Error::domain(format!(
            "curve degree {degree} needs q > {degree}, got q = {}",
            ctx.q()
        )));
    }
    Ok(())
}

fn index_to_vector(mut i: u64, q: u64, len: usize) -> Vec<u64> {
    let mut v = vec![0u64; len];
    for slot in v.iter_mut().rev() {
        *slot = i % q;
        i /= q;
    }
    v
}

/// `size` distinct values from 0..total by partial Fisher-Yates, ascending.
fn sample_indices(total: u64, size: u64, rng: &mut impl rand::RngExt) -> Vec<u64> {
    let mut pool: Vec<u64> = (0..total).collect();
    let size = size as usize;
    for i in 0..size.min(pool.len()) {
        let j = rng.random_range(i as u64..total) as usize;
        pool.swap(i, j);
    }
    let mut picked = pool[..size].to_vec();
    picked.sort_unstable();
    picked
}

fn eval_curve(ctx: &FieldCtx, coeffs: &[u64], x: u64) -> u64 {
    let mut acc = 0u64;
    for &c in coeffs {
        acc = ctx.add_raw(ctx.mul_raw(acc, x), c);
    }
    acc
}

/// Exact number of pairs (point, curve) with the point on the curve's graph.
/// Points sharing an abscissa are bucketed so each curve is evaluated once
/// per distinct x; buckets are summed in parallel, and the total is an exact
/// integer regardless of scheduling.
pub fn count_incidences(points: &PointSet, curves: &CurveFamily) -> Result<u64> {
    points.ctx.check_same(&curves.ctx, "incidence count")?;
    let ctx = &points.ctx;
    let mut buckets: Vec<(u64, &[(u64, u64)])> = Vec::new();
    let raw = points.raw_points();
    let mut start = 0;
    while start < raw.len() {
        let x = raw[start].0;
        let mut end = start;
        while end < raw.len() && raw[end].0 == x {
            end += 1;
        }
        buckets.push((x, &raw[start..end]));
        start = end;
    }
    let total = buckets
        .par_iter()
        .map(|&(x, bucket)| {
            let mut hits = 0u64;
            for curve in &curves.curves {
                let y = eval_curve(ctx, curve, x);
                if bucket.binary_search(&(x, y)).is_ok() {
                    hits += 1;
                }
            }
            hits
        })
        .sum();
    Ok(total)
}

/// Plain double loop over points and curves; the independent recount used to
/// cross-check the bucketed counter.
pub fn count_incidences_naive(points: &PointSet, curves: &CurveFamily) -> Result<u64> {
    points.ctx.check_same(&curves.ctx, "incidence count")?;
    let ctx = &points.ctx;
    let mut total = 0u64;
    for &(x, y) in points.raw_points() {
        for curve in &curves.curves {
            if eval_curve(ctx, curve, x) == y {
                total += 1;
            }
        }
    }
    Ok(total)
}

/// Outcome of the square-root cancellation check: the incidence count I is
/// compared against |P||Q|/q with allowance q^{n/2} sqrt(|P||Q|), decided by
/// the equivalent integer comparison (qI - |P||Q|)^2 <= q^{n+2} |P||Q|.
#[derive(Clone, Debug, Serialize)]
pub struct VinhCheck {
    pub q: u64,
    pub degree: usize,
    pub points: u64,
    pub curves: u64,
    pub incidences: u64,
    /// |q*I - |P||Q||: the deviation |I - |P||Q|/q| times q, exact.
    pub deviation_num: u64,
    pub deviation_den: u64,
    pub deviation: f64,
    pub bound: f64,
    pub satisfied: bool,
}

pub fn vinh_deviation(points: &PointSet, curves: &CurveFamily) -> Result<VinhCheck> {
    let incidences = count_incidences(points, curves)?;
    let q = points.ctx.q();
    let n = curves.degree;
    let p_size = points.len() as u64;
    let q_size = curves.len() as u64;
    let main = (p_size as u128) * (q_size as u128);
    let scaled = (q as u128) * (incidences as u128);
    let dev = scaled.abs_diff(main);
    let dev_sq = dev
        .checked_mul(dev)
        .ok_or_else(|| Error::cap("deviation square overflows 128 bits".to_string()))?;
    let q_pow = (0..n as u32 + 2)
        .try_fold(1u128, |acc, _| acc.checked_mul(q as u128))
        .ok_or_else(|| Error::cap("q^(n+2) overflows 128 bits".to_string()))?;
    let rhs = q_pow
        .checked_mul(main)
        .ok_or_else(|| Error::cap("bound comparison overflows 128 bits".to_string()))?;
    let deviation_num = u64::try_from(dev)
        .map_err(|_| Error::cap("deviation exceeds 64 bits".to_string()))?;
    Ok(VinhCheck {
        q,
        degree: n,
        points: p_size,
        curves: q_size,
        incidences,
        deviation_num,
        deviation_den: q,
        deviation: deviation_num as f64 / q as f64,
        bound: (q as f64).powf(n as f64 / 2.0) * (main as f64).sqrt(),
        satisfied: dev_sq <= rhs,
    })
}

/// The bijection (x, y) -> (x, y - a_n x^n - ... - a_2 x^2) applied to every
/// point; `high` lists (a_n, ..., a_2).  An empty slice is the identity.
pub fn shear(points: &PointSet, high: &[FieldElement]) -> Result<PointSet> {
    let ctx = points.ctx.clone();
    let mut raw = Vec::with_capacity(high.len());
    for c in high {
        ctx.check_same(c.ctx(), "shear coefficient")?;
        raw.push(c.packed());
    }
    let sheared = points
        .raw_points()
        .iter()
        .map(|&(x, y)| {
            let tail = eval_curve(&ctx, &raw, x);
            let shift = ctx.mul_raw(tail, ctx.mul_raw(x, x));
            (x, ctx.sub_raw(y, shift))
        })
        .collect();
    PointSet::from_raw(&ctx, sheared)
}

/// The companion move on a degree-n family: subtract (a_n, ..., a_2) from
/// every curve's high coefficients, so graphs track the sheared points.
pub fn shear_family(curves: &CurveFamily, high: &[FieldElement]) -> Result<CurveFamily> {
    let ctx = curves.ctx.clone();
    if high.len() + 1 != curves.degree {
        return Err(Error::domain(format!(
            "degree-{} family needs {} high coefficients, got {}",
            curves.degree,
            curves.degree - 1,
            high.len()
        )));
    }
    let mut raw = Vec::with_capacity(high.len());
    for c in high {
        ctx.check_same(c.ctx(), "shear coefficient")?;
        raw.push(c.packed());
    }
    let moved = curves
        .curves
        .iter()
        .map(|v| {
            let mut w = v.clone();
            for (slot, &a) in w.iter_mut().zip(&raw) {
                *slot = ctx.sub_raw(*slot, a);
            }
            w
        })
        .collect();
    CurveFamily::from_raw(&ctx, curves.degree, moved)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded_rng;
    use rand::RngExt;

    fn f(spec: &str) -> FieldCtx {
        FieldCtx::parse_spec(spec).unwrap()
    }

    #[test]
    fn full_grid_against_full_quadratics() {
        let ctx = f("5");
        let points = PointSet::full(&ctx).unwrap();
        let curves = CurveFamily::full(&ctx, 2).unwrap();
        assert_eq!(points.len(), 25);
        assert_eq!(curves.len(), 125);
        assert_eq!(count_incidences(&points, &curves).unwrap(), 625);
    }

    #[test]
    fn singleton_point_on_the_diagonal_line() {
        let ctx = f("5");
        let zero = ctx.zero();
        let points = PointSet::from_elements(&ctx, &[(zero.clone(), zero)]).unwrap();
        let curves =
            CurveFamily::from_elements(&ctx, 1, &[vec![ctx.one(), ctx.zero()]]).unwrap();
        assert_eq!(count_incidences(&points, &curves).unwrap(), 1);
    }

    #[test]
    fn bucketed_count_matches_naive_on_random_instances() {
        for spec in ["7", "3^2", "13"] {
            let ctx = f(spec);
            let mut rng = seeded_rng(11);
            for n in 1..=3usize {
                for _ in 0..20 {
                    let points = PointSet::random(&ctx, 10, &mut rng).unwrap();
                    let curves = CurveFamily::random(&ctx, n, 10, &mut rng).unwrap();
                    assert_eq!(
                        count_incidences(&points, &curves).unwrap(),
                        count_incidences_naive(&points, &curves).unwrap()
                    );
                }
            }
        }
    }

    #[test]
    fn every_curve_graph_has_exactly_q_points() {
        for spec in ["2", "3", "2^2", "5", "7", "2^3", "3^2"] {
            let ctx = f(spec);
            let q = ctx.q();
            let points = PointSet::full(&ctx).unwrap();
            for n in 1..=3usize {
                if q <= n as u64 {
                    continue;
                }
                let family = CurveFamily::full(&ctx, n).unwrap();
                for curve in family.iter() {
                    let single =
                        CurveFamily::from_raw(&ctx, n, vec![curve.coeffs.clone()]).unwrap();
                    assert_eq!(count_incidences(&points, &single).unwrap(), q);
                }
            }
        }
    }

    #[test]
    fn graph_of_matches_pointwise_evaluation() {
        let ctx = f("7");
        let curve = Curve::from_elements(
            &ctx,
            &[ctx.from_int(2), ctx.from_int(0), ctx.from_int(3)],
        )
        .unwrap();
        let graph = PointSet::graph_of(&curve);
        assert_eq!(graph.len(), 7);
        for (x, y) in graph.iter() {
            assert_eq!(curve.eval(&x), y);
        }
    }

    #[test]
    fn full_sets_have_zero_deviation() {
        let ctx = f("5");
        let points = PointSet::full(&ctx).unwrap();
        let curves = CurveFamily::full(&ctx, 2).unwrap();
        let check = vinh_deviation(&points, &curves).unwrap();
        assert_eq!(check.deviation_num, 0);
        assert!(check.satisfied);
    }

    #[test]
    fn random_line_instances_satisfy_the_bound() {
        for q in [7u64, 11] {
            let ctx = f(&q.to_string());
            let mut rng = seeded_rng(q);
            for _ in 0..100 {
                let points = PointSet::random(&ctx, q, &mut rng).unwrap();
                let lines = CurveFamily::random(&ctx, 1, q, &mut rng).unwrap();
                assert!(vinh_deviation(&points, &lines).unwrap().satisfied);
            }
        }
    }

    #[test]
    fn extension_field_quadratic_instances_satisfy_the_bound() {
        let ctx = f("3^2");
        let mut rng = seeded_rng(9);
        for _ in 0..100 {
            let points = PointSet::random(&ctx, 20, &mut rng).unwrap();
            let curves = CurveFamily::random(&ctx, 2, 20, &mut rng).unwrap();
            assert!(vinh_deviation(&points, &curves).unwrap().satisfied);
        }
    }

    #[test]
    fn adversarial_structured_instances_satisfy_the_bound() {
        for spec in ["5", "7", "3^2", "11", "13"] {
            let ctx = f(spec);
            let mut rng = seeded_rng(17);
            for n in 1..=3usize {
                let curve = CurveFamily::random(&ctx, n, 1, &mut rng).unwrap().iter().next().unwrap();
                let on_curve = PointSet::graph_of(&curve);
                let family = CurveFamily::random(&ctx, n, ctx.q(), &mut rng).unwrap();
                assert!(vinh_deviation(&on_curve, &family).unwrap().satisfied);

                let x = ctx.from_packed(1).unwrap();
                let y = ctx.from_packed(2 % ctx.q()).unwrap();
                let through = CurveFamily::through_point(&ctx, n, &x, &y).unwrap();
                let points = PointSet::random(&ctx, ctx.q(), &mut rng).unwrap();
                assert!(vinh_deviation(&points, &through).unwrap().satisfied);
            }
        }
    }

    #[test]
    fn through_point_family_hits_its_pivot() {
        let ctx = f("7");
        let x = ctx.from_int(3);
        let y = ctx.from_int(5);
        let family = CurveFamily::through_point(&ctx, 2, &x, &y).unwrap();
        assert_eq!(family.len(), 49);
        for curve in family.iter() {
            assert_eq!(curve.eval(&x), y);
        }
    }

    #[test]
    fn shear_identity_and_inverse() {
        let ctx = f("11");
        let mut rng = seeded_rng(23);
        let points = PointSet::random(&ctx, 30, &mut rng).unwrap();
        assert_eq!(shear(&points, &[]).unwrap(), points);
        let a = [ctx.from_int(4), ctx.from_int(9)];
        let neg: Vec<_> = a.iter().map(|c| -c).collect();
        let there = shear(&points, &a).unwrap();
        assert_eq!(there.len(), points.len());
        assert_eq!(shear(&there, &neg).unwrap(), points);
    }

    #[test]
    fn shear_preserves_incidences_with_the_matching_family_move() {
        let ctx = f("13");
        let mut rng = seeded_rng(29);
        for _ in 0..20 {
            let points = PointSet::random(&ctx, 25, &mut rng).unwrap();
            let curves = CurveFamily::random(&ctx, 3, 25, &mut rng).unwrap();
            let a = [
                ctx.from_packed(rng.random_range(0..13)).unwrap(),
                ctx.from_packed(rng.random_range(0..13)).unwrap(),
            ];
            let moved_points = shear(&points, &a).unwrap();
            let moved_curves = shear_family(&curves, &a).unwrap();
            let before = count_incidences(&points, &curves).unwrap();
            let after = count_incidences(&moved_points, &moved_curves).unwrap();
            assert_eq!(before, after);
            let dev_before = vinh_deviation(&points, &curves).unwrap();
            let dev_after = vinh_deviation(&moved_points, &moved_curves).unwrap();
            assert_eq!(dev_before.deviation_num, dev_after.deviation_num);
        }
    }

    #[test]
    fn degree_must_stay_below_q() {
        let ctx = f("7");
        assert!(CurveFamily::full(&ctx, 7).is_err());
        assert!(CurveFamily::full(&ctx, 1).is_ok());
        assert!(Curve::from_raw(&ctx, vec![1; 8]).is_err());
    }

    #[test]
    fn context_mismatch_is_rejected() {
        let a = f("5");
        let b = f("7");
        let points = PointSet::full(&a).unwrap();
        let curves = CurveFamily::full(&b, 1).unwrap();
        assert!(count_incidences(&points, &curves).is_err());
    }

    #[test]
    fn point_and_family_json_round_trips() {
        for spec in ["7", "3^2"] {
            let ctx = f(spec);
            let mut rng = seeded_rng(31);
            let points = PointSet::random(&ctx, 12, &mut rng).unwrap();
            let back = PointSet::from_json(&ctx, &points.to_json()).unwrap();
            assert_eq!(points, back);
            let curves = CurveFamily::random(&ctx, 2, 9, &mut rng).unwrap();
            let back = CurveFamily::from_json(&ctx, &curves.to_json()).unwrap();
            assert_eq!(curves, back);
        }
    }

    #[test]
    fn random_sets_are_deterministic_per_seed() {
        let ctx = f("11");
        let one = PointSet::random(&ctx, 40, &mut seeded_rng(5)).unwrap();
        let two = PointSet::random(&ctx, 40, &mut seeded_rng(5)).unwrap();
        let three = PointSet::random(&ctx, 40, &mut seeded_rng(6)).unwrap();
        assert_eq!(one, two);
        assert_ne!(one, three);
    }
}
