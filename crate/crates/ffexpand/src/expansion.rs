//! Image sets |P(X_1, ..., X_k)|, deficiency measurement, structured sample
//! sets, and the quadratic-form construction whose image stays small.
//!
//! The scan enumerates the Cartesian product of the sets, but rewrites P as
//! a univariate polynomial in the last variable first, so each assignment of
//! the leading variables costs one coefficient evaluation and the innermost
//! set is swept by Horner steps alone.  Hits land in a shared bitset of q
//! bits; since set union is order-independent, the image is identical
//! whether the scan runs sequentially, in parallel, or stops early once all
//! q values are hit.

use std::sync::atomic::{AtomicBool, AtomicU64, AtomicUsize, Ordering};

use rand::RngExt;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gf::{FieldCtx, FieldElement, Subset};
use crate::mvpoly::MvPoly;
use crate::rng::subtask_rng;

#[derive(Clone, Copy, Debug)]
pub struct ImageOptions {
    /// Stop scanning once the image reaches size q.
    pub early_exit: bool,
    /// Partition the first variable's set across worker threads.
    pub parallel: bool,
}

impl Default for ImageOptions {
    fn default() -> Self {
        ImageOptions { early_exit: true, parallel: true }
    }
}

/// The exact image P(X_1, ..., X_k) with default options.
pub fn image_set(p: &MvPoly, sets: &[Subset]) -> Result<Subset> {
    image_set_with(p, sets, &ImageOptions::default())
}

pub fn image_set_with(p: &MvPoly, sets: &[Subset], opts: &ImageOptions) -> Result<Subset> {
    let ctx = p.ctx().clone();
    if sets.len() != p.nvars() {
        return Err(Error::domain(format!(
            "polynomial has {} variables but {} sets were given",
            p.nvars(),
            sets.len()
        )));
    }
    for s in sets {
        ctx.check_same(s.ctx(), "image set")?;
    }
    if sets.iter().any(Subset::is_empty) {
        return Ok(Subset::from_raw(&ctx, Vec::new()));
    }
    let q = ctx.q();
    let k = p.nvars();

    if k == 1 {
        let coeffs = dense_univariate(p);
        let mut hits = Bitset::new(q);
        for &x in sets[0].packed_vals() {
            hits.set(horner(&ctx, &coeffs, x));
        }
        return Ok(Subset::from_raw(&ctx, hits.values()));
    }

    // P as a polynomial in the last variable: coefficient polynomials over
    // the first k-1 variables, densely indexed by descending power.
    let max_pow = p.degree_in(k - 1).unwrap_or(0);
    let mut coeff_polys: Vec<MvPoly> = vec![MvPoly::zero(&ctx, k - 1); max_pow + 1];
    for (e, c) in p.terms() {
        let pow = e[k - 1] as usize;
        let rest = e[..k - 1].to_vec();
        let slot = max_pow - pow;
        coeff_polys[slot] = &coeff_polys[slot] + &MvPoly::monomial(&c, rest);
    }

    let last = sets[k - 1].packed_vals();
    let middle = &sets[1..k - 1];
    let shared = SharedBitset::new(q);
    let full = AtomicBool::new(false);

    let scan_first = |&x0: &u64| {
        if opts.early_exit && full.load(Ordering::Relaxed) {
            return;
        }
        let mut prefix = vec![0u64; k - 1];
        prefix[0] = x0;
        let mut odometer = vec![0usize; middle.len()];
        let mut coeff_vals = vec![0u64; coeff_polys.len()];
        loop {
            for (slot, val) in odometer.iter().enumerate() {
                prefix[slot + 1] = middle[slot].packed_vals()[*val];
            }
            for (slot, cp) in coeff_polys.iter().enumerate() {
                coeff_vals[slot] = cp.eval_raw(&prefix);
            }
            for &z in last {
                let mut acc = 0u64;
                for &c in &coeff_vals {
                    acc = ctx.add_raw(ctx.mul_raw(acc, z), c);
                }
                if shared.set(acc) && shared.count() == q as usize {
                    full.store(true, Ordering::Relaxed);
                }
            }
            if opts.early_exit && full.load(Ordering::Relaxed) {
                return;
            }
            // Advance the odometer over the middle sets.
            let mut pos = middle.len();
            loop {
                if pos == 0 {
                    return;
                }
                pos -= 1;
                odometer[pos] += 1;
                if odometer[pos] < middle[pos].len() {
                    break;
                }
                odometer[pos] = 0;
            }
        }
    };

    let first = sets[0].packed_vals();
    if opts.parallel {
        first.par_iter().for_each(scan_first);
    } else {
        first.iter().for_each(scan_first);
    }
    Ok(Subset::from_raw(&ctx, shared.values()))
}

fn dense_univariate(p: &MvPoly) -> Vec<u64> {
    let d = p.total_degree().unwrap_or(0);
    let mut coeffs = vec![0u64; d + 1];
    for (e, c) in p.terms() {
        coeffs[d - e[0] as usize] = c.packed();
    }
    coeffs
}

fn horner(ctx: &FieldCtx, coeffs: &[u64], x: u64) -> u64 {
    let mut acc = 0u64;
    for &c in coeffs {
        acc = ctx.add_raw(ctx.mul_raw(acc, x), c);
    }
    acc
}

struct Bitset {
    blocks: Vec<u64>,
    q: u64,
}

impl Bitset {
    fn new(q: u64) -> Bitset {
        Bitset { blocks: vec![0; (q as usize + 63) / 64], q }
    }

    fn set(&mut self, v: u64) {
        self.blocks[(v / 64) as usize] |= 1 << (v % 64);
    }

    fn values(&self) -> Vec<u64> {
        (0..self.q).filter(|&v| self.blocks[(v / 64) as usize] >> (v % 64) & 1 == 1).collect()
    }
}

struct SharedBitset {
    blocks: Vec<AtomicU64>,
    count: AtomicUsize,
    q: u64,
}

impl SharedBitset {
    fn new(q: u64) -> SharedBitset {
        let blocks = (0..(q as usize + 63) / 64).map(|_| AtomicU64::new(0)).collect();
        SharedBitset { blocks, count: AtomicUsize::new(0), q }
    }

    /// Returns true if the bit was newly set.
    fn set(&self, v: u64) -> bool {
        let mask = 1u64 << (v % 64);
        let prev = self.blocks[(v / 64) as usize].fetch_or(mask, Ordering::Relaxed);
        if prev & mask == 0 {
            self.count.fetch_add(1, Ordering::Relaxed);
            true
        } else {
            false
        }
    }

    fn count(&self) -> usize {
        self.count.load(Ordering::Relaxed)
    }

    fn values(&self) -> Vec<u64> {
        (0..self.q)
            .filter(|&v| self.blocks[(v / 64) as usize].load(Ordering::Relaxed) >> (v % 64) & 1 == 1)
            .collect()
    }
}

/// One expansion measurement: image size against the field, with the
/// normalized statistic w * |X_1| ... |X_k| / q^k kept as an exact reduced
/// fraction (serialized as decimal strings so no precision is lost).
#[derive(Clone, Debug, Serialize)]
pub struct ExpansionMeasurement {
    pub q: u64,
    pub nvars: usize,
    pub degree: usize,
    pub set_sizes: Vec<u64>,
    pub image_size: u64,
    pub deficiency: u64,
    pub statistic_num: String,
    pub statistic_den: String,
    pub statistic: f64,
    pub threshold_c: f64,
    pub threshold_exponent: f64,
    pub sizes_meet_threshold: bool,
}

/// Measures deficiency w = q - |P(X_1, ..., X_k)| and the normalized
/// statistic; `threshold_c` scales the size threshold C q^{(k-1)/k} that the
/// measurement flags (informational, not a verdict).
pub fn deficiency_stat(
    p: &MvPoly,
    sets: &[Subset],
    threshold_c: f64,
    opts: &ImageOptions,
) -> Result<ExpansionMeasurement> {
    let degree = p
        .total_degree()
        .filter(|&d| d > 0)
        .ok_or_else(|| Error::domain("deficiency is measured for nonconstant polynomials"))?;
    let image = image_set_with(p, sets, opts)?;
    let ctx = p.ctx();
    let q = ctx.q();
    let k = p.nvars();
    let image_size = image.len() as u64;
    let deficiency = q - image_size;

    let mut num: u128 = deficiency as u128;
    for s in sets {
        num = num
            .checked_mul(s.len() as u128)
            .ok_or_else(|| Error::cap("statistic numerator overflows 128 bits".to_string()))?;
    }
    let den = (0..k)
        .try_fold(1u128, |acc, _| acc.checked_mul(q as u128))
        .ok_or_else(|| Error::cap("statistic denominator overflows 128 bits".to_string()))?;
    let g = gcd(num, den);
    let (num, den) = (num / g, den / g);

    let threshold_exponent = (k as f64 - 1.0) / k as f64;
    let cutoff = threshold_c * (q as f64).powf(threshold_exponent);
    Ok(ExpansionMeasurement {
        q,
        nvars: k,
        degree,
        set_sizes: sets.iter().map(|s| s.len() as u64).collect(),
        image_size,
        deficiency,
        statistic_num: num.to_string(),
        statistic_den: den.to_string(),
        statistic: num as f64 / den as f64,
        threshold_c,
        threshold_exponent,
        sizes_meet_threshold: sets.iter().all(|s| s.len() as f64 >= cutoff),
    })
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a.max(1)
}

/// How [`sample_sets`] draws each set.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleMode {
    /// Every set is all of F_q.
    Full,
    /// Distinct uniform elements.
    UniformRandom,
    /// Consecutive residues from a seeded start (prime fields only).
    Interval,
}

/// Builds one subset per requested size.  Set i draws from its own RNG
/// stream (seed, i), so resizing one set never shifts another.
pub fn sample_sets(ctx: &FieldCtx, sizes: &[u64], mode: SampleMode, seed: u64) -> Result<Vec<Subset>> {
    let q = ctx.q();
    let mut out = Vec::with_capacity(sizes.len());
    for (i, &size) in sizes.iter().enumerate() {
        if size > q {
            return Err(Error::domain(format!("set size {size} exceeds q = {q}")));
        }
        let set = match mode {
            SampleMode::Full => {
                if size != q {
                    return Err(Error::domain(format!(
                        "full mode fixes every set to size q = {q}, got {size}"
                    )));
                }
                Subset::full(ctx)
            }
            SampleMode::UniformRandom => {
                let mut rng = subtask_rng(seed, i as u64);
                let mut pool: Vec<u64> = (0..q).collect();
                for slot in 0..size as usize {
                    let j = rng.random_range(slot as u64..q) as usize;
                    pool.swap(slot, j);
                }
                pool.truncate(size as usize);
                Subset::from_raw(ctx, pool)
            }
            SampleMode::Interval => {
                if ctx.k() != 1 {
                    return Err(Error::domain(
                        "interval sampling needs consecutive representatives, prime fields only",
                    ));
                }
                let mut rng = subtask_rng(seed, i as u64);
                let start = rng.random_range(0..q);
                let vals = (0..size).map(|o| (start + o) % q).collect();
                Subset::from_raw(ctx, vals)
            }
        };
        out.push(set);
    }
    Ok(out)
}

/// The diagonal quadratic form a x^2 + b y^2 + c z^2.
pub fn diagonal_form(a: &FieldElement, b: &FieldElement, c: &FieldElement) -> Result<MvPoly> {
    let ctx = a.ctx().clone();
    ctx.check_same(b.ctx(), "diagonal form")?;
    ctx.check_same(c.ctx(), "diagonal form")?;
    let q = &(&MvPoly::monomial(a, vec![2, 0, 0]) + &MvPoly::monomial(b, vec![0, 2, 0]))
        + &MvPoly::monomial(c, vec![0, 0, 2]);
    Ok(q)
}

/// Quarter-residue sets: X = {x : 1 <= rep(a x^2) <= floor(p/4)} and the
/// same for b, c — the construction keeping a x^2 + b y^2 + c z^2 from
/// expanding.  Prime fields only: rep is the integer representative in 0..p.
pub fn counterexample_sets(
    a: &FieldElement,
    b: &FieldElement,
    c: &FieldElement,
) -> Result<(Subset, Subset, Subset)> {
    let ctx = a.ctx().clone();
    ctx.check_same(b.ctx(), "counterexample coefficients")?;
    ctx.check_same(c.ctx(), "counterexample coefficients")?;
    if ctx.k() != 1 {
        return Err(Error::domain("counterexample sets need integer representatives, prime fields only"));
    }
    if ctx.p() == 2 {
        return Err(Error::domain("counterexample sets need an odd prime"));
    }
    if a.is_zero() || b.is_zero() || c.is_zero() {
        return Err(Error::domain("counterexample coefficients must be nonzero"));
    }
    let p = ctx.p();
    let bound = p / 4;
    let quarter = |coeff: &FieldElement| {
        let cv = coeff.packed();
        let vals = (0..p)
            .filter(|&x| {
                let r = ctx.mul_raw(cv, ctx.mul_raw(x, x));
                1 <= r && r <= bound
            })
            .collect();
        Subset::from_raw(&ctx, vals)
    };
    Ok((quarter(a), quarter(b), quarter(c)))
}

/// Assembles P(x, y, z) = a x^d + F(y, z) x + G(y, z) from bivariate F, G.
pub fn conc_family(a: &FieldElement, d: u32, f: &MvPoly, g: &MvPoly) -> Result<MvPoly> {
    let ctx = a.ctx().clone();
    ctx.check_same(f.ctx(), "coefficient polynomial")?;
    ctx.check_same(g.ctx(), "coefficient polynomial")?;
    if f.nvars() != 2 || g.nvars() != 2 {
        return Err(Error::domain("coefficient polynomials must be bivariate"));
    }
    if d == 0 {
        return Err(Error::domain("leading degree must be at least 1"));
    }
    let fe = f.embed(3, &[1, 2])?;
    let ge = g.embed(3, &[1, 2])?;
    let x = MvPoly::variable(&ctx, 3, 0)?;
    Ok(&(&x.pow(d).scale(a) + &(&fe * &x)) + &ge)
}
