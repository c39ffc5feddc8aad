//! The eight acceptance criteria, one test each.  Every test prints a single
//! summary line, "ACCEPTANCE <n> <label>: PASS" or ": FAIL", before
//! asserting, so a full run (use --nocapture) shows the whole scoreboard.

use std::time::Instant;

use ffexpand::expansion::{self, ImageOptions, SampleMode};
use ffexpand::gf::FieldCtx;
use ffexpand::incidence::{self, CurveFamily, PointSet};
use ffexpand::mvpoly::MvPoly;
use ffexpand::report::{self, strip_wall_time};
use ffexpand::rng::{seeded_rng, subtask_rng};
use ffexpand::structure::{self, AnnihilatorBudget, NicenessOptions, NicenessStatus};
use rand::RngExt;

fn verdict(n: usize, label: &str, ok: bool) {
    println!("ACCEPTANCE {n} {label}: {}", if ok { "PASS" } else { "FAIL" });
}

const FIELD_GRID: [&str; 7] = ["5", "7", "3^2", "11", "13", "5^2", "3^3"];

/// Runs the seeded random + adversarial incidence harness for the given
/// curve degrees and returns (instances, satisfied, failure notes).
fn incidence_harness(degrees: &[usize]) -> (u64, u64, Vec<String>) {
    let mut instances = 0u64;
    let mut satisfied = 0u64;
    let mut failures = Vec::new();
    let note = |q: u64, n: usize, what: &str, check: &incidence::VinhCheck| {
        format!(
            "q={q} n={n} {what}: |P|={} |Q|={} I={} deviation={} bound={}",
            check.points, check.curves, check.incidences, check.deviation, check.bound
        )
    };

    for (qi, spec) in FIELD_GRID.iter().enumerate() {
        let ctx = FieldCtx::parse_spec(spec).unwrap();
        let q = ctx.q();
        for &n in degrees {
            if (n as u64) >= q {
                continue;
            }
            let master = (qi as u64) * 31 + n as u64;
            let plane = q * q;
            let curve_space = (q as u128).pow(n as u32 + 1);
            let point_pool: Vec<u64> =
                vec![1, q / 2, q, plane, (2 * plane).min(plane)].into_iter().map(|s| s.max(1)).collect();
            let curve_pool: Vec<u64> = vec![
                1,
                q / 2,
                q,
                (plane as u128).min(curve_space) as u64,
                (2 * plane as u128).min(curve_space) as u64,
            ]
            .into_iter()
            .map(|s| s.max(1))
            .collect();

            for t in 0..200u64 {
                let mut rng = subtask_rng(master, t);
                let psize = point_pool[rng.random_range(0..point_pool.len())];
                let csize = curve_pool[rng.random_range(0..curve_pool.len())];
                let points = PointSet::random(&ctx, psize, &mut rng).unwrap();
                let curves = CurveFamily::random(&ctx, n, csize, &mut rng).unwrap();
                let check = incidence::vinh_deviation(&points, &curves).unwrap();
                instances += 1;
                if check.satisfied {
                    satisfied += 1;
                } else {
                    failures.push(note(q, n, "random", &check));
                }
            }

            let mut rng = subtask_rng(master, 1 << 32);
            let host = CurveFamily::random(&ctx, n, 1, &mut rng).unwrap();
            let graph = PointSet::graph_of(&host.iter().next().unwrap());
            let curves =
                CurveFamily::random(&ctx, n, *curve_pool.last().unwrap(), &mut rng).unwrap();
            let apex_x = ctx.from_packed(rng.random_range(0..q)).unwrap();
            let apex_y = ctx.from_packed(rng.random_range(0..q)).unwrap();
            let pencil = CurveFamily::through_point(&ctx, n, &apex_x, &apex_y).unwrap();
            let some_points = PointSet::random(&ctx, q, &mut rng).unwrap();
            let one_point = PointSet::random(&ctx, 1, &mut rng).unwrap();
            let one_curve = CurveFamily::random(&ctx, n, 1, &mut rng).unwrap();
            let adversarial = [
                ("points-on-one-curve", graph, curves),
                ("curves-through-one-point", some_points, pencil),
                ("full-sets", PointSet::full(&ctx).unwrap(), CurveFamily::full(&ctx, n).unwrap()),
                ("singletons", one_point, one_curve),
            ];
            for (what, p, c) in adversarial {
                let check = incidence::vinh_deviation(&p, &c).unwrap();
                instances += 1;
                if check.satisfied {
                    satisfied += 1;
                } else {
                    failures.push(note(q, n, what, &check));
                }
            }
        }
    }
    (instances, satisfied, failures)
}

#[test]
fn acceptance_1_incidence_bound() {
    let started = Instant::now();
    let (instances, satisfied, failures) = incidence_harness(&[1, 2, 3]);
    let ok = instances == satisfied && failures.is_empty();
    verdict(1, "incidence bound over the (q, n) grid", ok);
    println!(
        "  {satisfied}/{instances} instances satisfied in {:.1}s",
        started.elapsed().as_secs_f64()
    );
    assert!(ok, "violations: {failures:?}");
}

#[test]
fn acceptance_2_line_case() {
    let (instances, satisfied, mut failures) = incidence_harness(&[1]);
    let mut full_dev_zero = true;
    for spec in FIELD_GRID {
        let ctx = FieldCtx::parse_spec(spec).unwrap();
        let points = PointSet::full(&ctx).unwrap();
        let lines = CurveFamily::full(&ctx, 1).unwrap();
        let check = incidence::vinh_deviation(&points, &lines).unwrap();
        if check.deviation_num != 0 {
            full_dev_zero = false;
            failures.push(format!("full sets over {spec}: deviation {}", check.deviation_num));
        }
    }
    let ok = instances == satisfied && full_dev_zero;
    verdict(2, "line-case bound and exact full-set deviation", ok);
    assert!(ok, "line case: {satisfied}/{instances} satisfied, full deviation zero: {full_dev_zero}, {failures:?}");
}

#[test]
fn acceptance_3_quadratic_classification() {
    let started = Instant::now();
    let ctx3 = FieldCtx::parse_spec("3").unwrap();
    let scan = report::run_classify_exhaustive(&ctx3).unwrap();
    let exhaustive_ok =
        scan.agreement && scan.quadratics == 19656 && scan.search_inconclusive == 0;

    let exps: [[u32; 3]; 9] = [
        [2, 0, 0],
        [0, 2, 0],
        [0, 0, 2],
        [0, 1, 1],
        [1, 0, 1],
        [1, 1, 0],
        [1, 0, 0],
        [0, 1, 0],
        [0, 0, 1],
    ];
    let mut random_ok = true;
    let mut details = Vec::new();
    for spec in ["5", "7"] {
        let ctx = FieldCtx::parse_spec(spec).unwrap();
        let q = ctx.q();
        let mut rng = seeded_rng(3);
        let mut seen = 0u64;
        while seen < 10_000 {
            let mut poly = MvPoly::zero(&ctx, 3);
            for e in exps {
                let c = rng.random_range(0..q) as i64;
                if c != 0 {
                    poly = &poly + &MvPoly::monomial(&ctx.from_int(c), e.to_vec());
                }
            }
            if poly.total_degree() != Some(2) {
                continue;
            }
            seen += 1;
            let class = structure::classify_quadratic(&poly).unwrap();
            let search = structure::is_nice(&poly).unwrap();
            let agree = match search.status {
                NicenessStatus::Nice => class.is_nice(),
                NicenessStatus::NotNice => !class.is_nice(),
                NicenessStatus::Inconclusive => false,
            };
            if !agree {
                random_ok = false;
                if details.len() < 5 {
                    details.push(format!("q={q}: {poly} classifier/search disagree"));
                }
            }
        }
    }
    let ok = exhaustive_ok && random_ok;
    verdict(3, "classifier agrees with the search on quadratics", ok);
    println!(
        "  exhaustive {} quadratics ({} nice, {} not nice) + 2x10^4 random in {:.1}s",
        scan.quadratics,
        scan.nice,
        scan.not_nice,
        started.elapsed().as_secs_f64()
    );
    assert!(ok, "exhaustive: {exhaustive_ok}, random: {details:?}");
}

#[test]
fn acceptance_4_counterexample_ceiling() {
    let started = Instant::now();
    let frozen: [(u64, [i64; 3], [u64; 3], u64); 6] = [
        (101, [1, 1, 1], [32, 32, 32], 71),
        (101, [1, 2, 3], [32, 18, 18], 57),
        (229, [1, 1, 1], [62, 62, 62], 168),
        (229, [1, 2, 3], [62, 52, 62], 164),
        (1009, [1, 1, 1], [262, 262, 262], 754),
        (1009, [1, 2, 3], [262, 262, 262], 754),
    ];
    let mut ok = true;
    let mut details = Vec::new();
    for (p, coeffs, sizes, image) in frozen {
        let ctx = FieldCtx::parse_spec(&p.to_string()).unwrap();
        let payload = report::run_counterexample(&ctx, &coeffs).unwrap();
        let pass = payload.within_ceiling
            && payload.sizes_in_window
            && payload.set_sizes == sizes
            && payload.image_size == image;
        if !pass {
            ok = false;
            details.push(format!(
                "p={p} coeffs={coeffs:?}: sizes {:?} (expected {sizes:?}), image {} (expected {image}), ceiling ok {}, window ok {}",
                payload.set_sizes, payload.image_size, payload.within_ceiling, payload.sizes_in_window
            ));
        }
    }
    verdict(4, "quadratic image stays under 3p/4 on structured sets", ok);
    println!("  6 (p, coeffs) cases in {:.1}s", started.elapsed().as_secs_f64());
    assert!(ok, "{details:?}");
}

fn odd_primes(lo: u64, hi: u64) -> Vec<u64> {
    (lo..=hi).filter(|&n| n % 2 == 1 && (2..n).take_while(|d| d * d <= n).all(|d| n % d != 0)).collect()
}

#[test]
fn acceptance_5_full_set_expansion() {
    let frozen_t = 0u64;
    let mut ok = true;
    let mut details = Vec::new();
    for p in odd_primes(11, 199) {
        let ctx = FieldCtx::parse_spec(&p.to_string()).unwrap();
        let poly = MvPoly::parse(&ctx, 3, "2*z^2+(x+y)*z+x*y").unwrap();
        let sets = expansion::sample_sets(&ctx, &[p, p, p], SampleMode::Full, 0).unwrap();
        let m = expansion::deficiency_stat(&poly, &sets, 1.0, &ImageOptions::default()).unwrap();
        if m.deficiency > frozen_t {
            ok = false;
            details.push(format!("p={p}: deficiency {}", m.deficiency));
        }
    }
    verdict(5, "full-set deficiency at the frozen ceiling", ok);
    assert!(ok, "frozen T = {frozen_t}: {details:?}");
}

#[test]
fn acceptance_6_conc_family_expansion() {
    let frozen_t = 0u64;
    let mut ok = true;
    let mut details = Vec::new();
    for p in odd_primes(11, 101) {
        let ctx = FieldCtx::parse_spec(&p.to_string()).unwrap();
        let payload = report::run_conc_family(
            &ctx,
            1,
            3,
            "y",
            "z^2",
            "full",
            0,
            1.0,
            &ImageOptions::default(),
        )
        .unwrap();
        if !payload.independence_certified {
            ok = false;
            details.push(format!("p={p}: independence not certified"));
        }
        if payload.measurement.deficiency > frozen_t {
            ok = false;
            details.push(format!("p={p}: deficiency {}", payload.measurement.deficiency));
        }
    }
    verdict(6, "structured-family deficiency with certified parts", ok);
    assert!(ok, "frozen T' = {frozen_t}: {details:?}");
}

fn random_small_poly(ctx: &FieldCtx, rng: &mut impl RngExt) -> MvPoly {
    let pool: [[u32; 2]; 5] = [[1, 0], [0, 1], [1, 1], [2, 0], [0, 2]];
    loop {
        let mut poly = MvPoly::zero(ctx, 2);
        for _ in 0..rng.random_range(1..=3usize) {
            let e = pool[rng.random_range(0..pool.len())];
            let c = rng.random_range(1..ctx.q()) as i64;
            poly = &poly + &MvPoly::monomial(&ctx.from_int(c), e.to_vec());
        }
        if poly.total_degree().unwrap_or(0) >= 1 {
            return poly;
        }
    }
}

#[test]
fn acceptance_7_annihilator_soundness() {
    let ctx = FieldCtx::parse_spec("7").unwrap();
    let opts = NicenessOptions::default();
    let mut ok = true;
    let mut details = Vec::new();

    let mut rng = seeded_rng(11);
    for t in 0..100u64 {
        let f = random_small_poly(&ctx, &mut rng);
        let g = random_small_poly(&ctx, &mut rng);
        let family = match t % 3 {
            0 => vec![f.clone(), &(&f * &f) + &f],
            1 => vec![&f * &g, (&f * &g).pow(2)],
            _ => vec![f.clone(), &f * &g, g.clone()],
        };
        let report = structure::classify_family(&family, &opts).unwrap();
        match report.status {
            ffexpand::structure::FamilyStatus::Dependent { relation } => {
                let expanded = relation.relation.substitute(&family).unwrap();
                if relation.relation.is_zero() || !expanded.is_zero() {
                    ok = false;
                    details.push(format!("trial {t}: relation fails symbolic check"));
                }
            }
            _ => {
                ok = false;
                details.push(format!("trial {t}: constructed dependence not found"));
            }
        }
    }

    let mut rng = seeded_rng(13);
    let budget = AnnihilatorBudget::default();
    let mut found_independent = 0;
    while found_independent < 100 {
        let f = random_small_poly(&ctx, &mut rng);
        let g = random_small_poly(&ctx, &mut rng);
        let det = structure::jacobian_det(&[f.clone(), g.clone()]).unwrap();
        if det.is_zero() {
            continue;
        }
        found_independent += 1;
        let bound =
            (f.total_degree().unwrap() * g.total_degree().unwrap()).max(1);
        if let Some(found) = structure::find_annihilator(&[f.clone(), g.clone()], bound, &budget).unwrap()
        {
            ok = false;
            details.push(format!(
                "independent pair ({f}, {g}) produced a degree-{} relation",
                found.degree
            ));
        }
    }

    verdict(7, "annihilator relations verify and independents stay clean", ok);
    assert!(ok, "{details:?}");
}

#[test]
fn acceptance_8_deterministic_reports() {
    let mut ok = true;
    let mut details = Vec::new();

    let ctx = FieldCtx::parse_spec("13").unwrap();
    let one = report::run_expand(
        &ctx,
        "2*z^2+(x+y)*z+x*y",
        None,
        "random:6",
        42,
        1.0,
        &ImageOptions::default(),
    )
    .unwrap();
    let two = report::run_expand(
        &ctx,
        "2*z^2+(x+y)*z+x*y",
        None,
        "random:6",
        42,
        1.0,
        &ImageOptions::default(),
    )
    .unwrap();
    if serde_json::to_string(&one).unwrap() != serde_json::to_string(&two).unwrap() {
        ok = false;
        details.push("library expand payloads differ".to_string());
    }

    let bin = env!("CARGO_BIN_EXE_ffexpand");
    let run = |args: &[&str]| {
        let out = std::process::Command::new(bin).args(args).output().expect("binary runs");
        (String::from_utf8(out.stdout).expect("utf8"), out.status.code())
    };
    let cases: [&[&str]; 3] = [
        &["expand", "--field", "13", "--poly", "x*y + z^2", "--sets", "random:6", "--seed", "42"],
        &["incidence", "--field", "7", "--degree", "2", "--points", "20", "--curves", "20", "--trials", "25", "--seed", "1"],
        &["check-nice", "--field", "5", "--poly", "2*z^2+(x+y)*z+x*y"],
    ];
    for args in cases {
        let (first_out, first_code) = run(args);
        let (second_out, second_code) = run(args);
        let first = strip_wall_time(&first_out).unwrap();
        let second = strip_wall_time(&second_out).unwrap();
        if first != second || first_code != second_code {
            ok = false;
            details.push(format!("binary run {args:?} not reproducible"));
        }
        if first_out == first {
            ok = false;
            details.push(format!("binary run {args:?} reported no wall time"));
        }
    }

    verdict(8, "repeated runs are byte-identical without wall time", ok);
    assert!(ok, "{details:?}");
}
