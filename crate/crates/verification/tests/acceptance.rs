//! Acceptance checks. Runs every criterion, prints one line each and exits
//! nonzero if any of them fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use polybetti::asymptotics::{self, ExperimentConfig, ExperimentResult, Experiment, Method, Regime};
use polybetti::exact::{self, binomial, Enumerator};
use polybetti::oracle;
use polybetti::poly::IntPoly;
use polybetti::quadrature::compute_c_alpha;
use polybetti::stochastic::{chunk_rng, mc_short_profile, LengthLaw};
use polybetti::{Kind, LengthVector, RandomModel};
use rand::Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn uniform() -> RandomModel {
    RandomModel::uniform(0.0, 1.0).unwrap()
}

fn describe_checks(r: &ExperimentResult) -> String {
    r.checks
        .iter()
        .map(|c| {
            let obs = c.observed.map_or("-".to_string(), |v| format!("{v:.4}"));
            format!("{}={} (limit {}, {})", c.name, obs, c.threshold, if c.pass { "ok" } else { "FAIL" })
        })
        .collect::<Vec<_>>()
        .join("; ")
}

fn equilateral_planar_exactness() -> Outcome {
    let mut notes = Vec::new();
    let mut pass = true;
    for n in [5usize, 7, 9, 11, 13] {
        let l = LengthVector::equilateral(n).unwrap();
        let enumerated = exact::planar_betti(&l).unwrap();
        let closed = exact::equilateral_planar(n).unwrap();
        let expected_total = (1u64 << (n - 1)) - binomial((n - 1) as u64, ((n - 1) / 2) as u64);
        let ok = enumerated == closed.betti && enumerated.total() == expected_total && closed.total == expected_total;
        pass &= ok;
        notes.push(format!("n={n}: total {}", enumerated.total()));
    }
    let pentagon = exact::planar_betti(&LengthVector::equilateral(5).unwrap()).unwrap();
    pass &= pentagon.values == [1, 8, 1] && pentagon.total() == 10;
    outcome(pass, notes.join(", "))
}

fn both_anchors(l: &LengthVector) -> [usize; 2] {
    [l.anchor_index(), l.n() - 1]
}

fn profiles_match(l: &LengthVector, e: &Enumerator) -> bool {
    both_anchors(l).into_iter().all(|a| e.anchored_counts(l, a).unwrap() == oracle::oracle_anchored(l, a).unwrap())
        && [Kind::Planar, Kind::Spatial].into_iter().all(|k| {
            match (e.short_profile(l, k), oracle::oracle_brute_force(l, k)) {
                (Ok(a), Ok(b)) => a == b,
                (Err(a), Err(b)) => a.to_string() == b.to_string(),
                _ => false,
            }
        })
}

fn oracle_equivalence() -> Outcome {
    let e = Enumerator::default();
    let mut rng = chunk_rng(2024, 0);
    let mut cases = 0u64;
    let mut mismatches = 0u64;
    for n in 3..=10u32 {
        let space = 6u64.pow(n);
        if space <= 10_000 {
            for code in 0..space {
                let mut c = code;
                let v: Vec<i64> = (0..n)
                    .map(|_| {
                        let d = (c % 6) as i64 + 1;
                        c /= 6;
                        d
                    })
                    .collect();
                cases += 1;
                mismatches += u64::from(!profiles_match(&LengthVector::exact(v).unwrap(), &e));
            }
        } else {
            for _ in 0..10_000 {
                let v: Vec<i64> = (0..n).map(|_| rng.random_range(1..=6)).collect();
                cases += 1;
                mismatches += u64::from(!profiles_match(&LengthVector::exact(v).unwrap(), &e));
            }
        }
    }
    for _ in 0..1000 {
        let n = rng.random_range(11..=14);
        let v: Vec<i64> = (0..n).map(|_| rng.random_range(1..=1000)).collect();
        cases += 1;
        mismatches += u64::from(!profiles_match(&LengthVector::exact(v).unwrap(), &e));
    }
    outcome(mismatches == 0, format!("{cases} vectors, {mismatches} mismatches"))
}

fn small_manifolds() -> Outcome {
    let triangle = exact::planar_betti(&LengthVector::exact(vec![1, 1, 1]).unwrap()).unwrap();
    let quad = LengthVector::exact(vec![1, 1, 1, 2]).unwrap();
    let circle = exact::planar_betti(&quad).unwrap();
    let sphere = exact::spatial_betti(&quad).unwrap();
    let mut pass = triangle.values == [2] && circle.values == [1, 1] && sphere.values == [1, 1];

    // (1 - x) divides q(x) - x^{n-2} q(1/x) for every generic vector
    let mut rng = chunk_rng(33, 0);
    let (mut tried, mut remainders) = (0, 0);
    while tried < 1000 {
        let n = rng.random_range(4..=12);
        let l = LengthVector::exact((0..n).map(|_| rng.random_range(1..=50)).collect()).unwrap();
        if !l.is_generic().unwrap() {
            continue;
        }
        tried += 1;
        let counts = exact::short_profile_spatial(&l).unwrap().counts;
        let q: Vec<i64> = counts[..n - 1].iter().map(|&c| c as i64).collect();
        let mut mirrored = vec![0i64; n - 1];
        for (j, &c) in q.iter().enumerate() {
            mirrored[n - 2 - j] = c;
        }
        let numerator = IntPoly::new(q).sub(&IntPoly::new(mirrored));
        let (_, rem) = numerator.div_rem(&IntPoly::new(vec![1, -1]));
        remainders += usize::from(!rem.is_zero());
        pass &= exact::spatial_poincare(&l).is_ok();
    }
    pass &= remainders == 0;
    outcome(
        pass,
        format!("triangle {:?}, quadrilateral planar {:?} spatial {:?}, {tried} divisions with {remainders} remainders", triangle.values, circle.values, sphere.values),
    )
}

fn permutation_profile_consistency() -> Outcome {
    let e = Enumerator::default();
    let mut rng = chunk_rng(4, 0);
    let (mut pairs, mut covered) = (0u64, 0u64);
    for instance in 0..200u64 {
        let n = rng.random_range(6..=14);
        let l = LengthVector::exact((0..n).map(|_| rng.random_range(1..=1000)).collect()).unwrap();
        let kind = if instance % 2 == 0 { Kind::Planar } else { Kind::Spatial };
        let anchor = match kind {
            Kind::Planar => l.anchor_index(),
            Kind::Spatial => n - 1,
        };
        let truth = e.anchored_counts(&l, anchor).unwrap().short;
        let est = mc_short_profile(&l, kind, 100_000, 1000 + instance).unwrap();
        for (m, &c) in est.iter().zip(&truth) {
            pairs += 1;
            covered += u64::from(m.covers(c as f64, 3.0));
        }
    }
    let share = covered as f64 / pairs as f64;
    outcome(share >= 0.95, format!("{covered}/{pairs} pairs within 3 standard errors ({:.2}%)", 100.0 * share))
}

fn clt() -> Outcome {
    let c = ExperimentConfig::new(Experiment::CltTau, uniform(), vec![100, 400], 5000, 5)
        .without_tol("variance_rel")
        .with_tol("ks_max", 0.05)
        .with_tol("ks_decreasing", 1.0);
    let r = asymptotics::verify_clt_tau(&c).unwrap();
    let ks: Vec<String> = r.series("ks_tilde").iter().map(|(n, v)| format!("KS(n={n})={v:.4}")).collect();
    outcome(r.pass, format!("{}; {}", ks.join(", "), describe_checks(&r)))
}

fn ldp() -> Outcome {
    let c = ExperimentConfig::new(Experiment::LdpTau, uniform(), vec![20, 40, 60, 80], 20_000, 6)
        .with_epsilon(0.15)
        .with_tol("slope_upper_max", 0.0);
    let r = asymptotics::verify_ldp_tau(&c).unwrap();
    let probs: Vec<String> = r.series("probability").iter().map(|(n, v)| format!("P(n={n})={v:.2e}")).collect();
    outcome(r.pass && r.flags.is_empty(), format!("{}; {}", probs.join(", "), describe_checks(&r)))
}

fn planar_mean_total() -> Outcome {
    let c = ExperimentConfig::new(Experiment::MeanPoincare, uniform(), vec![10, 14, 18, 22], 200, 7)
        .with_t(1.0)
        .with_method(Method::Exact)
        .without_tol("rel")
        .with_tol("increasing", 1.0)
        .with_tol("final_min", 0.7)
        .with_tol("equilateral_track", 0.15);
    let r = asymptotics::verify_mean_poincare(&c).unwrap();
    let ratios: Vec<String> = r
        .series("normalized_mean")
        .iter()
        .map(|&(n, v)| format!("n={n}: {v:.3} (curve {:.3})", 1.0 - (2.0 / (std::f64::consts::PI * n as f64)).sqrt()))
        .collect();
    outcome(r.pass, format!("{}; {}", ratios.join(", "), describe_checks(&r)))
}

fn spatial_mean_total() -> Outcome {
    let c = ExperimentConfig::new(Experiment::MeanPoincare, uniform(), vec![15], 10_000, 8)
        .with_kind(Kind::Spatial)
        .with_t(1.0)
        .without_tol("rel")
        .with_tol("equilateral_max", 0.2);
    let r = asymptotics::verify_mean_poincare(&c).unwrap();
    // the estimator is normalized by n 2^{n-1}
    let normalized = r.get(15, "normalized_mean").unwrap();
    let ratio = 2.0 * normalized.value;
    let in_band = (0.8..=1.2).contains(&ratio);
    let eq = exact::equilateral_spatial_total(15).unwrap() as f64 / (15.0 * 2f64.powi(13));
    outcome(
        in_band && eq < 0.2 && r.pass,
        format!(
            "mean/(n 2^(n-2)) = {ratio:.4} ± {:.4} (band [0.8, 1.2]); equilateral/(n 2^(n-2)) = {eq:.4} (limit 0.2)",
            2.0 * normalized.std_error.unwrap_or(0.0)
        ),
    )
}

fn off_critical() -> Outcome {
    let run = |kind: Kind, t: f64, seed: u64| {
        let c = ExperimentConfig::new(Experiment::MeanPoincare, uniform(), vec![20], 200_000, seed)
            .with_kind(kind)
            .with_t(t)
            .with_tol("rel", 0.10);
        asymptotics::verify_mean_poincare(&c).unwrap()
    };
    let cases = [(Kind::Planar, 0.5, 1.0), (Kind::Planar, 2.0, 0.25), (Kind::Spatial, 0.5, 4.0 / 3.0)];
    let mut pass = true;
    let mut notes = Vec::new();
    for (i, (kind, t, target)) in cases.into_iter().enumerate() {
        let r = run(kind, t, 90 + i as u64);
        let v = r.get(20, "normalized_mean").unwrap().value;
        let ok = ((v / target) - 1.0).abs() <= 0.10;
        pass &= ok;
        notes.push(format!("{kind} t={t}: {v:.4} vs {target:.4}"));
    }
    outcome(pass, notes.join(", "))
}

fn c_alpha() -> Outcome {
    let u = uniform();
    let c0 = compute_c_alpha(0.0, &u).unwrap();
    let oracle = (u.mean() / u.variance().sqrt()).atan() / std::f64::consts::PI;
    let c6 = compute_c_alpha(6.0, &u).unwrap();
    let pass = (c0 - 1.0 / 3.0).abs() < 1e-6 && (c0 - oracle).abs() < 1e-6 && c6 < 1e-8;
    outcome(pass, format!("C(0) = {c0:.12}, arctan oracle {oracle:.12}, C(6) = {c6:.3e}"))
}

fn concentration() -> Outcome {
    let planar = ExperimentConfig::new(Experiment::HigherMoments, uniform(), vec![12, 16, 20], 2000, 11)
        .with_t(0.5)
        .with_nu(2)
        .with_tol("ratio_max", 1.1)
        .with_tol("variance_decreasing", 1.0);
    let p = asymptotics::verify_higher_moments(&planar).unwrap();
    let spatial = ExperimentConfig::new(Experiment::HigherMoments, uniform(), vec![15], 2000, 12)
        .with_kind(Kind::Spatial)
        .with_t(1.0)
        .with_nu(2)
        .with_tol("ratio_max", 1.2)
        .without_tol("variance_decreasing");
    let s = asymptotics::verify_higher_moments(&spatial).unwrap();
    let vars: Vec<String> = p.series("variance").iter().map(|(n, v)| format!("var(n={n})={v:.2e}")).collect();
    outcome(
        p.pass && s.pass,
        format!(
            "{}; planar ratio {:.4}; spatial ratio {:.4}",
            vars.join(", "),
            p.get(20, "moment_ratio").unwrap().value,
            s.get(15, "moment_ratio").unwrap().value
        ),
    )
}

fn corollary_exponent() -> Outcome {
    let c = ExperimentConfig::new(Experiment::HighDimBettiPlanar, uniform(), vec![14, 18, 22], 20_000, 13)
        .with_regime(Regime::Sub)
        .with_p(0.3)
        .without_tol("ratio_min")
        .without_tol("ratio_max")
        .with_tol("corollary_rel", 0.05);
    let r = asymptotics::verify_high_dim_betti_planar(&c).unwrap();
    let logs: Vec<String> = r.series("log_mean_over_n").iter().map(|(n, v)| format!("n={n}: {v:.4}")).collect();
    let h = -0.3f64 * 0.3f64.ln() - 0.7 * 0.7f64.ln();
    outcome(r.pass, format!("{} vs {h:.4}; {}", logs.join(", "), describe_checks(&r)))
}

fn main() -> ExitCode {
    type Criterion = (&'static str, &'static str, Duration, fn() -> Outcome);
    let criteria: [Criterion; 12] = [
        ("AC-1", "equilateral planar Betti numbers", Duration::from_secs(1), equilateral_planar_exactness),
        ("AC-2", "fast enumeration equals brute force", Duration::from_secs(60), oracle_equivalence),
        ("AC-3", "small manifolds and exact spatial division", Duration::from_secs(10), small_manifolds),
        ("AC-4", "permutation estimates of short-subset counts", Duration::from_secs(120), permutation_profile_consistency),
        ("AC-5", "normal approximation of tau", Duration::from_secs(60), clt),
        ("AC-6", "exponential decay of tau deviations", Duration::from_secs(120), ldp),
        ("AC-7", "planar mean total Betti number", Duration::from_secs(300), planar_mean_total),
        ("AC-8", "spatial mean total Betti number", Duration::from_secs(120), spatial_mean_total),
        ("AC-9", "mean Poincare values off t = 1", Duration::from_secs(120), off_critical),
        ("AC-10", "C(alpha) quadrature", Duration::from_secs(1), c_alpha),
        ("AC-11", "concentration of the Poincare polynomial", Duration::from_secs(180), concentration),
        ("AC-12", "growth exponent of mean Betti numbers", Duration::from_secs(120), corollary_exponent),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (id, name, limit, run) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| f == id) {
            continue;
        }
        let start = Instant::now();
        let out = run();
        let elapsed = start.elapsed();
        let in_time = elapsed <= limit;
        let pass = out.pass && in_time;
        failed += usize::from(!pass);
        let timing = if in_time { String::new() } else { format!(" [over the {}s limit]", limit.as_secs()) };
        println!(
            "[{}] {id} {name} ({:.2}s){timing}: {}",
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            out.detail
        );
    }
    if failed == 0 {
        println!("acceptance: all criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failed} criterion(s) failed");
        ExitCode::FAILURE
    }
}
