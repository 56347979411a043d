//! Acceptance suite: one line per criterion, non-zero exit if any fails.
//!
//! Run with `cargo test -p cusp-eigen-cli --test acceptance`.

use std::f64::consts::PI;
use std::process::{Command, ExitCode};
use std::sync::Arc;
use std::time::{Duration, Instant};

use cusp_eigen::bounds::{distortion_bound, mu_lower_general_weight, mu_lower_main, mu_lower_pp, pi_p, poincare_constant_convex};
use cusp_eigen::eigen::{linear_oracle_solve, minimize_rq, recenter, recenter_discrete, DiscreteProblem, EigenResult, SolverConfig};
use cusp_eigen::fem::{fem_weighted_q_norm, FemFunction, WeightedQuadrature};
use cusp_eigen::mesh::Mesh;
use cusp_eigen::params::derive_params;
use cusp_eigen::quadrature::{ratio_norm, QuadratureScheme};
use cusp_eigen::verify::{check_composition_inequality, check_isometry, check_volume, check_weight_mass, positive_family, test_family};
use cusp_eigen::{CuspDomain, Error, FiberDomain, PowerWeight, ProblemParams, PyramidDomain, WeightSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion<'a> = Box<dyn FnOnce() -> Outcome + 'a>;

const TABLE: &str = include_str!("../../core/tests/oracle/closed_forms.csv");

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn lib<T>(r: cusp_eigen::Result<T>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn close(got: f64, want: f64, what: &str) -> Result<(), String> {
    let rel = ((got - want) / want).abs();
    ensure(rel <= 1e-12, || format!("{what}: {got} vs {want} (rel {rel:e})"))
}

fn closed_forms() -> Outcome {
    let mut lines = TABLE.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let mut count = 0;
    for line in lines {
        let cells: Vec<&str> = line.split(',').collect();
        let col = |k: &str| -> Option<f64> {
            let i = header.iter().position(|h| *h == k)?;
            cells[i].parse().ok()
        };
        let params = lib(ProblemParams::new(col("n").unwrap() as usize, col("p").unwrap(), col("q").unwrap(), col("gamma").unwrap()))?;
        let d = lib(derive_params(&params))?;
        close(d.sigma, col("sigma").unwrap(), "sigma")?;
        close(d.a_max, col("a_max").unwrap(), "a_max")?;
        close(d.p_star, col("p_star").unwrap(), "p_star")?;
        close(lib(distortion_bound(&params, d.a_max))?, col("k_p").unwrap(), "K_p")?;
        close(lib(pi_p(params.p))?, col("pi_p").unwrap(), "pi_p")?;
        let pyramid = lib(PyramidDomain::new(params.n))?;
        close(lib(poincare_constant_convex(&params, pyramid.diameter(), pyramid.volume()))?, col("b_convex").unwrap(), "B_convex")?;
        if let Some(c) = col("pp_canonical") {
            let pp = lib(mu_lower_pp(&params))?;
            close(pp.canonical, c, "pp canonical")?;
            close(pp.paper_verbatim, col("pp_verbatim").unwrap(), "pp verbatim")?;
        }
        count += 1;
    }
    ensure(count == 16, || format!("expected 16 grid points, found {count}"))?;
    Ok(format!("{count} grid points within 1e-12"))
}

fn integral_identities() -> Outcome {
    let scheme = QuadratureScheme::fiber(48, 24);
    let mut worst: f64 = 0.0;
    for gamma in [2.5, 3.0, 4.0] {
        let params = lib(ProblemParams::new(2, 1.5, 1.5, gamma))?;
        let v = lib(check_volume(&params, &scheme))?;
        ensure(v.margin <= 1e-10, || format!("volume at gamma={gamma}: {v:?}"))?;
        let a_max = lib(params.derive())?.a_max;
        for a in [a_max, 0.5 * a_max] {
            let r = lib(check_weight_mass(&params, a, &scheme))?;
            ensure(r.margin <= 1e-8, || format!("weight mass at gamma={gamma}, a={a}: {r:?}"))?;
            worst = worst.max(r.margin);
        }
    }
    Ok(format!("worst weight-mass error {worst:.1e}"))
}

fn isometry() -> Outcome {
    let params = lib(ProblemParams::new(2, 1.5, 2.0, 3.0))?;
    let a_max = lib(params.derive())?.a_max;
    let scheme = QuadratureScheme::fiber(48, 24);
    let mut worst: f64 = 0.0;
    for v in positive_family(2, 10, 0) {
        for q in [1.5, 2.0] {
            for a in [a_max, 0.5 * a_max] {
                let r = lib(check_isometry(&params, a, &v, q, &scheme))?;
                let rel = (r.lhs - r.rhs).abs() / r.rhs;
                ensure(rel <= 1e-6, || format!("{r:?}"))?;
                worst = worst.max(rel);
            }
        }
    }
    Ok(format!("10 fields x 2 exponents x 2 maps, worst relative gap {worst:.1e}"))
}

fn composition() -> Outcome {
    let params = lib(ProblemParams::new(2, 1.5, 1.5, 3.0))?;
    let a_max = lib(params.derive())?.a_max;
    let scheme = QuadratureScheme::fiber(48, 24);
    let mut checked = 0;
    for a in [a_max, 0.5 * a_max] {
        for u in test_family(2, 20, 0) {
            let r = lib(check_composition_inequality(&params, a, &u, &scheme))?;
            ensure(r.passed(), || format!("violation: {r:?}"))?;
            checked += 1;
        }
    }
    Ok(format!("{checked} checks, no violations"))
}

fn solver_oracle() -> Outcome {
    let laplace = lib(ProblemParams::relaxed(2, 2.0, 2.0, 2.0))?;
    let triangle = lib(PyramidDomain::new(2))?;
    let mut values = Vec::new();
    for m in [16, 32, 64] {
        let mesh = Arc::new(lib(Mesh::build(&triangle, m, 1.0))?);
        let r = lib(minimize_rq(mesh.clone(), &laplace, &WeightSpec::Unit, &SolverConfig::default()))?;
        let (lambda, _) = lib(linear_oracle_solve(mesh, &PowerWeight::UNIT))?;
        ensure(r.converged, || format!("M={m} did not converge"))?;
        ensure(((r.mu_h - lambda) / lambda).abs() <= 1e-6, || format!("M={m}: {} vs oracle {lambda}", r.mu_h))?;
        values.push(r.mu_h);
    }
    ensure(values.windows(2).all(|w| w[1] <= w[0] + 1e-8), || format!("not monotone: {values:?}"))?;
    let last = values[2];
    ensure((PI * PI..=1.02 * PI * PI).contains(&last), || format!("mu_h(64) = {last} outside [pi^2, 1.02 pi^2]"))?;
    Ok(format!("mu_h = {values:.6?}"))
}

fn cusp_solve(params: &ProblemParams, layers: usize) -> Result<EigenResult, String> {
    let domain = lib(CuspDomain::new(2, params.gamma))?;
    let beta = params.sigma().max(2.0);
    let mesh = Arc::new(lib(Mesh::build(&domain, layers, beta))?);
    let r = lib(minimize_rq(mesh, params, &WeightSpec::Optimal, &SolverConfig::default()))?;
    ensure(r.converged, || format!("solve at {params:?} did not converge"))?;
    Ok(r)
}

fn bound_ordering(mixed: &mut Option<EigenResult>) -> Outcome {
    let mut parts = Vec::new();
    for gamma in [2.5, 3.0, 4.0] {
        let params = lib(ProblemParams::new(2, 1.5, 1.5, gamma))?;
        let r = cusp_solve(&params, 64)?;
        let pp = lib(mu_lower_pp(&params))?;
        ensure(r.mu_h >= 0.99 * pp.canonical && r.mu_h >= 0.99 * pp.paper_verbatim, || {
            format!("gamma={gamma}: mu_h = {} vs {pp:?}", r.mu_h)
        })?;
        parts.push(format!("gamma={gamma}: {:.4} >= {:.4}", r.mu_h, pp.canonical));
    }
    let params = lib(ProblemParams::new(2, 1.5, 2.0, 3.0))?;
    let r = cusp_solve(&params, 64)?;
    let main = lib(mu_lower_main(&params))?;
    ensure(r.mu_h >= 0.99 * main.canonical, || format!("(1.5, 2): mu_h = {} vs {main:?}", r.mu_h))?;
    parts.push(format!("q=2: {:.4} >= {:.4}", r.mu_h, main.canonical));
    *mixed = Some(r);
    Ok(parts.join("; "))
}

fn general_weight(mixed: &Option<EigenResult>) -> Outcome {
    let params = lib(ProblemParams::new(2, 1.5, 2.0, 3.0))?;
    let scheme = QuadratureScheme::fiber(48, 24);
    let r = lib(ratio_norm(&WeightSpec::Optimal, &params, &scheme))?;
    let exact = 0.5f64.powf(0.25);
    ensure((r - exact).abs() <= 1e-8, || format!("ratio norm {r} vs {exact}"))?;
    let bound = lib(mu_lower_general_weight(&params, r))?;
    let mu_h = match mixed {
        Some(m) => m.mu_h,
        None => cusp_solve(&params, 64)?.mu_h,
    };
    ensure(bound.canonical.is_finite() && bound.canonical <= 1.01 * mu_h, || format!("{bound:?} vs mu_h = {mu_h}"))?;
    match ratio_norm(&WeightSpec::Unit, &params, &scheme) {
        Err(Error::DivergentRatioNorm { exponent }) => {
            ensure(exponent == -7.0, || format!("unit weight: divergence exponent {exponent}, expected -7"))?
        }
        other => return Err(format!("unit weight: expected divergence with exponent -7, got {other:?}")),
    }
    Ok(format!("ratio norm {r:.15}, bound {:.6} <= {mu_h:.6}, unit weight diverges", bound.canonical))
}

fn recentering() -> Outcome {
    let domain = lib(CuspDomain::new(2, 3.0))?;
    let mesh = Arc::new(lib(Mesh::build(&domain, 8, 2.0))?);
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut fields = 0;
    for q in [1.5, 2.0, 3.0] {
        let params = lib(ProblemParams::relaxed(2, 1.5, q, 3.0))?;
        let w = lib(WeightSpec::Optimal.resolve(&params))?;
        let quad = WeightedQuadrature::new(&mesh, &w);
        let problem = lib(DiscreteProblem::new(mesh.clone(), &w, 1.5, q))?;
        for _ in 0..1000 {
            let scale = 10f64.powf(rng.gen_range(-2.0..2.0));
            let offset = rng.gen_range(-5.0..5.0);
            let values: Vec<f64> = (0..mesh.num_vertices()).map(|_| offset + scale * rng.gen_range(-1.0..1.0)).collect();
            let u = lib(FemFunction::new(mesh.clone(), values))?;
            let pv = quad.values_at_points(&mesh, u.values());
            let bracket = lib(recenter_discrete(&pv, quad.point_weights(), q))?;
            let (lo, hi) = pv.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
            ensure(bracket.lower <= bracket.shift && bracket.shift <= bracket.upper, || format!("{bracket:?}"))?;
            ensure(lo <= bracket.shift && bracket.shift <= hi, || format!("root {} outside [{lo}, {hi}]", bracket.shift))?;

            let (t, centered) = lib(recenter(&u, &w, q))?;
            ensure(t == bracket.shift, || format!("recenter {t} vs bracket root {}", bracket.shift))?;
            let constraint = problem.constraint(centered.values()) / scale.powf(q - 1.0);
            ensure(constraint.abs() <= 1e-10, || format!("constraint {constraint:e} at q={q}"))?;

            let best = fem_weighted_q_norm(&centered, &w, q);
            for _ in 0..50 {
                let c = rng.gen_range(lo - scale..hi + scale);
                let other = lib(u.with_values(u.values().iter().map(|v| v - c).collect()))?;
                let norm = fem_weighted_q_norm(&other, &w, q);
                ensure(best <= norm * (1.0 + 1e-12), || format!("c = {c} beats the root: {norm} < {best}"))?;
            }
            fields += 1;
        }
    }
    Ok(format!("{fields} fields, 50 constants each"))
}

fn cli(args: &[&str]) -> Result<String, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_cusp-eigen")).args(args).output().map_err(|e| e.to_string())?;
    ensure(out.status.success(), || String::from_utf8_lossy(&out.stderr).into_owned())?;
    String::from_utf8(out.stdout).map_err(|e| e.to_string())
}

fn determinism() -> Outcome {
    let base = ["solve", "--p", "1.5", "--gamma", "3", "--M", "24", "--seed", "11"];
    let with = |workers: &str| {
        let mut args = base.to_vec();
        args.extend(["--workers", workers]);
        cli(&args)
    };
    let (a, b) = (with("1")?, with("1")?);
    ensure(a == b, || "repeated runs differ".into())?;
    let c = with("4")?;
    ensure(c == with("4")?, || "repeated 4-worker runs differ".into())?;
    let mu = |s: &str| -> Result<f64, String> {
        let v: serde_json::Value = serde_json::from_str(s).map_err(|e| e.to_string())?;
        v["mu_h"].as_f64().ok_or_else(|| "no mu_h".into())
    };
    let (m1, m4) = (mu(&a)?, mu(&c)?);
    ensure((m1 - m4).abs() <= 1e-12 * m1, || format!("{m1} vs {m4}"))?;
    Ok(format!("bit-identical repeats, workers 1 vs 4 differ by {:.1e}", (m1 - m4).abs()))
}

fn main() -> ExitCode {
    let mut mixed = None;
    let criteria: Vec<(&str, Duration, Criterion)> = vec![
        ("closed-form regression", Duration::from_secs(1), Box::new(closed_forms)),
        ("integral identities", Duration::from_secs(5), Box::new(integral_identities)),
        ("change-of-variables isometry", Duration::from_secs(10), Box::new(isometry)),
        ("composition inequality", Duration::from_secs(10), Box::new(composition)),
        ("solver against linear oracle", Duration::from_secs(60), Box::new(solver_oracle)),
        ("bound ordering", Duration::from_secs(300), Box::new(|| bound_ordering(&mut mixed))),
    ];
    let mut failures = 0;
    let mut report = |i: usize, name: &str, limit: Duration, f: Criterion| {
        let start = Instant::now();
        let mut result = f();
        let elapsed = start.elapsed();
        if result.is_ok() && elapsed > limit {
            result = Err(format!("took {elapsed:.1?}, limit {limit:?}"));
        }
        let (tag, detail) = match &result {
            Ok(d) => ("PASS", d.clone()),
            Err(d) => ("FAIL", d.clone()),
        };
        if result.is_err() {
            failures += 1;
        }
        println!("criterion {i} {name}: {tag} ({elapsed:.2?}) {detail}");
    };
    for (i, (name, limit, f)) in criteria.into_iter().enumerate() {
        report(i + 1, name, limit, f);
    }
    report(7, "general-weight bound", Duration::from_secs(300), Box::new(|| general_weight(&mixed)));
    report(8, "recentering", Duration::from_secs(30), Box::new(recentering));
    report(9, "determinism", Duration::from_secs(120), Box::new(determinism));
    if failures == 0 {
        println!("acceptance: all 9 criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failures} of 9 criteria failed");
        ExitCode::FAILURE
    }
}
