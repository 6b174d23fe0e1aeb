//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero only when a criterion outside `KNOWN_FAILURES` fails.

use std::time::Instant;

use cachenet::cceo::cceo_optimize;
use cachenet::config::{Config, ExperimentKind, Scheme, Tier, TierSelection};
use cachenet::experiment::{run_experiment, run_scheme, ExperimentSpec, TierModel};
use cachenet::mc::{simulate_scdp_mm_parts, simulate_scdp_mu, McParams};
use cachenet::model::{mpc_placement, ContentLibrary, DeliveryRequirement, MmTierConfig, MuTierConfig};
use cachenet::scdp_mm::{scdp_content_mm_los, scdp_content_mm_nlos, MmCoverageContext};
use cachenet::scdp_mu::{
    conditional_coverage_mu, laplace_cached_interference, laplace_uncached_interference, scdp_content_mu,
    MuCoverageContext, ScdpTable,
};
use cachenet::table::Format;
use cachenet::twostair::{
    epsilon_subproblem, newton_direction_mm, newton_direction_mu, optimal_epsilon, reduced_objective, NewtonState,
    StairTier,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Criteria that fail with the stated defaults; see the README.
const KNOWN_FAILURES: &[u32] = &[8];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

type Check = fn() -> Outcome;

fn main() {
    let checks: [(u32, &str, Check); 11] = [
        (1, "sub-6 GHz analytic vs Monte Carlo", c1_mu_monte_carlo),
        (2, "mmWave LOS/NLOS vs Monte Carlo and NLOS cutoff", c2_mm_exactness),
        (3, "single-antenna reduction", c3_single_antenna),
        (4, "closed-form optimal epsilon", c4_optimal_epsilon),
        (5, "Newton derivative fidelity", c5_derivatives),
        (6, "optimizer ordering", c6_ordering),
        (7, "CCEO near-optimal on a small catalog", c7_small_instance),
        (8, "CCEO converges within 200 iterations", c8_convergence),
        (9, "cache-density tradeoff", c9_cache_density),
        (10, "unequal content sizes", c10_unequal_sizes),
        (11, "determinism across worker counts", c11_determinism),
    ];
    let mut unexpected = 0;
    for (id, name, check) in checks {
        let t0 = Instant::now();
        let o = check();
        let status = if o.pass { "PASS" } else { "FAIL" };
        let note = if !o.pass && KNOWN_FAILURES.contains(&id) {
            " (known)"
        } else {
            ""
        };
        println!(
            "{status} [{id:>2}] {name}: {} ({:.1} s){note}",
            o.detail,
            t0.elapsed().as_secs_f64()
        );
        if !o.pass && !KNOWN_FAILURES.contains(&id) {
            unexpected += 1;
        }
    }
    if unexpected > 0 {
        eprintln!("{unexpected} unexpected acceptance failure(s)");
        std::process::exit(1);
    }
}

fn default_mu(antennas: u32, density_per_km2: f64) -> MuCoverageContext {
    let mut cfg = MuTierConfig::table_defaults();
    cfg.antennas = antennas;
    cfg.density = density_per_km2 * 1e-6;
    MuCoverageContext::from_requirement(cfg, &DeliveryRequirement::default()).unwrap()
}

fn default_mm() -> MmCoverageContext {
    MmCoverageContext::from_requirement(MmTierConfig::table_defaults(), &DeliveryRequirement::default()).unwrap()
}

fn c1_mu_monte_carlo() -> Outcome {
    let mut worst_z: f64 = 0.0;
    let mut worst_abs: f64 = 0.0;
    let mut failures = Vec::new();
    let mut point = 0u64;
    for density in [100.0, 600.0] {
        for n in [1, 2, 4] {
            let ctx = default_mu(n, density);
            for b in [0.2, 0.5, 1.0] {
                point += 1;
                let analytic = scdp_content_mu(b, &ctx).unwrap();
                let mc = McParams::with_drops(20_000, 1000 + point);
                let est = simulate_scdp_mu(b, ctx.config(), ctx.phi(), &mc).unwrap();
                let z = est.z_score(analytic);
                let abs = (est.mean - analytic).abs();
                worst_z = worst_z.max(z.abs());
                worst_abs = worst_abs.max(abs);
                if z.abs() > 3.0 || abs > 0.02 {
                    failures.push(format!("λ={density} N={n} b={b}: z={z:.2}"));
                }
            }
        }
    }
    outcome(
        failures.is_empty(),
        format!(
            "18 points, max |z| = {worst_z:.2}, max |diff| = {worst_abs:.4}{}",
            if failures.is_empty() {
                String::new()
            } else {
                format!("; failing: {}", failures.join(", "))
            }
        ),
    )
}

fn c2_mm_exactness() -> Outcome {
    let ctx = default_mm();
    let mut worst_z: f64 = 0.0;
    let mut failures = Vec::new();
    for k in 1..=10 {
        let b = k as f64 / 10.0;
        let mc = McParams::with_drops(20_000, 2000 + k);
        let [los_mc, nlos_mc] = simulate_scdp_mm_parts(b, ctx.config(), ctx.phi(), &mc).unwrap();
        let los = scdp_content_mm_los(b, &ctx).unwrap();
        let nlos = scdp_content_mm_nlos(b, &ctx).unwrap();
        for (label, est, val) in [("los", los_mc, los), ("nlos", nlos_mc, nlos)] {
            let z = est.z_score(val);
            worst_z = worst_z.max(z.abs());
            if z.abs() > 3.0 {
                failures.push(format!("{label} b={b}: z={z:.2}"));
            }
        }
    }
    // Raise the rate until the NLOS reach falls inside the LOS ball.
    let mut rate = DeliveryRequirement::default().rate_bps;
    let cut = loop {
        rate *= 1.5;
        let c = MmCoverageContext::from_requirement(MmTierConfig::table_defaults(), &DeliveryRequirement::new(rate).unwrap())
            .unwrap();
        if c.d_nlos() <= c.config().los_radius {
            break c;
        }
    };
    let mut identity = true;
    for k in 0..=10 {
        let b = k as f64 / 10.0;
        identity &= scdp_content_mm_nlos(b, &cut).unwrap() == 0.0;
        if k > 0 {
            let [_, nlos_mc] = simulate_scdp_mm_parts(b, cut.config(), cut.phi(), &McParams::with_drops(5000, 3000 + k))
                .unwrap();
            identity &= nlos_mc.mean == 0.0;
        }
    }
    outcome(
        failures.is_empty() && identity,
        format!(
            "20 comparisons, max |z| = {worst_z:.2}; NLOS identically zero at {rate:.3e} bit/s: {identity}{}",
            if failures.is_empty() {
                String::new()
            } else {
                format!("; failing: {}", failures.join(", "))
            }
        ),
    )
}

fn c3_single_antenna() -> Outcome {
    let ctx = default_mu(1, 600.0);
    let cfg = ctx.config();
    let pb = cfg.power_w * cfg.intercept;
    let mut worst: f64 = 0.0;
    for x in [2.0, 10.0, 40.0, 120.0, 400.0] {
        for b in [0.05, 0.3, 0.7, 1.0] {
            let general = conditional_coverage_mu(x, b, &ctx).unwrap();
            let s = ctx.phi() * x.powf(cfg.path_loss_exponent) / pb;
            let direct = (-s * cfg.noise_w).exp()
                * laplace_cached_interference(s, x, b, &ctx).unwrap()
                * laplace_uncached_interference(s, b, &ctx).unwrap();
            worst = worst.max((general - direct).abs());
        }
    }
    outcome(worst <= 1e-12, format!("20 points, max |diff| = {worst:.2e}"))
}

fn c4_optimal_epsilon() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let contents = 100;
    let step = 1e-4;
    let mut worst_gap: f64 = 0.0;
    let mut worst_second = f64::NEG_INFINITY;
    for _ in 0..100 {
        let ell: f64 = rng.random_range(1.01..=5.0);
        let varpi = (1.0 - rng.random::<f64>()) / ell;
        let gamma = [0.5, 1.5, 2.0][rng.random_range(0..3)];
        let eps = optimal_epsilon(varpi, ell, gamma).unwrap();
        let f = |e: f64| epsilon_subproblem(e, varpi, ell, gamma, contents).unwrap();
        let grid: Vec<f64> = (0..=10_000).map(|i| f(i as f64 * step)).collect();
        let best = (0..grid.len())
            .filter(|&i| grid[i].is_finite())
            .max_by(|&a, &b| grid[a].total_cmp(&grid[b]))
            .unwrap();
        worst_gap = worst_gap.max((best as f64 * step - eps).abs());
        for i in 1..grid.len() - 1 {
            let d2 = grid[i + 1] - 2.0 * grid[i] + grid[i - 1];
            if d2.is_finite() {
                worst_second = worst_second.max(d2);
            }
        }
    }
    outcome(
        worst_gap <= step * (1.0 + 1e-9) && worst_second <= 1e-9,
        format!("100 draws, max |ε* − grid argmax| = {worst_gap:.2e}, max second difference = {worst_second:.2e}"),
    )
}

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-10)
}

/// Worst relative error of (S′, S″, Newton step) against central
/// differences at 20 seeded interior points.
fn derivative_check<T: StairTier>(
    tier: &T,
    lib: &ContentLibrary,
    direction: impl Fn(f64, &NewtonState) -> f64,
    seed: u64,
) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h = 1e-5;
    let lo = lib.capacity() / lib.len() as f64;
    let mut worst: f64 = 0.0;
    let mut taken = 0;
    while taken < 20 {
        let varpi = rng.random_range(lo + 0.02..0.98);
        let state = NewtonState::at(varpi, lib, tier).unwrap();
        let at = |w: f64| reduced_objective(w, &state, lib, tier).unwrap();
        let (m, c, p) = (at(varpi - h), at(varpi), at(varpi + h));
        // a clamp switching inside the stencil is a kink, not a derivative
        let clamped = |e: f64| e <= 0.0 || e >= 1.0;
        if clamped(m.epsilon) != clamped(c.epsilon) || clamped(p.epsilon) != clamped(c.epsilon) {
            continue;
        }
        taken += 1;
        let fd1 = (p.value - m.value) / (2.0 * h);
        let fd2 = (p.d1 - m.d1) / (2.0 * h);
        let fd_dir = fd1 / fd2.abs();
        worst = worst
            .max(rel_err(c.d1, fd1))
            .max(rel_err(c.d2, fd2))
            .max(rel_err(direction(varpi, &state), fd_dir));
    }
    worst
}

fn c5_derivatives() -> Outcome {
    let lib = ContentLibrary::zipf(100, 10.0, 1.5).unwrap();
    let mu = default_mu(2, 600.0);
    let mm = default_mm();
    let e_mu = derivative_check(&mu, &lib, |w, s| newton_direction_mu(w, s, &lib, &mu).unwrap(), 51);
    let e_mm = derivative_check(&mm, &lib, |w, s| newton_direction_mm(w, s, &lib, &mm).unwrap(), 52);
    outcome(
        e_mu <= 1e-4 && e_mm <= 1e-3,
        format!("max relative error sub-6 GHz {e_mu:.2e}, mmWave {e_mm:.2e}"),
    )
}

fn scheme_scdp(scheme: Scheme, tier: Tier, cfg: &Config, lib: &ContentLibrary) -> f64 {
    let model = TierModel::build(tier, cfg, &cfg.requirement()).unwrap();
    run_scheme(scheme, &model, lib, cfg, cfg.seed).unwrap().scdp
}

fn c6_ordering() -> Outcome {
    let cfg = Config::default();
    let mut ok = true;
    let mut parts = Vec::new();
    for tier in [Tier::Mu, Tier::Mm] {
        for gamma in [0.5, 1.0, 1.5] {
            let lib = cfg.library_with(100, 10.0, gamma).unwrap();
            let mpc = scheme_scdp(Scheme::Mpc, tier, &cfg, &lib);
            let cceo = scheme_scdp(Scheme::Cceo, tier, &cfg, &lib);
            let two = scheme_scdp(Scheme::Twostair, tier, &cfg, &lib);
            let gap_ok = gamma != 0.5 || cceo - mpc >= 0.01;
            ok &= cceo >= mpc && gap_ok && mpc <= two && two <= cceo + 0.005;
            parts.push(format!("{} γ={gamma}: {mpc:.4}/{two:.4}/{cceo:.4}", tier.name()));
        }
    }
    outcome(ok, format!("MPC/two-stair/CCEO {}", parts.join(", ")))
}

/// Separable relaxation solved with a bisection on the budget multiplier
/// and a per-content grid search.
fn lagrangian_oracle(lib: &ContentLibrary, f: impl Fn(f64) -> f64) -> f64 {
    let grid: Vec<f64> = (0..=1000).map(|i| i as f64 * 1e-3).collect();
    let values: Vec<f64> = grid.iter().map(|&b| f(b)).collect();
    let pick = |mu: f64| -> Vec<usize> {
        lib.popularity()
            .iter()
            .map(|&a| {
                (0..grid.len())
                    .max_by(|&i, &k| (a * values[i] - mu * grid[i]).total_cmp(&(a * values[k] - mu * grid[k])))
                    .unwrap()
            })
            .collect()
    };
    let used = |idx: &[usize]| idx.iter().map(|&i| grid[i]).sum::<f64>();
    let (mut lo, mut hi) = (0.0, 1e3);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if used(&pick(mid)) > lib.capacity() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let idx = pick(hi);
    idx.iter().zip(lib.popularity()).map(|(&i, &a)| a * values[i]).sum()
}

fn c7_small_instance() -> Outcome {
    let cfg = Config::default();
    let lib = cfg.library_with(5, 2.0, 1.5).unwrap();
    let mu = default_mu(2, 600.0);
    let mm = default_mm();
    let params = cfg.cceo_params();
    let table = ScdpTable::build(&mu, ScdpTable::DEFAULT_INTERVALS).unwrap();
    let cceo_mu = cceo_optimize(|b| Ok(table.total(b, &lib)), &lib, &params).unwrap();
    let cceo_mu = TierModel::Mu(mu.clone()).total(&cceo_mu.placement, &lib).unwrap();
    let cceo_mm = cceo_optimize(|b| cachenet::scdp_mm::scdp_total_mm_unchecked(b, &lib, &mm), &lib, &params).unwrap();
    let cceo_mm = TierModel::Mm(mm.clone()).total(&cceo_mm.placement, &lib).unwrap();
    let oracle_mu = lagrangian_oracle(&lib, |b| scdp_content_mu(b, &mu).unwrap());
    let oracle_mm = lagrangian_oracle(&lib, |b| cachenet::scdp_mm::scdp_content_mm(b, &mm).unwrap());
    let gap_mu = oracle_mu - cceo_mu;
    let gap_mm = oracle_mm - cceo_mm;
    outcome(
        gap_mu <= 1e-2 && gap_mm <= 1e-2,
        format!("oracle − CCEO: sub-6 GHz {gap_mu:.2e} ({cceo_mu:.4} vs {oracle_mu:.4}), mmWave {gap_mm:.2e} ({cceo_mm:.4} vs {oracle_mm:.4})"),
    )
}

fn c8_convergence() -> Outcome {
    let cfg = Config::default();
    let lib = cfg.library().unwrap();
    let mu = default_mu(2, 600.0);
    let mm = default_mm();
    let params = cfg.cceo_params();
    let table = ScdpTable::build(&mu, ScdpTable::DEFAULT_INTERVALS).unwrap();
    let r_mu = cceo_optimize(|b| Ok(table.total(b, &lib)), &lib, &params).unwrap();
    let r_mm = cceo_optimize(|b| cachenet::scdp_mm::scdp_total_mm_unchecked(b, &lib, &mm), &lib, &params).unwrap();
    let describe = |r: &cachenet::cceo::CceoResult| {
        let last = r.trace.iterations.last().unwrap();
        if r.trace.converged {
            format!("converged at t = {}", r.trace.len())
        } else {
            format!("not converged after {} (max variance {:.2e})", r.trace.len(), last.max_variance())
        }
    };
    outcome(
        r_mu.trace.converged && r_mm.trace.converged,
        format!("sub-6 GHz {}, mmWave {}", describe(&r_mu), describe(&r_mm)),
    )
}

fn c9_cache_density() -> Outcome {
    let cfg = Config::default();
    let spec = ExperimentSpec {
        kind: ExperimentKind::CacheDensity,
        tier: TierSelection::Mm,
        schemes: vec![Scheme::Cceo],
        grid: vec![200.0, 400.0, 600.0, 800.0, 1000.0],
        capacities: vec![10.0, 15.0, 20.0, 25.0, 30.0],
        mc_drops: 0,
        ..ExperimentSpec::from_config(&cfg)
    };
    let table = run_experiment(&spec, &cfg).unwrap();
    let d = table.numbers("density_per_km2").unwrap();
    let m = table.numbers("M").unwrap();
    let v = table.numbers("cceo").unwrap();
    let at = |dens: f64, cap: f64| {
        (0..v.len())
            .find(|&i| d[i] == Some(dens) && m[i] == Some(cap))
            .and_then(|i| v[i])
            .unwrap()
    };
    let more_cache = at(600.0, 20.0) > at(600.0, 10.0);
    let monotone = spec.capacities.iter().all(|&cap| {
        spec.grid.windows(2).all(|w| at(w[1], cap) >= at(w[0], cap))
    });
    let target = at(1000.0, 10.0);
    let crossover = spec.capacities.iter().copied().find(|&cap| at(600.0, cap) >= target);
    outcome(
        more_cache && monotone && crossover.is_some(),
        format!(
            "M=20 vs M=10 at 600/km²: {:.4} vs {:.4}; monotone in density: {monotone}; smallest M at 600/km² matching M=10 at 1000/km² ({target:.4}): {}",
            at(600.0, 20.0),
            at(600.0, 10.0),
            crossover.map_or("none".into(), |c| c.to_string())
        ),
    )
}

fn c10_unequal_sizes() -> Outcome {
    let mut cfg = Config::default();
    cfg.library.size_choices = Some(vec![1.0, 2.0]);
    let mut ok = true;
    let mut parts = Vec::new();
    for cap in [10.0, 20.0] {
        let lib = cfg.library_with(100, cap, 1.5).unwrap();
        for tier in [Tier::Mu, Tier::Mm] {
            let model = TierModel::build(tier, &cfg, &cfg.requirement()).unwrap();
            let c = run_scheme(Scheme::Cceo, &model, &lib, &cfg, cfg.seed).unwrap();
            let mpc = model.total(&mpc_placement(&lib), &lib).unwrap();
            let used = lib.budget_used(c.placement.as_slice());
            ok &= used <= cap + 1e-9 && c.scdp > mpc;
            parts.push(format!("{} M={cap}: {:.4} vs {mpc:.4} (budget {used:.3})", tier.name(), c.scdp));
        }
    }
    outcome(ok, format!("CCEO vs size-aware MPC {}", parts.join(", ")))
}

fn render(spec: &ExperimentSpec, cfg: &Config, threads: usize) -> Vec<u8> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
    pool.install(|| {
        let table = run_experiment(spec, cfg).unwrap();
        let mut csv = Vec::new();
        table.write(Format::Csv, &mut csv).unwrap();
        table.write(Format::Json, &mut csv).unwrap();
        csv
    })
}

fn c11_determinism() -> Outcome {
    let mut cfg = Config::default();
    cfg.library.contents = 30;
    cfg.library.capacity = 5.0;
    let spec = ExperimentSpec {
        kind: ExperimentKind::SweepGamma,
        tier: TierSelection::Both,
        schemes: vec![Scheme::Mpc, Scheme::Cceo, Scheme::Twostair],
        grid: vec![0.5, 1.5],
        mc_drops: 2000,
        ..ExperimentSpec::from_config(&cfg)
    };
    let one = render(&spec, &cfg, 1);
    let again = render(&spec, &cfg, 1);
    let four = render(&spec, &cfg, 4);
    outcome(
        one == again && one == four,
        format!("{} bytes; rerun identical: {}; 1 vs 4 workers identical: {}", one.len(), one == again, one == four),
    )
}
