//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use regret_potentials::bounds::{bound_report, bound_report_for, BoundStrategy};
use regret_potentials::dp::{verify_horizon, DpOptions};
use regret_potentials::heat::{gaussian_max_mean, phi, phi_grad, phi_hessian_fd, HeatPotentialParams};
use regret_potentials::max_potential::{f_eval, psi, psi_grad, psi_hessian, psi_time_deriv, MaxPotentialParams};
use regret_potentials::strategies::{heat_adversary, kappa_h, kappa_m, ExpPlayer, RandomizedAdversary};
use regret_potentials::{simulate, GameConfig};

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within_budget(start: Instant, budget: Duration) -> Result<(), String> {
    let e = start.elapsed();
    ensure(e < budget, || format!("took {:.1}s, budget {:.0}s", e.as_secs_f64(), budget.as_secs_f64()))
}

fn quad_form(m: &[Vec<f64>], q: &[f64]) -> f64 {
    (0..q.len()).map(|i| (0..q.len()).map(|j| m[i][j] * q[i] * q[j]).sum::<f64>()).sum()
}

fn sign_vector(bits: u64, n: usize) -> Vec<f64> {
    (0..n).map(|i| if bits >> i & 1 == 1 { 1.0 } else { -1.0 }).collect()
}

fn exp_weights() -> Check {
    let start = Instant::now();
    let (n, h) = (16usize, 10_000u64);
    let r = bound_report("exp_ub", n, h).map_err(|e| e.to_string())?;
    let expect = (2.0 * h as f64 * (n as f64).ln()).sqrt();
    ensure((r.bound - expect).abs() <= 1e-9, || format!("bound {} vs {expect}", r.bound))?;
    let player = ExpPlayer::tuned(n, h).map_err(|e| e.to_string())?;
    let cfg = GameConfig::new(n, h).map_err(|e| e.to_string())?;
    let stats = simulate(&player, &RandomizedAdversary, &cfg, 20_240_601, 2000).map_err(|e| e.to_string())?;
    ensure(stats.mean <= r.bound, || format!("mean regret {} above bound {}", stats.mean, r.bound))?;
    within_budget(start, Duration::from_secs(60))?;
    Ok(format!(
        "bound {:.4}, simulated mean {:.3} ± {:.3}, {:.1}s",
        r.bound,
        stats.mean,
        stats.std_error,
        start.elapsed().as_secs_f64()
    ))
}

fn constant_check(strategies: &[BoundStrategy], n: usize, target: f64) -> Check {
    let h = 10_000_000_000u64;
    let mut parts = Vec::new();
    for &s in strategies {
        let r = bound_report_for(s, n, h).map_err(|e| e.to_string())?;
        let rel = (r.c_n - target).abs() / target;
        ensure(rel <= 0.01, || format!("{s}: C_{n} = {} vs {target} (rel {rel:.2e})", r.c_n))?;
        parts.push(format!("{s} {:.5}", r.c_n));
    }
    Ok(format!("target {target:.5}; {}", parts.join(", ")))
}

fn two_expert_constants() -> Check {
    constant_check(
        &[BoundStrategy::HeatLbH, BoundStrategy::HeatUb, BoundStrategy::MaxLb, BoundStrategy::MaxUb],
        2,
        (2.0 / PI).sqrt(),
    )
}

fn three_expert_constants() -> Check {
    constant_check(&[BoundStrategy::MaxLb, BoundStrategy::MaxUb], 3, 4.0 * (2.0 / (9.0 * PI)).sqrt())
}

fn sandwiches() -> Check {
    let start = Instant::now();
    let opts = DpOptions::default();
    let (mut rows, mut pairs, mut min_slack) = (0, 0, f64::INFINITY);
    for n in [2usize, 3] {
        for h in 2..=8u64 {
            let r = verify_horizon(n, h, &opts).map_err(|e| e.to_string())?;
            for s in &r.sandwiches {
                ensure(s.pass, || {
                    format!("{} N={n} |T|={h}: dp {} bound {} slack {}", s.report.strategy, s.dp_value, s.report.bound, s.slack)
                })?;
                if s.report.strategy == "exp_ub" {
                    ensure(s.report.error == 0.0 && s.dp_value <= s.report.potential_value, || {
                        format!("exp player N={n} |T|={h}: {} > {}", s.dp_value, s.report.potential_value)
                    })?;
                }
                min_slack = min_slack.min(s.slack);
            }
            for c in &r.cross_pairs {
                ensure(c.pass, || format!("{} vs {} N={n} |T|={h}", c.adversary, c.player))?;
            }
            rows += r.sandwiches.len();
            pairs += r.cross_pairs.len();
        }
    }
    within_budget(start, Duration::from_secs(300))?;
    Ok(format!(
        "{rows} sandwiches, {pairs} cross pairs, min slack {min_slack:.4}, {:.1}s",
        start.elapsed().as_secs_f64()
    ))
}

fn trace_identity() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = 0.0f64;
    for n in 2..=8usize {
        let support = heat_adversary(n).map_err(|e| e.to_string())?;
        for _ in 0..1000 {
            // symmetric with zero row sums: off-diagonals free, diagonal fixed
            let mut m = vec![vec![0.0; n]; n];
            for i in 0..n {
                for j in i + 1..n {
                    let v = rng.random_range(-1.0..1.0);
                    m[i][j] = v;
                    m[j][i] = v;
                }
            }
            for i in 0..n {
                m[i][i] = -(0..n).filter(|&j| j != i).map(|j| m[i][j]).sum::<f64>();
            }
            let lhs: f64 = support.atoms().iter().map(|(q, p)| p * quad_form(&m, q)).sum();
            let trace: f64 = (0..n).map(|i| m[i][i]).sum();
            let err = (lhs - 2.0 * kappa_h(n) * trace).abs();
            worst = worst.max(err);
            ensure(err <= 1e-10, || format!("N={n}: E<Mq,q> = {lhs}, 2κ_h tr M = {}", 2.0 * kappa_h(n) * trace))?;
        }
    }
    Ok(format!("7000 matrices, max error {worst:.1e}"))
}

fn max_cut() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let laplacian = |a: &[f64]| {
        // a[k] is the weight of every edge whose larger endpoint is k (0-based)
        let n = a.len();
        let mut m = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    m[i][j] = -a[i.max(j)];
                }
            }
        }
        for i in 0..n {
            m[i][i] = -(0..n).filter(|&j| j != i).map(|j| m[i][j]).sum::<f64>();
        }
        m
    };
    for n in 3..=10usize {
        let comb: Vec<f64> = (0..n).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        for _ in 0..200 {
            // integer weights keep every quadratic form exact
            let mut w: Vec<f64> = (1..n).map(|_| rng.random_range(0..1000) as f64).collect();
            w.sort_by(|x, y| y.partial_cmp(x).unwrap());
            let mut a = vec![0.0];
            a.extend(w);
            let m = laplacian(&a);
            let best = (0..1u64 << n).map(|b| quad_form(&m, &sign_vector(b, n))).fold(f64::MIN, f64::max);
            let c = quad_form(&m, &comb);
            ensure(best == c, || format!("N={n}: vertex max {best}, comb {c}, a = {a:?}"))?;
        }
        let mut a = vec![1.0; n];
        a[0] = 0.0;
        let m = laplacian(&a);
        let ratio = 0.5 * quad_form(&m, &comb) / (n - 1) as f64;
        ensure((ratio - kappa_m(n)).abs() <= 1e-12, || format!("N={n}: ratio {ratio}, κ_m {}", kappa_m(n)))?;
    }
    Ok("1600 weight sequences; equal weights reproduce κ_m for N = 3..10".into())
}

fn pde_residuals() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst_max = 0.0f64;
    for _ in 0..1000 {
        let n = rng.random_range(2..=8usize);
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-5.0..5.0)).collect();
        let t = -rng.random_range(0.1..20.0);
        let kappa = rng.random_range(0.5..4.0);
        let p = MaxPotentialParams::new(kappa).unwrap();
        let h = psi_hessian(&x, t, &p).unwrap();
        let max_diag = (0..n).map(|i| h[i][i]).fold(f64::MIN, f64::max);
        let r = (psi_time_deriv(&x, t, &p).unwrap() + kappa * max_diag).abs();
        worst_max = worst_max.max(r);
        ensure(r <= 1e-10, || format!("max residual {r} at x={x:?}, t={t}"))?;
    }
    let mut worst_f = 0.0f64;
    for k in 0..=10_000 {
        let z = k as f64 * 1e-3;
        let (f, f1, f2) = f_eval(z);
        let r = (f - f2 - z * f1).abs();
        worst_f = worst_f.max(r);
        ensure(r <= 1e-12, || format!("kernel residual {r} at z={z}"))?;
    }
    let mut worst_heat = 0.0f64;
    for _ in 0..100 {
        let n = rng.random_range(2..=4usize);
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
        let t = -rng.random_range(1.0..6.0);
        let kappa = rng.random_range(0.5..1.0);
        let p = HeatPotentialParams::with_tolerance(kappa, 1e-12).unwrap();
        let dt = 1e-3;
        let phi_t = (phi(&x, t + dt, &p).unwrap() - phi(&x, t - dt, &p).unwrap()) / (2.0 * dt);
        let h = phi_hessian_fd(&x, t, &p, 1e-3).unwrap();
        let lap: f64 = (0..n).map(|i| h[i][i]).sum();
        let r = (phi_t + kappa * lap).abs();
        worst_heat = worst_heat.max(r);
        ensure(r <= 1e-4, || format!("heat residual {r} at x={x:?}, t={t}"))?;
    }
    Ok(format!("max {worst_max:.1e}, kernel {worst_f:.1e}, heat {worst_heat:.1e}"))
}

fn gaussian_max() -> Check {
    let g2 = gaussian_max_mean(2);
    let g3 = gaussian_max_mean(3);
    ensure((g2 - 1.0 / PI.sqrt()).abs() <= 1e-8, || format!("N=2: {g2}"))?;
    ensure((g3 - 1.5 / PI.sqrt()).abs() <= 1e-8, || format!("N=3: {g3}"))?;
    Ok(format!("{g2:.12}, {g3:.12}"))
}

fn invariant_suite() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let hp = HeatPotentialParams::with_tolerance(0.8, 1e-12).unwrap();
    let mp = MaxPotentialParams::new(2.0).unwrap();
    let mut cases = 0;
    for _ in 0..200 {
        let n = rng.random_range(2..=5usize);
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-10.0..10.0)).collect();
        let t = -rng.random_range(0.5..10.0);
        let c = rng.random_range(-5.0..5.0);
        let shifted: Vec<f64> = x.iter().map(|v| v + c).collect();
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut rng);
        let px: Vec<f64> = perm.iter().map(|&i| x[i]).collect();

        let v = phi(&x, t, &hp).unwrap();
        let d = (phi(&shifted, t, &hp).unwrap() - v - c).abs();
        ensure(d <= 1e-9, || format!("heat translation {d} at {x:?}"))?;
        let d = (phi(&px, t, &hp).unwrap() - v).abs();
        ensure(d <= 1e-10, || format!("heat permutation {d} at {x:?}"))?;
        let g = phi_grad(&x, t, &hp).unwrap();
        let s: f64 = g.iter().sum();
        ensure(g.iter().all(|&gi| gi >= -1e-9) && (s - 1.0).abs() <= 1e-8, || format!("heat simplex {g:?}"))?;

        let v = psi(&x, t, &mp).unwrap();
        let d = (psi(&shifted, t, &mp).unwrap() - v - c).abs();
        ensure(d <= 1e-12 * (1.0 + v.abs()), || format!("max translation {d} at {x:?}"))?;
        let d = (psi(&px, t, &mp).unwrap() - v).abs();
        ensure(d <= 1e-12 * (1.0 + v.abs()), || format!("max permutation {d} at {x:?}"))?;
        let gm = psi_grad(&x, t, &mp).unwrap();
        let s: f64 = gm.iter().sum();
        ensure(gm.iter().all(|&gi| gi >= 0.0) && (s - 1.0).abs() <= 1e-12, || format!("max simplex {gm:?}"))?;

        // central differences of the values
        for i in 0..n {
            let h = 1e-4;
            let mut up = x.clone();
            let mut dn = x.clone();
            up[i] += h;
            dn[i] -= h;
            let fd = (phi(&up, t, &hp).unwrap() - phi(&dn, t, &hp).unwrap()) / (2.0 * h);
            ensure((fd - g[i]).abs() <= 1e-6, || format!("heat gradient {i}: fd {fd} vs {}", g[i]))?;
            let fd = (psi(&up, t, &mp).unwrap() - psi(&dn, t, &mp).unwrap()) / (2.0 * h);
            ensure((fd - gm[i]).abs() <= 1e-6, || format!("max gradient {i}: fd {fd} vs {}", gm[i]))?;
        }
        cases += 1;
    }
    Ok(format!("{cases} random points, N = 2..5"))
}

fn main() {
    let criteria: [(&str, fn() -> Check); 9] = [
        ("exp-weights bound and N=16 simulation", exp_weights),
        ("two-expert leading constants", two_expert_constants),
        ("three-expert max-potential constant", three_expert_constants),
        ("bound sandwiches against exact values", sandwiches),
        ("heat-adversary trace identity", trace_identity),
        ("comb vector attains the max cut", max_cut),
        ("PDE residuals", pde_residuals),
        ("Gaussian-max integrator", gaussian_max),
        ("potential invariants", invariant_suite),
    ];
    let mut failures = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("PASS  {} {name}: {detail}", k + 1),
            Err(detail) => {
                failures += 1;
                println!("FAIL  {} {name}: {detail}", k + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
