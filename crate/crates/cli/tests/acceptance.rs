//! Acceptance run: one line per criterion, non-zero exit if any fails.

use std::panic;
use std::process::Command;
use std::time::Instant;

use qcap_core::channels::{
    apply, complementary, compose, dephasing, erasure, flagged_mixture, random_channel, rocket_conditional,
    rocket_unitaries, tensor, FlaggedBranch,
};
use qcap_core::experiments::{
    bell_gram, build_private_input, env_branches, env_experiment, env_n1n1_value, env_rate_odd, erasure_branch,
    private_branches, private_composite, region_delta, region_scan, EnvParams, PrivateParams, RegionMode,
    PRIVATE_CHANNEL_INPUTS,
};
use qcap_core::infomeasures::{coherent_information, coherent_information_with, Evaluation};
use qcap_core::qmat::random::{random_density, random_pure_state, rng_from_seed};
use qcap_core::qmat::shannon_entropy;
use qcap_core::Exec;

const SEED: u64 = 42;
const SAMPLES: usize = 4;

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn erasure_branch_values() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for d in [2, 3] {
        let input = build_private_input(d).map_err(|e| e.to_string())?;
        for p in [0.0, 0.25, 0.5, 0.75, 1.0] {
            let e = erasure_branch(d, p).map_err(|e| e.to_string())?;
            let q = coherent_information(&tensor(&e, &e), &input, &PRIVATE_CHANNEL_INPUTS)
                .map_err(|e| e.to_string())?
                .value;
            let err = (q - (1.0 - 2.0 * p) * 2.0 * (d as f64).log2()).abs();
            worst = worst.max(err);
            ensure(err <= 1e-6, || format!("d={d} p={p}: error {err:e}"))?;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(secs < 10.0, || format!("took {secs:.2} s"))?;
    Ok(format!("max error {worst:.1e}, {secs:.2} s"))
}

fn rocket_branch_values() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut worst_std: f64 = 0.0;
    for d in [2, 3] {
        let input = build_private_input(d).map_err(|e| e.to_string())?;
        for p in [0.0, 0.5, 1.0] {
            let e = erasure_branch(d, p).map_err(|e| e.to_string())?;
            let target = (2.0 - 3.0 * p) * (d as f64).log2();
            for swap in [false, true] {
                let mut vals = Vec::new();
                for (u, v) in rocket_unitaries(d, SAMPLES, SEED) {
                    let r = rocket_conditional(d, &u, &v).map_err(|e| e.to_string())?;
                    let ch = if swap { tensor(&e, &r) } else { tensor(&r, &e) };
                    let q = coherent_information(&ch, &input, &PRIVATE_CHANNEL_INPUTS)
                        .map_err(|e| e.to_string())?
                        .value;
                    let err = (q - target).abs();
                    worst = worst.max(err);
                    ensure(err <= 1e-6, || format!("d={d} p={p}: error {err:e}"))?;
                    vals.push(q);
                }
                let mean = vals.iter().sum::<f64>() / vals.len() as f64;
                let std = (vals.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / vals.len() as f64).sqrt();
                worst_std = worst_std.max(std);
                ensure(std < 1e-7, || format!("d={d} p={p}: sample std {std:e}"))?;
            }
        }
    }
    Ok(format!(
        "max error {worst:.1e}, max sample std {worst_std:.1e} (both orders)"
    ))
}

fn dephased_double_rocket() -> Outcome {
    let mut report = Vec::new();
    for d in [2, 3] {
        let params = PrivateParams {
            d,
            q: 0.5,
            p: 0.5,
            n_samples: SAMPLES,
            seed: SEED,
        };
        let b = private_branches(&params, Exec::default()).map_err(|e| e.to_string())?;
        let deph = b.rr_dephased.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let raw_min = b.rr.iter().copied().fold(f64::INFINITY, f64::min);
        ensure(deph <= 1e-6, || format!("d={d}: dephased value {deph:e}"))?;
        ensure(raw_min >= -1e-6, || format!("d={d}: raw RR {raw_min:e}"))?;
        let raw_mean = b.rr.iter().sum::<f64>() / b.rr.len() as f64;
        report.push(format!(
            "d={d} dephased {deph:.1e}, raw RR min {raw_min:.4} mean {raw_mean:.4}"
        ));
    }
    // data processing: each raw pair is at least its dephased version
    let d = 2;
    let (u, v) = &rocket_unitaries(d, 1, SEED)[0];
    let r = rocket_conditional(d, u, v).map_err(|e| e.to_string())?;
    let dr = compose(&dephasing(d), &r).map_err(|e| e.to_string())?;
    let input = build_private_input(d).map_err(|e| e.to_string())?;
    let raw = coherent_information(&tensor(&r, &r), &input, &PRIVATE_CHANNEL_INPUTS).map_err(|e| e.to_string())?;
    let deph = coherent_information(&tensor(&dr, &dr), &input, &PRIVATE_CHANNEL_INPUTS).map_err(|e| e.to_string())?;
    ensure(raw.value >= deph.value - 1e-6, || "data processing violated".into())?;
    Ok(report.join("; "))
}

fn composite_grid() -> Outcome {
    let d = 2;
    let grid = [0.0, 0.25, 0.5, 0.75, 1.0];
    let mut worst: f64 = 0.0;
    let mut worst_raw: f64 = 0.0;
    let mut worst_dense: f64 = 0.0;
    let mut rr_mean = 0.0;
    for q in grid {
        for p in grid {
            let params = PrivateParams {
                d,
                q,
                p,
                n_samples: SAMPLES,
                seed: SEED,
            };
            let (composite, dense) = private_composite(&params, true, Exec::default()).map_err(|e| e.to_string())?;
            let b = private_branches(&params, Exec::default()).map_err(|e| e.to_string())?;
            rr_mean = b.rr.iter().sum::<f64>() / b.rr.len() as f64;
            let formula = q * ((1.0 - q) * (2.0 - 3.0 * p) + q * (1.0 - 2.0 * p)) * (d as f64).log2();
            let measured_rr = 0.5 * (1.0 - q).powi(2) * rr_mean;
            let err = (composite / 2.0 - (formula + measured_rr)).abs();
            worst = worst.max(err);
            worst_raw = worst_raw.max((composite / 2.0 - formula).abs());
            worst_dense = worst_dense.max((dense.unwrap_or(f64::NAN) - composite).abs());
            ensure(err <= 1e-6, || format!("(q,p)=({q},{p}): error {err:e}"))?;
        }
    }
    ensure(worst_dense <= 1e-6, || format!("blockwise vs dense {worst_dense:e}"))?;
    Ok(format!(
        "max error {worst:.1e} with measured RR mean {rr_mean:.4}; deviation from formula with RR set to 0 is {worst_raw:.4}; dense agrees to {worst_dense:.1e}"
    ))
}

fn region_shape() -> Outcome {
    let asym = RegionMode::Asymptotic;
    let start = Instant::now();
    let scan = region_scan(101, asym, Exec::default()).map_err(|e| e.to_string())?;
    let secs = start.elapsed().as_secs_f64();
    let centre = region_delta(0.5, 0.5, asym);
    let mut failures = Vec::new();
    if centre != 0.125 {
        failures.push(format!("delta(0.5,0.5) = {centre}"));
    }
    // open neighbourhood of the centre
    let at = |i: usize, j: usize| scan[i * 101 + j].delta;
    let ball = (45..=55).all(|i| (45..=55).all(|j| at(i, j) > 0.0));
    if !ball {
        failures.push("delta not positive around (0.5, 0.5)".into());
    }
    let low_p: Vec<_> = scan.iter().filter(|r| r.p <= 0.25 && r.delta > 0.0).collect();
    if let Some(worst) = low_p.iter().max_by(|a, b| a.delta.total_cmp(&b.delta)) {
        failures.push(format!(
            "{} points with p <= 0.25 have delta > 0, largest {:.4} at (q,p)=({},{})",
            low_p.len(),
            worst.delta,
            worst.q,
            worst.p
        ));
    }
    let edges = scan
        .iter()
        .filter(|r| (r.q == 0.0 || r.q == 1.0) && r.delta > 0.0)
        .count();
    if edges > 0 {
        failures.push(format!("{edges} boundary points with delta > 0"));
    }
    if secs >= 1.0 {
        failures.push(format!("101x101 scan took {secs:.3} s"));
    }
    if failures.is_empty() {
        Ok(format!(
            "delta(0.5,0.5)=0.125, positive neighbourhood, boundaries non-positive, scan {:.1} ms",
            secs * 1e3
        ))
    } else {
        Err(failures.join("; "))
    }
}

fn env_branch_values() -> Outcome {
    let v = env_branches(3, Exec::default()).map_err(|e| e.to_string())?;
    let l3 = 3f64.log2();
    let targets = [l3, 2.0 * l3, 2.0 * l3, 0.0];
    let names = ["N1N1", "N1N2", "N2N1", "N2N2"];
    let mut worst: f64 = 0.0;
    for ((name, x), t) in names.iter().zip(v).zip(targets) {
        let err = (x - t).abs();
        worst = worst.max(err);
        ensure(err <= 1e-6, || format!("d=3 {name}: {x} vs {t}"))?;
    }
    for d in [2, 4] {
        let x = env_branches(d, Exec::default()).map_err(|e| e.to_string())?[0];
        let err = (x - env_n1n1_value(d)).abs();
        worst = worst.max(err);
        ensure(err <= 1e-6, || format!("d={d} N1N1: {x}"))?;
    }
    Ok(format!("max error {worst:.1e}"))
}

fn env_total() -> Outcome {
    let mut worst: f64 = 0.0;
    for p in [0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0] {
        let r = env_experiment(&EnvParams { d: 3, p }).map_err(|e| e.to_string())?;
        let err = (r.numeric["rate"] - env_rate_odd(3, p)).abs();
        worst = worst.max(err);
        ensure(err <= 1e-6, || format!("p={p}: rate error {err:e}"))?;
    }
    let mut flagged = Vec::new();
    for k in 0..=20 {
        let p = k as f64 / 20.0;
        let r = env_experiment(&EnvParams { d: 3, p }).map_err(|e| e.to_string())?;
        let flag = r.numeric["nonconvex"] == 1.0;
        let expected = p > 0.0 && p < 2.0 / 3.0;
        ensure(flag == expected, || format!("p={p}: flag {flag}, expected {expected}"))?;
        if flag {
            flagged.push(p);
        }
    }
    Ok(format!(
        "rate max error {worst:.1e}; flag set for {} of 21 sampled p, exactly those in (0, 2/3)",
        flagged.len()
    ))
}

fn bell_grams() -> Outcome {
    let mut worst: f64 = 0.0;
    for d in 2..=5 {
        let g = bell_gram(d).map_err(|e| e.to_string())?;
        let dev = g.rule_deviation();
        worst = worst.max(dev);
        ensure(dev <= 1e-8, || format!("d={d}: deviation {dev:e}"))?;
    }
    Ok(format!("max deviation {worst:.1e}"))
}

fn property_suites() -> Outcome {
    const N: u64 = 100;
    const ATOL: f64 = 1e-7;
    let mut violations = [0usize; 5];
    for seed in 0..N {
        let mut rng = rng_from_seed(90_000 + seed);
        let din = 2 + (seed % 3) as usize;
        let dout = 2 + (seed / 3 % 2) as usize;
        let nk = (1 + (seed % 4) as usize).max(din.div_ceil(dout));
        let ch = random_channel(din, dout, nk, &mut rng);
        let other = random_channel(din, 2, 2, &mut rng);
        let p = (seed as f64 + 0.5) / N as f64;
        let mix = flagged_mixture(vec![
            FlaggedBranch::new(p, ch.clone()),
            FlaggedBranch::new(1.0 - p, other.clone()),
        ])
        .map_err(|e| e.to_string())?;
        let complete = [
            ch.completeness_error(),
            tensor(&ch, &other).completeness_error(),
            complementary(&ch).completeness_error(),
            mix.completeness_error(),
            erasure(din, p).map_err(|e| e.to_string())?.completeness_error(),
        ];
        if complete.iter().any(|e| *e > ATOL) {
            violations[0] += 1;
        }

        let rho = random_density(&[din, dout], 1 + (seed % 5) as usize, &mut rng);
        let hab = rho.entropy().map_err(|e| e.to_string())?;
        let ha = rho
            .partial_trace(&[0])
            .and_then(|r| r.entropy())
            .map_err(|e| e.to_string())?;
        let hb = rho
            .partial_trace(&[1])
            .and_then(|r| r.entropy())
            .map_err(|e| e.to_string())?;
        if hab < -ATOL || hab > ((din * dout) as f64).log2() + ATOL {
            violations[1] += 1;
        }
        if hab > ha + hb + ATOL || hab < (ha - hb).abs() - ATOL {
            violations[2] += 1;
        }

        let sigma = random_density(&[din], 2, &mut rng);
        let dense = apply(&mix, &sigma)
            .and_then(|r| r.entropy())
            .map_err(|e| e.to_string())?;
        let ha_ = apply(&ch, &sigma)
            .and_then(|r| r.entropy())
            .map_err(|e| e.to_string())?;
        let hb_ = apply(&other, &sigma)
            .and_then(|r| r.entropy())
            .map_err(|e| e.to_string())?;
        let blocks = shannon_entropy(&[p, 1.0 - p]) + p * ha_ + (1.0 - p) * hb_;
        let phi = random_pure_state(&[din, din], &mut rng);
        let bw = coherent_information_with(&mix, &phi, &[1], Evaluation::Blockwise, Exec::Sequential)
            .map_err(|e| e.to_string())?;
        let dn = coherent_information_with(&mix, &phi, &[1], Evaluation::Dense, Exec::Sequential)
            .map_err(|e| e.to_string())?;
        if (dense - blocks).abs() > ATOL || (bw.value - dn.value).abs() > ATOL {
            violations[3] += 1;
        }

        let psi = random_pure_state(&[din], &mut rng).to_density();
        let h_out = apply(&ch, &psi).and_then(|r| r.entropy()).map_err(|e| e.to_string())?;
        let h_env = apply(&complementary(&ch), &psi)
            .and_then(|r| r.entropy())
            .map_err(|e| e.to_string())?;
        if (h_out - h_env).abs() > ATOL {
            violations[4] += 1;
        }
    }
    let names = [
        "completeness",
        "entropy bounds",
        "Araki-Lieb/subadditivity",
        "blockwise vs dense",
        "complementary symmetry",
    ];
    let summary: Vec<String> = names.iter().zip(violations).map(|(n, v)| format!("{n} {v}")).collect();
    ensure(violations.iter().all(|v| *v == 0), || summary.join(", "))?;
    Ok(format!("{N} instances each, violations: {}", summary.join(", ")))
}

fn determinism() -> Outcome {
    let runs: [&[&str]; 7] = [
        &[
            "verify-private",
            "--d",
            "2",
            "--q",
            "0.5",
            "--p",
            "0.25",
            "--samples",
            "4",
            "--seed",
            "42",
        ],
        &[
            "verify-private",
            "--d",
            "3",
            "--q",
            "1.0",
            "--p",
            "0.25",
            "--samples",
            "2",
            "--seed",
            "7",
        ],
        &["verify-env", "--d", "3", "--p", "0.5"],
        &["scan-region", "--grid", "41", "--mode", "asymptotic"],
        &[
            "scan-region",
            "--grid",
            "21",
            "--mode",
            "finite",
            "--d",
            "3",
            "--format",
            "svg",
        ],
        &["bell-gram", "--d", "5"],
        &["functional", "--d", "2", "--q", "0.5", "--p", "0.5", "--seed", "42"],
    ];
    for args in runs {
        let run = || {
            Command::new(env!("CARGO_BIN_EXE_qcap"))
                .args(args)
                .env_remove("QCAP_ATOL")
                .output()
                .map_err(|e| e.to_string())
        };
        let (a, b) = (run()?, run()?);
        ensure(!a.stdout.is_empty(), || format!("{}: empty output", args[0]))?;
        ensure(a.stdout == b.stdout && a.status == b.status, || {
            format!("{} differs between runs", args.join(" "))
        })?;
    }
    Ok(format!("{} commands byte-identical across two runs", runs.len()))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 10] = [
        ("erasure branch", erasure_branch_values),
        ("rocket branch", rocket_branch_values),
        ("dephased double rocket", dephased_double_rocket),
        ("composite", composite_grid),
        ("region scan", region_shape),
        ("environment-assisted branches", env_branch_values),
        ("environment-assisted total", env_total),
        ("Bell Gram matrices", bell_grams),
        ("property suites", property_suites),
        ("determinism", determinism),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = panic::catch_unwind(check).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {detail}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
