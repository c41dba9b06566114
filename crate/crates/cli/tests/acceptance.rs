//! Acceptance checks against published anchors. Prints one line per
//! criterion and exits non-zero if any fails.

use std::fs;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use num_complex::Complex64 as C64;

use hhgq::bands::Band;
use hhgq::calibration::{calibrate, reference_config, TARGET_ENTROPY};
use hhgq::currents::SpectrumTrace;
use hhgq::qoptics::{
    condition_full, condition_ir, fidelity, linear_entropy, wigner, wigner_value, Reference, ReducedState, WignerGrid,
    DEFAULT_PADDING,
};
use hhgq::validate::random_wigner_deviation;
use hhgq::{BandModel, Dephasing, Direction, Simulation, SimulationConfig};

type Res<T> = Result<T, Box<dyn std::error::Error>>;

struct Verdict {
    passed: bool,
    detail: String,
}

fn verdict(passed: bool, detail: String) -> Res<Verdict> {
    Ok(Verdict { passed, detail })
}

fn with(cfg: &SimulationConfig, overrides: &[String]) -> Res<SimulationConfig> {
    let mut c = cfg.clone();
    for o in overrides {
        c.apply_override(o)?;
    }
    c.validate()?;
    Ok(c)
}

fn field(e0: f64) -> String {
    format!("e0_v_per_angstrom={e0}")
}

fn t2(fs: &str) -> String {
    format!("t2_fs={fs}")
}

fn chi(cfg: &SimulationConfig) -> Res<Vec<C64>> {
    Ok(Simulation::new(cfg.clone())?.run()?.displacements.total())
}

fn spectrum(cfg: &SimulationConfig) -> Res<(SpectrumTrace, f64, f64)> {
    let sim = Simulation::new(cfg.clone())?;
    let out = sim.run()?;
    let (lo, hi) = sim.gap_orders();
    Ok((sim.spectrum(&out), lo, hi))
}

/// Minimum of the Wigner function: coarse map, then successive local zooms.
fn deepest(r: &ReducedState) -> f64 {
    let grid = WignerGrid::covering(r, DEFAULT_PADDING, 121);
    let (mut best, mut at) = (f64::INFINITY, grid.center);
    for ip in 0..grid.n {
        for ix in 0..grid.n {
            let b = grid.point(ix, ip);
            let w = wigner_value(r, b);
            if w < best {
                best = w;
                at = b;
            }
        }
    }
    let mut half = grid.step();
    for _ in 0..30 {
        let local = WignerGrid::new(at, half, 9);
        for ip in 0..local.n {
            for ix in 0..local.n {
                let b = local.point(ix, ip);
                let w = wigner_value(r, b);
                if w < best {
                    best = w;
                    at = b;
                }
            }
        }
        half *= 0.5;
    }
    best
}

fn monotone(v: &[f64], increasing: bool) -> bool {
    v.windows(2).all(|w| if increasing { w[1] > w[0] } else { w[1] < w[0] })
}

fn band_arithmetic(_: &SimulationConfig) -> Res<Verdict> {
    let mut worst: f64 = 0.0;
    for direction in [Direction::GammaM, Direction::GammaA] {
        let cfg = SimulationConfig { direction, ..SimulationConfig::default() };
        let m: BandModel = cfg.band_model().ok_or("no band model")?;
        worst = worst
            .max(m.energy(Band::Valence, 0.0).abs())
            .max((m.energy(Band::Conduction, 0.0) - m.energy(Band::Valence, 0.0) - cfg.band_gap).abs());
    }
    let gm = SimulationConfig::default().band_model().ok_or("no band model")?;
    let width = gm.valence_bandwidth();
    verdict(
        worst <= 1e-12 && (width - 0.1398).abs() < 5e-5,
        format!("Γ offsets {worst:.1e}, Γ-M valence bandwidth {width:.5} a.u."),
    )
}

fn solver_oracle(base: &SimulationConfig) -> Res<Verdict> {
    let cfg = with(base, &["n_k=21".into(), t2("inf")])?;
    let sim = Simulation::new(cfg)?;
    let mut worst: f64 = 0.0;
    for k in sim.kgrid().momenta() {
        let tdse = sim.propagator().solve_tdse(sim.model(), k)?.into_bloch();
        let sbe = sim.propagator().solve_sbe(sim.model(), k, Dephasing::Infinite)?;
        for (a, b) in [(&tdse.n_c, &sbe.n_c), (&tdse.n_v, &sbe.n_v)] {
            worst = a.iter().zip(b.iter()).map(|(x, y)| (x - y).abs()).fold(worst, f64::max);
        }
    }
    verdict(worst <= 1e-6, format!("sup |Δn| = {worst:.2e} over 21 momenta"))
}

fn spectrum_structure(base: &SimulationConfig) -> Res<Verdict> {
    let (s, lo, hi) = spectrum(&with(base, &[field(0.5), t2("1")])?)?;
    let odd = SpectrumTrace::odd_orders(lo, hi);
    let db = s.total_db();

    let mut worst_contrast = f64::INFINITY;
    let mut misplaced = 0;
    for &q in &odd {
        let (at, _) = s.harmonic_peak(&db, q);
        if (at - q).abs() > 0.25 {
            misplaced += 1;
        }
        worst_contrast = worst_contrast.min(s.harmonic_contrast_db(q));
    }
    let a = misplaced == 0 && worst_contrast >= 10.0;

    let inter_wins = odd
        .iter()
        .filter(|&&q| s.harmonic_peak(&s.interband, q).1 > s.harmonic_peak(&s.intraband, q).1)
        .count();
    let b = inter_wins == odd.len();

    let level = |x: f64| s.peak_in(&db, x - 1.0, x + 1.0);
    let fall = level(hi) - level(hi + 4.0);
    let c = fall >= 20.0;
    verdict(
        a && b && c,
        format!(
            "(a) {} odd peaks in [{lo:.1}, {hi:.1}], {misplaced} misplaced, weakest contrast {worst_contrast:.1} dB: {}; \
             (b) interband ahead at {inter_wins}/{}: {}; (c) fall over 4 orders past {hi:.1}: {fall:.1} dB: {}",
            odd.len(),
            pass(a),
            odd.len(),
            pass(b),
            pass(c)
        ),
    )
}

fn cutoff_linearity(base: &SimulationConfig) -> Res<Verdict> {
    let fields = [0.25, 0.35, 0.45];
    let mut cut = Vec::new();
    for e0 in fields {
        let (s, lo, hi) = spectrum(&with(base, &[field(e0), t2("1")])?)?;
        cut.push(s.cutoff_order(lo, hi, 20.0).ok_or("no cutoff below the Nyquist order")?);
    }
    let n = fields.len() as f64;
    let (mx, my) = (fields.iter().sum::<f64>() / n, cut.iter().sum::<f64>() / n);
    let sxy: f64 = fields.iter().zip(&cut).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = fields.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = cut.iter().map(|y| (y - my).powi(2)).sum();
    let r2 = if syy > 0.0 { sxy * sxy / (sxx * syy) } else { 0.0 };
    verdict(
        monotone(&cut, true) && r2 > 0.9,
        format!("cutoff orders {:.2} / {:.2} / {:.2}, R² = {r2:.3}", cut[0], cut[1], cut[2]),
    )
}

fn entropy_anchors(base: &SimulationConfig) -> Res<Verdict> {
    let reference = reference_config(base);
    let s1 = linear_entropy(&condition_full(&chi(&reference)?)?, 1)?;
    let a = (s1 - 0.44).abs() <= 0.05;

    // enough modes to see three orders past the largest gap
    let sim = Simulation::new(reference.clone())?;
    let hi = sim.gap_orders().1;
    let wide = with(&reference, &[format!("q_cutoff={}", hi.floor() as usize + 5)])?;
    let state = condition_full(&chi(&wide)?)?;
    let s: Vec<f64> = (1..=state.modes()).map(|q| linear_entropy(&state, q)).collect::<Result<_, _>>()?;
    let settled = (0..s.len()).rev().take_while(|&i| s[i] < 0.01).last().map_or(s.len() + 1, |i| i + 1);
    let b = (settled as f64) <= hi + 3.0 && s.iter().skip(hi.ceil() as usize + 2).all(|&v| v < 0.01);

    let fields: Vec<f64> = (0..=16).map(|i| 0.2 + 0.025 * i as f64).collect();
    let mut s3 = Vec::new();
    for &e0 in &fields {
        let cfg = with(&reference, &[field(e0), t2("1")])?;
        s3.push(linear_entropy(&condition_full(&chi(&cfg)?)?, 3)?);
    }
    let i = (0..s3.len()).max_by(|a, b| s3[*a].total_cmp(&s3[*b])).unwrap_or(0);
    let interior = i > 0 && i + 1 < s3.len();
    let peak = if interior {
        // vertex of the parabola through the three samples around the maximum
        let (y0, y1, y2) = (s3[i - 1], s3[i], s3[i + 1]);
        fields[i] + 0.025 * 0.5 * (y0 - y2) / (y0 - 2.0 * y1 + y2)
    } else {
        fields[i]
    };
    let c = interior && (peak - 0.38).abs() <= 0.05;
    verdict(
        a && b && c,
        format!(
            "S(q=1) = {s1:.3}: {}; S < 0.01 from q = {settled} (largest gap order {hi:.2}): {}; \
             S(q=3) vs E0 peaks at {peak:.3} V/Å{}: {}",
            pass(a),
            pass(b),
            if interior { "" } else { " (endpoint)" },
            pass(c)
        ),
    )
}

fn fidelity_crossover(base: &SimulationConfig) -> Res<Verdict> {
    let fields: Vec<f64> = (0..=8).map(|i| 0.2 + 0.05 * i as f64).collect();
    let (mut fock, mut coh) = (Vec::new(), Vec::new());
    for &e0 in &fields {
        let cfg = with(base, &[field(e0), t2("1"), "direction=gm".into(), "n_z=6e6".into()])?;
        let d = chi(&cfg)?;
        let state = condition_ir(&d)?;
        fock.push(fidelity(&state, &Reference::FockOne)?);
        coh.push(fidelity(&state, &Reference::Coherent(d[0]))?);
    }
    let last = fields.len() - 1;
    let ends = (fock[0] - 0.98).abs() <= 0.1
        && (coh[0] - 0.05).abs() <= 0.1
        && (fock[last] - 0.09).abs() <= 0.1
        && (coh[last] - 0.98).abs() <= 0.1;
    let shape = monotone(&fock, false) && monotone(&coh, true);
    verdict(
        ends && shape,
        format!(
            "F_fock {:.3} → {:.3}, F_coherent {:.3} → {:.3}, monotone: {}, endpoints: {}",
            fock[0],
            fock[last],
            coh[0],
            coh[last],
            pass(shape),
            pass(ends)
        ),
    )
}

fn wigner_suite(base: &SimulationConfig) -> Res<Verdict> {
    let oracle = random_wigner_deviation(100)?;
    let reference = reference_config(base);
    let mut integrals: Vec<f64> = Vec::new();
    let mut probe = |cfg: &SimulationConfig| -> Res<(f64, f64)> {
        let d = chi(cfg)?;
        let state = condition_ir(&d)?;
        let r = state.reduced(1)?;
        integrals.push(wigner(&state, 1, WignerGrid::covering(&r, DEFAULT_PADDING, 201))?.integral());
        Ok((d[0].norm(), deepest(&r)))
    };
    let (chi_inf, min_inf) = probe(&reference)?;
    let (chi_1, min_1) = probe(&with(&reference, &[t2("1")])?)?;
    let worst_integral = integrals.iter().map(|v| (v - 1.0).abs()).fold(0.0, f64::max);
    let ok = oracle <= 1e-8 && worst_integral <= 1e-3 && min_inf < -0.01 && chi_1 > chi_inf && min_1 > min_inf;
    verdict(
        ok,
        format!(
            "oracle gap {oracle:.1e}, integral error {worst_integral:.1e}, T2 = ∞: |χ₁| {chi_inf:.4}, min W {min_inf:.5}; \
             T2 = 1 fs: |χ₁| {chi_1:.4}, min W {min_1:.5}"
        ),
    )
}

fn direction_contrast(base: &SimulationConfig) -> Res<Verdict> {
    let reference = reference_config(base);
    let gm = chi(&reference)?[0].norm();
    let ga = chi(&with(&reference, &["direction=ga".into()])?)?[0].norm();
    verdict(gm > ga, format!("|χ₁| Γ-M {gm:.4e} vs Γ-A {ga:.4e}"))
}

fn determinism(_: &SimulationConfig) -> Res<Verdict> {
    let root = std::env::temp_dir().join(format!("hhgq-acceptance-{}", std::process::id()));
    let mut files = Vec::new();
    for threads in ["1", "8"] {
        let dir = root.join(threads);
        let status = Command::new(env!("CARGO_BIN_EXE_hhgq"))
            .args(["spectrum", "--threads", threads, "--out"])
            .arg(&dir)
            .output()?
            .status;
        if !status.success() {
            return Err(format!("spectrum run with {threads} threads exited with {status}").into());
        }
        files.push((fs::read(dir.join("spectrum.csv"))?, fs::read(dir.join("current.csv"))?));
    }
    let _ = fs::remove_dir_all(&root);
    verdict(files[0] == files[1], format!("spectrum.csv and current.csv identical: {}", files[0] == files[1]))
}

fn pass(ok: bool) -> &'static str {
    if ok {
        "pass"
    } else {
        "fail"
    }
}

type Criterion = (&'static str, u64, fn(&SimulationConfig) -> Res<Verdict>);

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("1 band arithmetic", 1, band_arithmetic),
        ("2 solver oracle", 60, solver_oracle),
        ("3 spectrum structure", 300, spectrum_structure),
        ("4 cutoff linearity", 900, cutoff_linearity),
        ("5 entropy anchors", 1200, entropy_anchors),
        ("6 fidelity crossover", 900, fidelity_crossover),
        ("7 wigner suite", 300, wigner_suite),
        ("8 direction contrast", 600, direction_contrast),
        ("9 determinism", 600, determinism),
    ];
    let base = SimulationConfig::default();
    let cal = calibrate(&base, TARGET_ENTROPY).map(|c| c.g0);
    let mut failed = 0;
    for (name, budget, check) in criteria {
        let start = Instant::now();
        let result = match &cal {
            Ok(g0) => with(&base, &[format!("g0={g0:e}")]).and_then(|cfg| check(&cfg)),
            Err(e) => Err(format!("calibration failed: {e}").into()),
        };
        let elapsed = start.elapsed();
        let in_time = elapsed <= Duration::from_secs(budget);
        let (ok, detail) = match result {
            Ok(v) => (v.passed && in_time, v.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !ok {
            failed += 1;
        }
        println!(
            "{} criterion {name}: {detail} [{:.1} s of {budget} s]",
            if ok { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64()
        );
    }
    println!("acceptance: {} of 9 criteria pass", 9 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
