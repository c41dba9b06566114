use std::fmt;
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde_json::json;

use hhgq::calibration::{calibrate, CalibrationError};
use hhgq::config::load_config;
use hhgq::qoptics::{
    condition_full, condition_ir, fidelity, linear_entropy, wigner, Component, Reference, StateError, WignerGrid,
    DEFAULT_PADDING,
};
use hhgq::validate::{run_suite, Mutation};
use hhgq::{ConfigError, Simulation, SimulationConfig};

use crate::args::{
    CalibrateArgs, Common, ComponentArg, EntropyArgs, EntropyAxis, FidelityArgs, Plain, ScanAxis, ValidateArgs,
    WignerArgs,
};
use crate::manifest::Manifest;

/// Highest harmonic order written to `spectrum.csv`.
pub const SPECTRUM_MAX_ORDER: f64 = 60.0;

#[derive(Debug)]
pub enum Failure {
    Config(String),
    Numerical(String),
    Io(String),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Config(_) => 1,
            Failure::Numerical(_) => 2,
            Failure::Io(_) => 3,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Config(m) => write!(f, "config error: {m}"),
            Failure::Numerical(m) => write!(f, "numerical failure: {m}"),
            Failure::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl From<hhgq::Error> for Failure {
    fn from(e: hhgq::Error) -> Self {
        match e {
            hhgq::Error::Config(c) => Failure::Config(c.to_string()),
            hhgq::Error::Io(io) => Failure::Io(io.to_string()),
            other => Failure::Numerical(other.to_string()),
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        match e {
            ConfigError::Io { .. } => Failure::Io(e.to_string()),
            other => Failure::Config(other.to_string()),
        }
    }
}

impl From<StateError> for Failure {
    fn from(e: StateError) -> Self {
        Failure::Numerical(format!("qoptics: {e}"))
    }
}

impl From<CalibrationError> for Failure {
    fn from(e: CalibrationError) -> Self {
        match e {
            CalibrationError::Pipeline(p) => p.into(),
            other => Failure::Numerical(format!("calibration: {other}")),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn load(common: &Common) -> Result<SimulationConfig, Failure> {
    let mut cfg = match &common.config {
        Some(path) => load_config(path)?,
        None => SimulationConfig::default(),
    };
    for o in &common.overrides {
        cfg.apply_override(o)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn out_dir(common: &Common) -> Result<PathBuf, Failure> {
    fs::create_dir_all(&common.out).map_err(|e| Failure::Io(format!("{}: {e}", common.out.display())))?;
    Ok(common.out.clone())
}

fn create(dir: &Path, name: &str) -> Result<(PathBuf, BufWriter<File>), Failure> {
    let path = dir.join(name);
    let file = File::create(&path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    Ok((path, BufWriter::new(file)))
}

fn component(c: ComponentArg) -> Component {
    match c {
        ComponentArg::Total => Component::Total,
        ComponentArg::Inter => Component::Interband,
        ComponentArg::Intra => Component::Intraband,
    }
}

fn set_axis(cfg: &SimulationConfig, axis: ScanAxis, value: f64) -> Result<SimulationConfig, Failure> {
    let mut c = cfg.clone();
    match axis {
        ScanAxis::E0 => c.apply_override(&format!("e0_v_per_angstrom={value}"))?,
        ScanAxis::T2 => c.apply_override(&format!("t2_fs={value}"))?,
    }
    Ok(c)
}

fn axis_header(axis: ScanAxis) -> &'static str {
    match axis {
        ScanAxis::E0 => "e0_v_per_angstrom",
        ScanAxis::T2 => "t2_fs",
    }
}

pub fn spectrum(args: Plain) -> Outcome {
    let cfg = load(&args.common)?;
    let dir = out_dir(&args.common)?;
    let mut manifest = Manifest::new("spectrum", &cfg);
    let sim = Simulation::new(cfg)?;
    manifest.describe(&sim);
    manifest.stage("setup");
    let run = sim.run()?;
    manifest.derive("max_drift", json!(run.max_drift));
    manifest.stage("solve");
    let spec = sim.spectrum(&run);
    manifest.stage("spectrum");
    let (path, mut w) = create(&dir, "spectrum.csv")?;
    spec.write_csv(SPECTRUM_MAX_ORDER, &mut w)?;
    w.flush()?;
    manifest.output(&path);
    let (path, mut w) = create(&dir, "current.csv")?;
    run.currents.write_csv(sim.grid(), &mut w)?;
    w.flush()?;
    manifest.output(&path);
    manifest.stage("write");
    manifest.write(&dir)?;
    let (lo, hi) = sim.gap_orders();
    println!("gap orders {lo:.2} .. {hi:.2}; wrote {}", dir.display());
    Ok(())
}

pub fn displacement(args: Plain) -> Outcome {
    let cfg = load(&args.common)?;
    let dir = out_dir(&args.common)?;
    let mut manifest = Manifest::new("displacement", &cfg);
    let sim = Simulation::new(cfg)?;
    manifest.describe(&sim);
    let run = sim.run()?;
    manifest.stage("solve");
    let (path, mut w) = create(&dir, "displacements.csv")?;
    run.displacements.write_csv(&mut w)?;
    w.flush()?;
    manifest.output(&path);
    manifest.write(&dir)?;
    println!("|chi_1| = {:.6e}", run.displacements.total()[0].norm());
    Ok(())
}

pub fn wigner_map(args: WignerArgs) -> Outcome {
    let cfg = load(&args.common)?;
    let dir = out_dir(&args.common)?;
    let mut manifest = Manifest::new("wigner", &cfg);
    let sim = Simulation::new(cfg)?;
    manifest.describe(&sim);
    let run = sim.run()?;
    manifest.stage("solve");
    let which = component(args.component);
    let amplitudes = run.displacements.component(which);
    let state = condition_ir(&amplitudes)?;
    let reduced = state.reduced(1)?;
    let grid = match args.half {
        Some(h) => WignerGrid::new(Default::default(), h, args.points.max(2)),
        None => WignerGrid::covering(&reduced, DEFAULT_PADDING, args.points.max(2)),
    };
    let map = wigner(&state, 1, grid)?;
    manifest.stage("wigner");
    if map.support_warning {
        eprintln!("warning: grid does not reach 4 units beyond every amplitude");
    }
    let (path, mut w) = create(&dir, "wigner.csv")?;
    map.write_csv(&mut w)?;
    w.flush()?;
    manifest.output(&path);
    manifest.derive("component", json!(which.as_str()));
    manifest.derive("chi1_re", json!(amplitudes[0].re));
    manifest.derive("chi1_im", json!(amplitudes[0].im));
    manifest.derive("wigner_min", json!(map.min()));
    manifest.derive("wigner_integral", json!(map.integral()));
    manifest.write(&dir)?;
    println!(
        "{}: |chi_1| = {:.4e}, min W = {:.4e}, integral = {:.6}",
        which.as_str(),
        amplitudes[0].norm(),
        map.min(),
        map.integral()
    );
    Ok(())
}

pub fn fidelity_scan(args: FidelityArgs) -> Outcome {
    let cfg = load(&args.common)?;
    let dir = out_dir(&args.common)?;
    let mut manifest = Manifest::new("fidelity", &cfg);
    let (path, mut w) = create(&dir, "fidelity_scan.csv")?;
    writeln!(w, "{},f_fock,f_coherent", axis_header(args.axis))?;
    for v in args.range.values(args.axis) {
        let sim = Simulation::new(set_axis(&cfg, args.axis, v)?)?;
        let d = sim.run()?.displacements.total();
        let state = condition_ir(&d)?;
        let f1 = fidelity(&state, &Reference::FockOne)?;
        let fc = fidelity(&state, &Reference::Coherent(d[0]))?;
        writeln!(w, "{v},{f1},{fc}")?;
        println!("{} = {v}: F_fock = {f1:.4}, F_coherent = {fc:.4}", axis_header(args.axis));
    }
    w.flush()?;
    manifest.stage("scan");
    manifest.output(&path);
    manifest.write(&dir)?;
    Ok(())
}

pub fn entropy_scan(args: EntropyArgs) -> Outcome {
    let cfg = load(&args.common)?;
    let dir = out_dir(&args.common)?;
    let which = component(args.component);
    let mut manifest = Manifest::new("entropy", &cfg);
    manifest.derive("component", json!(which.as_str()));
    let (path, mut w) = create(&dir, "entropy_scan.csv")?;
    let axis = match args.axis {
        EntropyAxis::Q => None,
        EntropyAxis::E0 => Some(ScanAxis::E0),
        EntropyAxis::T2 => Some(ScanAxis::T2),
    };
    match axis {
        None => {
            let sim = Simulation::new(cfg.clone())?;
            manifest.describe(&sim);
            let state = condition_full(&sim.run()?.displacements.component(which))?;
            writeln!(w, "q,s_lin")?;
            for q in 1..=state.modes() {
                writeln!(w, "{q},{}", linear_entropy(&state, q)?)?;
            }
        }
        Some(axis) => {
            manifest.derive("mode", json!(args.mode));
            writeln!(w, "{},s_lin", axis_header(axis))?;
            for v in args.range.values(axis) {
                let sim = Simulation::new(set_axis(&cfg, axis, v)?)?;
                let state = condition_full(&sim.run()?.displacements.component(which))?;
                let s = linear_entropy(&state, args.mode)?;
                writeln!(w, "{v},{s}")?;
                println!("{} = {v}: S_lin(q = {}) = {s:.4}", axis_header(axis), args.mode);
            }
        }
    }
    w.flush()?;
    manifest.stage("scan");
    manifest.output(&path);
    manifest.write(&dir)?;
    Ok(())
}

pub fn validate(args: ValidateArgs) -> Outcome {
    let cfg = load(&args.common)?;
    let mutation = if args.mutate_dipole_sign { Mutation::FlipDipoleSign } else { Mutation::None };
    let report = run_suite(&cfg, mutation)?;
    report.write_table(io::stdout().lock())?;
    if report.passed() {
        Ok(())
    } else {
        let failed: Vec<&str> = report.checks.iter().filter(|c| !c.passed).map(|c| c.name).collect();
        Err(Failure::Numerical(format!("failed checks: {}", failed.join(", "))))
    }
}

pub fn calibrate_coupling(args: CalibrateArgs) -> Outcome {
    let cfg = load(&args.common)?;
    let dir = out_dir(&args.common)?;
    let mut manifest = Manifest::new("calibrate", &cfg);
    let c = calibrate(&cfg, args.target)?;
    manifest.stage("calibrate");
    manifest.derive("calibrated_g0_au", json!(c.g0));
    manifest.derive("target_entropy", json!(args.target));
    manifest.derive("weak_coupling_entropy", json!(c.weak_limit));
    manifest.derive("chi1_abs", json!(c.fundamental));
    manifest.write(&dir)?;
    println!("g0 = {:e}", c.g0);
    println!("S_lin(q = 1) = {:.6} (weak-coupling limit {:.6}), |chi_1| = {:.4e}", c.entropy, c.weak_limit, c.fundamental);
    Ok(())
}
