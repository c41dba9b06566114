use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use hhgq::{Simulation, SimulationConfig};

/// Everything needed to rerun a command: the config snapshot, derived
/// quantities, stage timings and hashes of the files written.
pub struct Manifest {
    command: String,
    config: SimulationConfig,
    derived: Map<String, Value>,
    stages: Vec<(String, f64)>,
    outputs: Vec<PathBuf>,
    started: Instant,
}

impl Manifest {
    pub fn new(command: &str, config: &SimulationConfig) -> Self {
        let mut derived = Map::new();
        derived.insert("omega_au".into(), json!(config.omega()));
        derived.insert("period_fs".into(), json!(hhgq::units::UnitSystem::CODATA.au_to_fs(config.period())));
        derived.insert("g0_au".into(), json!(config.g0));
        Self {
            command: command.into(),
            config: config.clone(),
            derived,
            stages: Vec::new(),
            outputs: Vec::new(),
            started: Instant::now(),
        }
    }

    pub fn describe(&mut self, sim: &Simulation) {
        let (lo, hi) = sim.gap_orders();
        let u = hhgq::units::UnitSystem::CODATA;
        self.derived.insert("min_gap_order".into(), json!(lo));
        self.derived.insert("max_gap_order".into(), json!(hi));
        self.derived.insert("dt_fs".into(), json!(u.au_to_fs(sim.grid().step)));
        self.derived.insert("nyquist_order".into(), json!(sim.grid().nyquist_order(sim.config().omega())));
    }

    pub fn derive(&mut self, key: &str, value: Value) {
        self.derived.insert(key.into(), value);
    }

    /// Records the time since the previous stage ended.
    pub fn stage(&mut self, name: &str) {
        self.stages.push((name.into(), self.started.elapsed().as_secs_f64()));
        self.started = Instant::now();
    }

    pub fn output(&mut self, path: &Path) {
        self.outputs.push(path.to_path_buf());
    }

    pub fn write(&self, dir: &Path) -> std::io::Result<PathBuf> {
        let mut outputs = Vec::new();
        for path in &self.outputs {
            let bytes = fs::read(path)?;
            let name = path.file_name().map_or_else(String::new, |n| n.to_string_lossy().into_owned());
            outputs.push(json!({ "file": name, "sha256": hex::encode(Sha256::digest(&bytes)) }));
        }
        let doc = json!({
            "command": self.command,
            "version": env!("CARGO_PKG_VERSION"),
            "config": self.config.to_document(),
            "derived": Value::Object(self.derived.clone()),
            "stages": self.stages.iter().map(|(n, s)| json!({ "stage": n, "seconds": s })).collect::<Vec<_>>(),
            "outputs": outputs,
        });
        let path = dir.join("manifest.json");
        fs::write(&path, serde_json::to_string_pretty(&doc).expect("manifest serializes") + "\n")?;
        Ok(path)
    }
}
