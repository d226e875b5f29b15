//! The four subcommands. Each returns the files it wrote, in write order.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use latticeweave::circuit::Circuit;
use latticeweave::engine::{run_sequence_clifford, run_sequence_statevector};
use latticeweave::graph::{track_sequence, Graph};
use latticeweave::lattice::{Bipartition, BipartitionMode, ConstructionSequence, LocalRegion};
use latticeweave::noise::{simulate_trajectory, Insertion, Register, UnitDraws};
use latticeweave::verification::{
    fidelity_bound, gme_check, local_fidelity, unit_block, EdgeWitness, Estimate, EvalOptions, FidelityReport,
    RegionResult, WitnessMap, SUBSET_CAP,
};
use latticeweave::{
    CanonicalForm, Error as CoreError, Lattice, NoiseModel, OutcomePolicy, PauliString, StateVector, Tableau,
    TrajectoryPlan,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::{Backend, Channel, InsertionChoice, Postselect, RunConfig, SchemeChoice};
use crate::error::CliError;

type Result<T> = std::result::Result<T, CliError>;

fn write_file(dir: &Path, name: &str, contents: &[u8], written: &mut Vec<PathBuf>) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|e| CliError::io(&path, e))?;
    written.push(path);
    Ok(())
}

/// Provenance line, header, then rows (which carry their own newlines).
fn csv(cfg: &RunConfig, header: &str, rows: &str) -> String {
    format!("{}\n{header}\n{rows}", cfg.provenance())
}

/// Prefixes a header-first CSV body with the provenance line.
fn with_provenance(cfg: &RunConfig, body: &str) -> String {
    format!("{}\n{body}", cfg.provenance())
}

/// Resolved engine for one run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Engine {
    Tableau,
    Statevector,
}

fn choose_engine(cfg: &RunConfig, channel: Channel, what: &str) -> Result<Engine> {
    let noisy = channel != Channel::None;
    match cfg.backend {
        Backend::Tableau if noisy => {
            Err(CliError::Config(format!("{what}: the tableau backend is noiseless only (noise = {})", channel.name())))
        }
        Backend::Tableau => Ok(Engine::Tableau),
        Backend::Statevector => Ok(Engine::Statevector),
        Backend::Auto => {
            let (engine, reason) =
                if noisy { (Engine::Statevector, "noise requires amplitudes") } else { (Engine::Tableau, "noiseless") };
            eprintln!("backend auto: {what} uses {engine:?} ({reason})");
            Ok(engine)
        }
    }
}

pub fn noise_model(cfg: &RunConfig, channel: Channel, theta_prime: f64) -> NoiseModel {
    let model = match channel {
        Channel::None => NoiseModel::none(),
        Channel::Dephasing => NoiseModel::dephasing(theta_prime),
        Channel::Ising => NoiseModel::ising(theta_prime),
    };
    let model = match cfg.insertion {
        Some(InsertionChoice::AfterInit) => model.with_insertion(Insertion::AfterInit),
        Some(InsertionChoice::PerGate) => model.with_insertion(Insertion::PerCzGate),
        None => model,
    };
    model.with_shared_theta(cfg.shared_theta)
}

/// Lattice, the measurement-free part of the sequence, its graph, the
/// bipartition and the local region.
pub struct Setup {
    pub scheme: SchemeChoice,
    pub lattice: Lattice,
    pub sequence: ConstructionSequence,
    pub graph: Graph,
    pub bipartition: Bipartition,
    pub region: LocalRegion,
}

impl Setup {
    pub fn new(cfg: &RunConfig, scheme: SchemeChoice) -> Result<Self> {
        let lattice = Lattice::new(cfg.lx, cfg.ly)?;
        let full = cfg.sequence_for(scheme, &lattice)?;
        full.validate()?;
        let sequence = full.entangling_part();
        if sequence.ops.len() != full.ops.len() {
            eprintln!("note: scheme {} is verified on the graph state before its X measurements", scheme.name());
        }
        let graph = track_sequence(&lattice, &sequence)?;
        let mode = match (cfg.bipartition, scheme.builtin()) {
            (Some(b), _) => b.into(),
            (None, Some(s)) => s.bipartition_mode(),
            (None, None) => BipartitionMode::BySpecies,
        };
        let bipartition = Bipartition::new(&lattice, &graph, mode)?;
        let region = match (&cfg.interior, scheme.builtin()) {
            (Some(points), _) => {
                let sites = points
                    .iter()
                    .map(|&[x, y]| {
                        lattice.index_at(x, y).ok_or_else(|| {
                            CliError::Config(format!("no site at position ({}, {})", x as f64 / 2.0, y as f64 / 2.0))
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                LocalRegion::new(&graph, sites)?
            }
            (None, Some(s)) => unit_block(s, &lattice, &graph, cfg.block[0], cfg.block[1])?,
            (None, None) => {
                return Err(CliError::Config("scheme custom needs explicit interior sites (--site or interior)".into()))
            }
        };
        Ok(Setup { scheme, lattice, sequence, graph, bipartition, region })
    }

    fn interior_positions(&self) -> Vec<[f64; 2]> {
        self.region
            .interior
            .iter()
            .map(|&s| {
                let (x, y) = self.lattice.site(s).position();
                [x, y]
            })
            .collect()
    }

    /// Region report on `engine`. Noiseless statevector runs use a single
    /// trajectory since every trajectory is identical.
    pub fn evaluate(
        &self,
        cfg: &RunConfig,
        engine: Engine,
        channel: Channel,
        theta_prime: f64,
    ) -> Result<RegionResult> {
        match engine {
            Engine::Tableau => self.evaluate_tableau(cfg.seed),
            Engine::Statevector => {
                let model = noise_model(cfg, channel, theta_prime);
                let n = if channel == Channel::None { 1 } else { cfg.trajectories };
                let opts = EvalOptions { cap: cfg.cap, shots: cfg.shots, exact: true };
                Ok(local_fidelity(
                    &self.lattice,
                    &self.sequence,
                    &self.graph,
                    &self.region,
                    &self.bipartition,
                    &model,
                    &TrajectoryPlan::new(n, cfg.seed),
                    &opts,
                )?)
            }
        }
    }

    fn stabilizer(&self, i: usize) -> PauliString {
        PauliString::graph_stabilizer(i, self.graph.neighbors(i))
    }

    /// `2^-|M| sum_T <prod_{i in T} S_i>` by Gray-code enumeration.
    fn projector(&self, t: &Tableau, m: &[usize]) -> Result<f64> {
        if m.len() > SUBSET_CAP {
            return Err(CoreError::SubsetCapExceeded { size: m.len(), cap: SUBSET_CAP }.into());
        }
        let gens: Vec<PauliString> = m.iter().map(|&i| self.stabilizer(i)).collect();
        let mut p = PauliString::identity();
        let mut total = 1.0;
        for k in 1u64..1 << m.len() {
            p = &p * &gens[k.trailing_zeros() as usize];
            total += f64::from(t.expectation(&p)?);
        }
        Ok(total / (1u64 << m.len()) as f64)
    }

    fn evaluate_tableau(&self, seed: u64) -> Result<RegionResult> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (t, _) = run_sequence_clifford(&self.lattice, &self.sequence, OutcomePolicy::Random, &mut rng)?;
        let m_a: Vec<usize> = self.region.interior.intersection(&self.bipartition.a).copied().collect();
        let m_b: Vec<usize> = self.region.interior.intersection(&self.bipartition.b).copied().collect();
        let all: Vec<usize> = self.region.interior.iter().copied().collect();
        let p_a = self.projector(&t, &m_a)?;
        let p_b = self.projector(&t, &m_b)?;
        let exact = self.projector(&t, &all)?;
        let bound = fidelity_bound(p_a, p_b)?;
        let mut edges = Vec::new();
        for (a, b) in self.graph.edges() {
            if self.region.interior.contains(&a) && self.region.interior.contains(&b) {
                let w = f64::from(t.expectation(&self.stabilizer(a))?) + f64::from(t.expectation(&self.stabilizer(b))?)
                    - 1.0;
                edges.push(EdgeWitness { a, b, w: Estimate::exact(w) });
            }
        }
        let report = FidelityReport {
            interior_a: m_a.len(),
            interior_b: m_b.len(),
            p_a: Estimate::exact(p_a),
            p_b: Estimate::exact(p_b),
            bound: Estimate::exact(bound),
            exact_fidelity: Some(Estimate::exact(exact)),
            sampled_p_a: None,
            sampled_p_b: None,
            gme: gme_check(bound),
        };
        Ok(RegionResult {
            report,
            witnesses: WitnessMap { edges },
            register_size: self.lattice.num_sites(),
            trajectories: 1,
        })
    }
}

/// Runs the construction and writes the graph, the canonical stabilizer
/// group and, for statevector runs, generator expectations and an optional
/// amplitude dump.
pub fn cmd_build(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    let lattice = Lattice::new(cfg.lx, cfg.ly)?;
    let seq = cfg.sequence_for(cfg.scheme, &lattice)?;
    seq.validate()?;
    let engine = choose_engine(cfg, cfg.noise, "build")?;
    let measured = seq.measured_sites(&lattice);
    let policy = match cfg.postselect {
        Postselect::Plus => OutcomePolicy::ForcePlus,
        Postselect::Random => OutcomePolicy::Random,
    };

    let graph = match track_sequence(&lattice, &seq.entangling_part()) {
        Ok(g) => Some(g),
        Err(e @ (CoreError::HadamardOnEntangledVertex(_) | CoreError::UnsupportedOp(_))) => {
            eprintln!("note: {e}; graph files skipped");
            None
        }
        Err(e) => return Err(e.into()),
    };
    if let Some(g) = &graph {
        let mode = match (cfg.bipartition, cfg.scheme.builtin()) {
            (Some(b), _) => Some(b.into()),
            (None, Some(s)) => Some(s.bipartition_mode()),
            (None, None) => None,
        };
        if let Some(mode) = mode {
            Bipartition::new(&lattice, g, mode)?;
        }
        write_file(
            &cfg.out,
            "graph_edges.csv",
            with_provenance(cfg, &g.to_edge_csv(&lattice)).as_bytes(),
            &mut written,
        )?;
        write_file(&cfg.out, "graph_adjacency.txt", g.to_adjacency_text().as_bytes(), &mut written)?;
    }

    // the noiseless tableau run is also the reference for statevector builds
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (tableau, record) = run_sequence_clifford(&lattice, &seq, policy, &mut rng)?;
    let form = tableau.canonical_form();
    if let (Some(g), true) = (&graph, measured.is_empty()) {
        let predicted = CanonicalForm::from_paulis(
            lattice.num_sites(),
            &latticeweave::graph::state_generators(g, lattice.num_sites()),
        )?;
        if predicted != form {
            return Err(CliError::Invariant("tableau stabilizer group differs from the tracked graph state".into()));
        }
    }
    let keep: Vec<usize> = (0..lattice.num_sites()).filter(|s| measured.binary_search(s).is_err()).collect();

    match engine {
        Engine::Tableau => {
            write_file(&cfg.out, "stabilizers.txt", form.dump().as_bytes(), &mut written)?;
            if !measured.is_empty() {
                write_file(
                    &cfg.out,
                    "measurements.csv",
                    with_provenance(cfg, &record.to_csv()).as_bytes(),
                    &mut written,
                )?;
                write_file(
                    &cfg.out,
                    "retained_stabilizers.txt",
                    form.restricted(&keep).dump().as_bytes(),
                    &mut written,
                )?;
            }
        }
        Engine::Statevector => {
            let noisy = cfg.noise != Channel::None;
            if noisy && !measured.is_empty() && cfg.postselect == Postselect::Plus {
                return Err(CliError::Config("post-selection is only available for noiseless builds".into()));
            }
            let state: StateVector = if noisy {
                let circuit = Circuit::lower(&lattice, &seq);
                let model = noise_model(cfg, cfg.noise, cfg.theta_prime);
                model.validate()?;
                let plan = TrajectoryPlan::new(1, cfg.seed);
                let mut trng = plan.rng(0);
                let draws = UnitDraws::draw(&circuit, model.shared_theta, &mut trng);
                let register = Register::full(circuit.num_qubits());
                simulate_trajectory(&circuit, &register, &model, &draws, cfg.cap, &mut trng)?
            } else {
                let mut srng = ChaCha8Rng::seed_from_u64(cfg.seed);
                run_sequence_statevector(&lattice, &seq, cfg.cap, cfg.postselect == Postselect::Plus, &mut srng)?
            };
            if measured.is_empty() || cfg.postselect == Postselect::Plus {
                let mut rows = String::new();
                for g in &form.generators() {
                    let _ = writeln!(rows, "{g},{:.12}", state.expectation(g)?);
                }
                write_file(
                    &cfg.out,
                    "stabilizer_expectations.csv",
                    csv(cfg, "generator,expectation", &rows).as_bytes(),
                    &mut written,
                )?;
            } else {
                eprintln!("note: sampled outcomes differ between backends; stabilizer expectations skipped");
            }
            if cfg.state_dump {
                let mut bytes = Vec::new();
                state.write_dump(&mut bytes).map_err(|e| CliError::io(&cfg.out, e))?;
                write_file(&cfg.out, "state.bin", &bytes, &mut written)?;
            }
        }
    }
    Ok(written)
}

#[derive(Serialize)]
struct VerifyDocument<'a> {
    version: &'static str,
    seed: u64,
    config: String,
    scheme: &'static str,
    channel: &'static str,
    theta_prime: f64,
    lattice: [i64; 2],
    engine: Engine,
    interior: Vec<[f64; 2]>,
    register_size: usize,
    trajectories: usize,
    report: &'a FidelityReport,
}

/// Fidelity report of the configured region at the configured noise.
pub fn cmd_verify(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    let setup = Setup::new(cfg, cfg.scheme)?;
    let engine = choose_engine(cfg, cfg.noise, "verify")?;
    let r = setup.evaluate(cfg, engine, cfg.noise, cfg.theta_prime)?;
    let doc = VerifyDocument {
        version: env!("CARGO_PKG_VERSION"),
        seed: cfg.seed,
        config: cfg.hash(),
        scheme: cfg.scheme.name(),
        channel: cfg.noise.name(),
        theta_prime: cfg.theta_prime,
        lattice: [cfg.lx, cfg.ly],
        engine,
        interior: setup.interior_positions(),
        register_size: r.register_size,
        trajectories: r.trajectories,
        report: &r.report,
    };
    let mut json = serde_json::to_string_pretty(&doc).expect("report serializes");
    json.push('\n');
    write_file(&cfg.out, "report.json", json.as_bytes(), &mut written)?;
    let header = format!("scheme,channel,{}", FidelityReport::CSV_HEADER);
    let row = format!("{},{},{}\n", cfg.scheme.name(), cfg.noise.name(), r.report.csv_row(cfg.theta_prime));
    write_file(&cfg.out, "report.csv", csv(cfg, &header, &row).as_bytes(), &mut written)?;
    Ok(written)
}

pub fn sweep_file_name(scheme: SchemeChoice, channel: Channel) -> String {
    format!("sweep_{}_{}.csv", scheme.name(), channel.name())
}

/// One CSV per scheme and channel with a row per grid point. Every grid
/// point reuses the master seed, so curves share their random draws.
pub fn cmd_sweep(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    for &scheme in &cfg.schemes {
        let setup = Setup::new(cfg, scheme)?;
        for &channel in &cfg.channels {
            let engine = choose_engine(cfg, channel, &format!("sweep {} {}", scheme.name(), channel.name()))?;
            let mut rows = String::new();
            for &tp in &cfg.grid {
                let r = setup.evaluate(cfg, engine, channel, tp)?;
                rows.push_str(&r.report.csv_row(tp));
                rows.push('\n');
            }
            let name = sweep_file_name(scheme, channel);
            write_file(&cfg.out, &name, csv(cfg, FidelityReport::CSV_HEADER, &rows).as_bytes(), &mut written)?;
        }
    }
    if cfg.plot_script {
        write_file(&cfg.out, "plot_sweep.py", SWEEP_PLOT.as_bytes(), &mut written)?;
    }
    Ok(written)
}

/// Per-edge witnesses of the configured region.
pub fn cmd_witness(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    let setup = Setup::new(cfg, cfg.scheme)?;
    let engine = choose_engine(cfg, cfg.noise, "witness")?;
    let r = setup.evaluate(cfg, engine, cfg.noise, cfg.theta_prime)?;
    let rows = r.witnesses.to_csv_rows(&setup.lattice);
    write_file(&cfg.out, "witness.csv", csv(cfg, WitnessMap::CSV_HEADER, &rows).as_bytes(), &mut written)?;
    if cfg.plot_script {
        write_file(&cfg.out, "plot_witness.py", WITNESS_PLOT.as_bytes(), &mut written)?;
    }
    Ok(written)
}

/// Interior sites of the default or configured region, for callers that
/// need them without running anything.
pub fn region_sites(cfg: &RunConfig, scheme: SchemeChoice) -> Result<BTreeSet<usize>> {
    Ok(Setup::new(cfg, scheme)?.region.interior)
}

const SWEEP_PLOT: &str = r##"import glob
import os
import sys

import matplotlib.pyplot as plt
import numpy as np

here = os.path.dirname(os.path.abspath(__file__))
fig, ax = plt.subplots(figsize=(6, 4))
for path in sorted(glob.glob(os.path.join(here, "sweep_*.csv"))):
    data = np.genfromtxt(path, delimiter=",", names=True, comments="#", dtype=None, encoding="utf-8")
    label = os.path.basename(path)[len("sweep_"):-len(".csv")]
    ax.errorbar(data["theta_prime"], data["bound"], yerr=data["bound_se"], marker="o", label=label + " bound")
    ax.plot(data["theta_prime"], data["exact"], linestyle="--", label=label + " exact")
ax.axhline(0.5, color="grey", linewidth=0.8)
ax.set_xlabel("theta'")
ax.set_ylabel("fidelity")
ax.legend(fontsize=7)
fig.tight_layout()
fig.savefig(sys.argv[1] if len(sys.argv) > 1 else os.path.join(here, "sweep.png"), dpi=150)
"##;

const WITNESS_PLOT: &str = r##"import os
import sys

import matplotlib.pyplot as plt
import numpy as np

here = os.path.dirname(os.path.abspath(__file__))
data = np.genfromtxt(os.path.join(here, "witness.csv"), delimiter=",", names=True, comments="#", dtype=None, encoding="utf-8")
fig, ax = plt.subplots(figsize=(5, 5))
cmap = plt.get_cmap("coolwarm_r")
for row in np.atleast_1d(data):
    colour = cmap((row["w"] + 1.0) / 2.0)
    ax.plot([row["ax"], row["bx"]], [row["ay"], row["by"]], color=colour, linewidth=3)
ax.set_aspect("equal")
ax.set_xlabel("x")
ax.set_ylabel("y")
fig.tight_layout()
fig.savefig(sys.argv[1] if len(sys.argv) > 1 else os.path.join(here, "witness.png"), dpi=150)
"##;
