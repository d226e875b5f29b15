//! Two-setting verification: projector expectations, the fidelity lower
//! bound `F >= <P_A> + <P_B> - 1`, exact local fidelity, pairwise witnesses
//! and the GME threshold.
//!
//! For a region `M` inside one side of the bipartition, the operators
//! `S_i` (`i` in `M`) become diagonal after a Hadamard on every `i` in `M`,
//! with eigenvalue `(-1)^(b_i + sum_{j in N(i)} b_j)` on basis state `b`.
//! One pass over the rotated amplitudes gives the distribution `q(s)` of
//! the parity vector `s`, and its Walsh-Hadamard transform gives
//! `<prod_{i in T} S_i>` for every subset `T`.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use rand::distributions::WeightedIndex;
use rand::prelude::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::Circuit;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::lattice::{Bipartition, Lattice, LocalRegion, Scheme};
use crate::noise::{run_trajectories, NoiseModel, Register, TrajectoryPlan};
use crate::pauli::{Pauli, PauliString};
use crate::scalar::Scalar;
use crate::statevector::StateVector;

/// Largest region for the subset expansion.
pub const SUBSET_CAP: usize = 20;

/// GME threshold on the fidelity to a graph state (strict).
pub const GME_THRESHOLD: f64 = 0.5;

/// Single-site bases of one of the two settings.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MeasurementSetting {
    pub basis: std::collections::BTreeMap<usize, Pauli>,
}

impl MeasurementSetting {
    /// Setting 1 (`x_on_a`): X on A, Z on B. Setting 2: Z on A, X on B.
    pub fn from_bipartition(bip: &Bipartition, x_on_a: bool) -> Self {
        let (xs, zs) = if x_on_a { (&bip.a, &bip.b) } else { (&bip.b, &bip.a) };
        let basis = xs.iter().map(|&s| (s, Pauli::X)).chain(zs.iter().map(|&s| (s, Pauli::Z))).collect();
        MeasurementSetting { basis }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub se: f64,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Estimate { value, se: 0.0 }
    }
}

/// Which side of `bip` holds all of `m`; `true` for A.
pub fn region_side(bip: &Bipartition, m: &BTreeSet<usize>) -> Result<bool> {
    let mut side = None;
    for &s in m {
        let here = bip.side(s).ok_or_else(|| Error::InvalidRegion(format!("site {s} is not a graph vertex")))?;
        match side {
            None => side = Some(here),
            Some(prev) if prev != here => return Err(Error::RegionSpansPartition),
            _ => {}
        }
    }
    side.ok_or_else(|| Error::InvalidRegion("empty region".into()))
}

/// `<prod (1 + S_i) / 2>` machinery for a region on one side, in register
/// qubit indices.
#[derive(Clone, Debug)]
pub struct SideProjector {
    pub centers: Vec<usize>,
    rotate: Vec<usize>,
    masks: Vec<usize>,
}

impl SideProjector {
    pub fn new(graph: &Graph, m: &BTreeSet<usize>, bip: &Bipartition, register: &Register) -> Result<Self> {
        region_side(bip, m)?;
        let local = |s: usize| {
            register.local(s).ok_or_else(|| Error::InvalidRegion(format!("site {s} is outside the simulated register")))
        };
        let mut rotate = Vec::new();
        let mut masks = Vec::new();
        for &i in m {
            let li = local(i)?;
            rotate.push(li);
            let mut mask = 1usize << li;
            for j in graph.neighbors(i) {
                mask |= 1usize << local(j)?;
            }
            masks.push(mask);
        }
        Ok(SideProjector { centers: m.iter().copied().collect(), rotate, masks })
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    fn rotated<T: Scalar>(&self, state: &StateVector<T>) -> Result<StateVector<T>> {
        let mut r = state.clone();
        for &q in &self.rotate {
            r.apply_h(q)?;
        }
        Ok(r)
    }

    fn parity_index(&self, b: usize) -> usize {
        self.masks.iter().enumerate().fold(0, |acc, (k, &m)| acc | ((((b & m).count_ones() & 1) as usize) << k))
    }

    /// Distribution of the parity vector in the measured setting.
    pub fn parity_distribution<T: Scalar>(&self, state: &StateVector<T>) -> Result<Vec<f64>> {
        let r = self.rotated(state)?;
        let mut q = vec![0.0f64; 1 << self.len()];
        for (b, a) in r.amplitudes().iter().enumerate() {
            q[self.parity_index(b)] += a.norm_sqr().to_f64_lossy();
        }
        Ok(q)
    }

    /// `<prod_{i in T} S_i>` for every subset `T` (bit `k` of the index
    /// selects `centers[k]`).
    pub fn subset_expectations<T: Scalar>(&self, state: &StateVector<T>) -> Result<Vec<f64>> {
        if self.len() > SUBSET_CAP {
            return Err(Error::SubsetCapExceeded { size: self.len(), cap: SUBSET_CAP });
        }
        let mut w = self.parity_distribution(state)?;
        walsh_hadamard(&mut w);
        Ok(w)
    }

    /// `2^-|M| sum_T <prod_{i in T} S_i>`.
    pub fn expectation<T: Scalar>(&self, state: &StateVector<T>) -> Result<f64> {
        let w = self.subset_expectations(state)?;
        Ok(w.iter().sum::<f64>() / w.len() as f64)
    }

    /// Per-shot values `prod (1 + s_i) / 2` from sampled outcomes of the
    /// setting on the register.
    pub fn sample<T: Scalar, R: rand::Rng + ?Sized>(
        &self,
        state: &StateVector<T>,
        shots: usize,
        rng: &mut R,
    ) -> Result<Vec<bool>> {
        if shots == 0 {
            return Ok(Vec::new());
        }
        let r = self.rotated(state)?;
        let probs: Vec<f64> = r.amplitudes().iter().map(|a| a.norm_sqr().to_f64_lossy()).collect();
        let dist = WeightedIndex::new(&probs).map_err(|_| Error::ZeroProbability)?;
        Ok((0..shots).map(|_| self.parity_index(dist.sample(rng)) == 0).collect())
    }
}

fn walsh_hadamard(v: &mut [f64]) {
    let mut h = 1;
    while h < v.len() {
        for i in (0..v.len()).step_by(2 * h) {
            for j in i..i + h {
                let (x, y) = (v[j], v[j + h]);
                v[j] = x + y;
                v[j + h] = x - y;
            }
        }
        h *= 2;
    }
}

/// Exact `<P_M>` of one state by the subset expansion.
pub fn projector_expectation_exact<T: Scalar>(
    state: &StateVector<T>,
    m: &BTreeSet<usize>,
    graph: &Graph,
    bip: &Bipartition,
    register: &Register,
) -> Result<f64> {
    SideProjector::new(graph, m, bip, register)?.expectation(state)
}

/// `||prod (1 + S_i) / 2 |psi>||^2` by dense operator products. Works for
/// any commuting set, including regions spanning both sides.
pub fn projector_dense<T: Scalar>(state: &StateVector<T>, generators: &[PauliString]) -> Result<f64> {
    let mut psi = state.clone();
    let half = T::of(0.5);
    for g in generators {
        let mut flipped = psi.clone();
        flipped.apply_pauli(g)?;
        let amps: Vec<_> = psi.amplitudes().iter().zip(flipped.amplitudes()).map(|(a, b)| (*a + *b) * half).collect();
        psi = StateVector::from_amplitudes(amps)?;
    }
    Ok(psi.norm_sqr().to_f64_lossy())
}

/// `p_a + p_b - 1`.
pub fn fidelity_bound(p_a: f64, p_b: f64) -> Result<f64> {
    const SLACK: f64 = 1e-9;
    for (what, v) in [("p_a", p_a), ("p_b", p_b)] {
        if !(-SLACK..=1.0 + SLACK).contains(&v) {
            return Err(Error::OutOfRange { what, value: v });
        }
    }
    Ok(p_a + p_b - 1.0)
}

pub fn gme_check(bound: f64) -> bool {
    bound > GME_THRESHOLD
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FidelityReport {
    pub interior_a: usize,
    pub interior_b: usize,
    pub p_a: Estimate,
    pub p_b: Estimate,
    /// `p_a + p_b - 1`; its SE is taken from the per-trajectory bound values.
    pub bound: Estimate,
    /// Exact `<P_M>` on the whole interior (the local fidelity the bound
    /// certifies; the graph-state fidelity when `M` is the whole graph).
    pub exact_fidelity: Option<Estimate>,
    pub sampled_p_a: Option<Estimate>,
    pub sampled_p_b: Option<Estimate>,
    pub gme: bool,
}

impl FidelityReport {
    pub const CSV_HEADER: &'static str = "theta_prime,p_a,p_a_se,p_b,p_b_se,bound,bound_se,exact,exact_se,gme";

    pub fn csv_row(&self, theta_prime: f64) -> String {
        let (e, ese) = self
            .exact_fidelity
            .map_or((String::new(), String::new()), |x| (format!("{:.12}", x.value), format!("{:.12}", x.se)));
        format!(
            "{theta_prime:.12},{:.12},{:.12},{:.12},{:.12},{:.12},{:.12},{e},{ese},{}",
            self.p_a.value, self.p_a.se, self.p_b.value, self.p_b.se, self.bound.value, self.bound.se, self.gme
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeWitness {
    pub a: usize,
    pub b: usize,
    pub w: Estimate,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct WitnessMap {
    pub edges: Vec<EdgeWitness>,
}

impl WitnessMap {
    pub const CSV_HEADER: &'static str = "a,b,ax,ay,bx,by,w,se,positive";

    pub fn to_csv_rows(&self, lattice: &Lattice) -> String {
        let mut out = String::new();
        for e in &self.edges {
            let (ax, ay) = lattice.site(e.a).position();
            let (bx, by) = lattice.site(e.b).position();
            let _ = writeln!(
                out,
                "{},{},{ax},{ay},{bx},{by},{:.12},{:.12},{}",
                e.a,
                e.b,
                e.w.value,
                e.w.se,
                e.w.value > 0.0
            );
        }
        out
    }
}

/// `w_ij = <S_i> + <S_j> - 1`.
pub fn pairwise_witness<T: Scalar>(
    state: &StateVector<T>,
    edge: (usize, usize),
    graph: &Graph,
    register: &Register,
) -> Result<f64> {
    let (i, j) = edge;
    if !graph.has_edge(i, j) {
        return Err(Error::NotAnEdge { a: i, b: j });
    }
    let si = register.localize(&PauliString::graph_stabilizer(i, graph.neighbors(i)))?;
    let sj = register.localize(&PauliString::graph_stabilizer(j, graph.neighbors(j)))?;
    Ok(state.expectation(&si)?.to_f64_lossy() + state.expectation(&sj)?.to_f64_lossy() - 1.0)
}

/// Options for ensemble evaluation of a region.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalOptions {
    pub cap: usize,
    /// Total shots per setting for the sampled estimator (0 disables it).
    pub shots: usize,
    /// Also compute the exact `<P_M>` of the whole interior.
    pub exact: bool,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions { cap: crate::statevector::DEFAULT_QUBIT_CAP, shots: 0, exact: true }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionResult {
    pub report: FidelityReport,
    pub witnesses: WitnessMap,
    pub register_size: usize,
    pub trajectories: usize,
}

/// Evaluates one local region on every trajectory.
pub struct RegionEvaluator {
    side_a: Option<SideProjector>,
    side_b: Option<SideProjector>,
    interior_generators: Vec<PauliString>,
    /// Interior edges as positions into `stabilizer_order`.
    edges: Vec<(usize, usize, usize, usize)>,
    stabilizer_order: Vec<usize>,
    register: Register,
}

impl RegionEvaluator {
    pub fn new(circuit: &Circuit, graph: &Graph, region: &LocalRegion, bip: &Bipartition) -> Result<Self> {
        region.check(graph)?;
        let register = Register::for_region(circuit, &region.interior, &region.sites());
        let m_a: BTreeSet<usize> = region.interior.intersection(&bip.a).copied().collect();
        let m_b: BTreeSet<usize> = region.interior.intersection(&bip.b).copied().collect();
        if m_a.len() + m_b.len() != region.interior.len() {
            return Err(Error::InvalidRegion("interior contains sites outside the bipartition".into()));
        }
        let side = |m: &BTreeSet<usize>| -> Result<Option<SideProjector>> {
            if m.is_empty() {
                Ok(None)
            } else {
                Ok(Some(SideProjector::new(graph, m, bip, &register)?))
            }
        };
        let side_a = side(&m_a)?;
        let side_b = side(&m_b)?;
        for s in side_a.iter().chain(side_b.iter()) {
            if s.len() > SUBSET_CAP {
                return Err(Error::SubsetCapExceeded { size: s.len(), cap: SUBSET_CAP });
            }
        }
        let interior_generators = region
            .interior
            .iter()
            .map(|&i| register.localize(&PauliString::graph_stabilizer(i, graph.neighbors(i))))
            .collect::<Result<Vec<_>>>()?;
        let stabilizer_order: Vec<usize> = m_a.iter().chain(m_b.iter()).copied().collect();
        let pos = |s: usize| stabilizer_order.iter().position(|&x| x == s).expect("interior site");
        let edges = graph
            .edges()
            .into_iter()
            .filter(|(a, b)| region.interior.contains(a) && region.interior.contains(b))
            .map(|(a, b)| (a, b, pos(a), pos(b)))
            .collect();
        Ok(RegionEvaluator { side_a, side_b, interior_generators, edges, stabilizer_order, register })
    }

    pub fn register(&self) -> &Register {
        &self.register
    }

    fn side_values<T: Scalar>(side: &Option<SideProjector>, state: &StateVector<T>) -> Result<(f64, Vec<f64>)> {
        match side {
            None => Ok((1.0, Vec::new())),
            Some(p) => {
                let w = p.subset_expectations(state)?;
                let singles = (0..p.len()).map(|k| w[1 << k]).collect();
                Ok((w.iter().sum::<f64>() / w.len() as f64, singles))
            }
        }
    }

    /// Row layout: `p_a, p_b, bound, exact, hits_a, shots_a, hits_b, shots_b,
    /// <S_i>...` in `stabilizer_order`.
    pub fn evaluate<T: Scalar>(
        &self,
        state: &StateVector<T>,
        opts: &EvalOptions,
        shots_here: usize,
        rng: &mut ChaCha8Rng,
    ) -> Result<Vec<f64>> {
        let (pa, sa) = Self::side_values(&self.side_a, state)?;
        let (pb, sb) = Self::side_values(&self.side_b, state)?;
        let exact = if opts.exact { projector_dense(state, &self.interior_generators)? } else { f64::NAN };
        let mut hits = [0.0f64; 2];
        if shots_here > 0 {
            for (k, side) in [&self.side_a, &self.side_b].into_iter().enumerate() {
                hits[k] = match side {
                    Some(p) => p.sample(state, shots_here, rng)?.into_iter().filter(|&v| v).count() as f64,
                    None => shots_here as f64,
                };
            }
        }
        let mut row = vec![pa, pb, pa + pb - 1.0, exact, hits[0], shots_here as f64, hits[1], shots_here as f64];
        row.extend(sa);
        row.extend(sb);
        Ok(row)
    }

    pub fn summarize(&self, rows: &[Vec<f64>], opts: &EvalOptions) -> Result<RegionResult> {
        let stats = crate::noise::EnsembleStats::from_samples(rows)?;
        let est = |k: usize| Estimate { value: stats.observables[k].mean, se: stats.observables[k].se };
        let sampled = |hit_col: usize, shot_col: usize| {
            let hits: f64 = rows.iter().map(|r| r[hit_col]).sum();
            let shots: f64 = rows.iter().map(|r| r[shot_col]).sum();
            (shots > 0.0).then(|| {
                let p = hits / shots;
                Estimate { value: p, se: (p * (1.0 - p) / shots).sqrt() }
            })
        };
        let bound = est(2);
        let n_stab = self.stabilizer_order.len();
        let edges = self
            .edges
            .iter()
            .map(|&(a, b, pa, pb)| {
                let w: Vec<Vec<f64>> = rows.iter().map(|r| vec![r[8 + pa] + r[8 + pb] - 1.0]).collect();
                let s = crate::noise::EnsembleStats::from_samples(&w)?;
                Ok(EdgeWitness { a, b, w: Estimate { value: s.observables[0].mean, se: s.observables[0].se } })
            })
            .collect::<Result<Vec<_>>>()?;
        debug_assert!(rows.iter().all(|r| r.len() == 8 + n_stab));
        let report = FidelityReport {
            interior_a: self.side_a.as_ref().map_or(0, SideProjector::len),
            interior_b: self.side_b.as_ref().map_or(0, SideProjector::len),
            p_a: est(0),
            p_b: est(1),
            bound,
            exact_fidelity: opts.exact.then(|| est(3)),
            sampled_p_a: sampled(4, 5),
            sampled_p_b: sampled(6, 7),
            gme: gme_check(bound.value),
        };
        Ok(RegionResult {
            report,
            witnesses: WitnessMap { edges },
            register_size: self.register.len(),
            trajectories: rows.len(),
        })
    }
}

/// Salt separating the shot-sampling streams from the trajectory streams.
const SHOT_SALT: u64 = 0x5348_4f54_5341_4d50;

/// Local fidelity report and witnesses of `region` over a noisy ensemble.
#[allow(clippy::too_many_arguments)]
pub fn local_fidelity(
    lattice: &Lattice,
    seq: &crate::lattice::ConstructionSequence,
    graph: &Graph,
    region: &LocalRegion,
    bip: &Bipartition,
    model: &NoiseModel,
    plan: &TrajectoryPlan,
    opts: &EvalOptions,
) -> Result<RegionResult> {
    seq.validate()?;
    let circuit = Circuit::lower(lattice, seq);
    let eval = RegionEvaluator::new(&circuit, graph, region, bip)?;
    let n = plan.trajectories.max(1);
    let rows = run_trajectories::<f64, _>(&circuit, eval.register(), model, plan, opts.cap, |t, s| {
        let shots_here = opts.shots / n + usize::from(t < opts.shots % n);
        let mut rng = ChaCha8Rng::seed_from_u64(plan.master_seed ^ SHOT_SALT);
        rng.set_stream(t as u64);
        eval.evaluate(s, opts, shots_here, &mut rng)
    })?;
    eval.summarize(&rows, opts)
}

/// Trajectory-averaged `|<G|psi>|^2` over the whole lattice, where `|G>` is
/// the graph state on the graph's vertices and |0> elsewhere.
pub fn exact_graph_fidelity(
    lattice: &Lattice,
    seq: &crate::lattice::ConstructionSequence,
    graph: &Graph,
    model: &NoiseModel,
    plan: &TrajectoryPlan,
    cap: usize,
) -> Result<Estimate> {
    let circuit = Circuit::lower(lattice, seq);
    let register = Register::full(circuit.num_qubits());
    let reference: StateVector<f64> = crate::engine::ideal_graph_state(graph, circuit.num_qubits(), cap)?;
    let rows =
        run_trajectories::<f64, _>(&circuit, &register, model, plan, cap, |_, s| Ok(vec![s.fidelity_to(&reference)?]))?;
    let st = crate::noise::EnsembleStats::from_samples(&rows)?;
    Ok(Estimate { value: st.observables[0].mean, se: st.observables[0].se })
}

/// Default unit block of a scheme, anchored at doubled offset `(dx, dy)`
/// (both even). Scheme (i): one cube of the bilayer cluster. Scheme (ii):
/// the Red vertex of one plaquette with its Blue neighbours and the Blue
/// support of the adjacent star.
pub fn unit_block(scheme: Scheme, lattice: &Lattice, graph: &Graph, dx: i64, dy: i64) -> Result<LocalRegion> {
    if dx % 2 != 0 || dy % 2 != 0 {
        return Err(Error::InvalidRegion(format!("block offset ({dx}, {dy}) must be even")));
    }
    let coords: &[(i64, i64)] = match scheme {
        Scheme::I => &[(0, 0), (2, 0), (0, 2), (2, 2), (1, 0), (3, 0), (1, 2), (3, 2)],
        Scheme::II => &[(2, 0), (1, 0), (3, 0), (2, 1), (4, 1), (3, 2)],
    };
    let mut interior = Vec::new();
    for &(x, y) in coords {
        let s = lattice.index_at(x + dx, y + dy).ok_or_else(|| {
            Error::InvalidRegion(format!(
                "block does not fit a {}x{} lattice at offset ({dx}, {dy})",
                lattice.lx(),
                lattice.ly()
            ))
        })?;
        interior.push(s);
    }
    LocalRegion::new(graph, interior)
}
