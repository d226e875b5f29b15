//! Random-unitary error channels and the Monte Carlo trajectory driver.
//!
//! Each trajectory draws one value `u` uniform on `[-1, 1]` per site and per
//! CZ gate of the full lowered circuit (sites first, then gates in circuit
//! order) from its own stream, and scales it by `theta'`. The draw layout is
//! therefore independent of `theta'`, of the channel and of how much of the
//! lattice is simulated.

use std::collections::{BTreeMap, BTreeSet};

use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Gate};
use crate::error::{Error, Result};
use crate::lattice::{ConstructionSequence, Lattice};
use crate::pauli::{Pauli, PauliString};
use crate::scalar::Scalar;
use crate::statevector::{StateVector, DEFAULT_QUBIT_CAP};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NoiseKind {
    None,
    Dephasing,
    IsingCz,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Insertion {
    AfterInit,
    PerCzGate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub kind: NoiseKind,
    pub theta_prime: f64,
    pub insertion: Insertion,
    /// One angle per trajectory shared by every site and gate.
    pub shared_theta: bool,
    /// Per-site `theta'` replacing the global one (dephasing only).
    pub site_overrides: BTreeMap<usize, f64>,
}

impl NoiseModel {
    pub fn none() -> Self {
        NoiseModel {
            kind: NoiseKind::None,
            theta_prime: 0.0,
            insertion: Insertion::AfterInit,
            shared_theta: false,
            site_overrides: BTreeMap::new(),
        }
    }

    pub fn dephasing(theta_prime: f64) -> Self {
        NoiseModel { kind: NoiseKind::Dephasing, theta_prime, ..Self::none() }
    }

    pub fn ising(theta_prime: f64) -> Self {
        NoiseModel { kind: NoiseKind::IsingCz, theta_prime, insertion: Insertion::PerCzGate, ..Self::none() }
    }

    pub fn with_insertion(mut self, insertion: Insertion) -> Self {
        if self.kind != NoiseKind::IsingCz {
            self.insertion = insertion;
        }
        self
    }

    pub fn with_shared_theta(mut self, shared: bool) -> Self {
        self.shared_theta = shared;
        self
    }

    pub fn with_site_override(mut self, site: usize, theta_prime: f64) -> Self {
        self.site_overrides.insert(site, theta_prime);
        self
    }

    pub fn validate(&self) -> Result<()> {
        for &t in std::iter::once(&self.theta_prime).chain(self.site_overrides.values()) {
            if !(t.is_finite() && t >= 0.0) {
                return Err(Error::OutOfRange { what: "theta'", value: t });
            }
        }
        Ok(())
    }

    fn site_theta_prime(&self, site: usize) -> f64 {
        self.site_overrides.get(&site).copied().unwrap_or(self.theta_prime)
    }
}

/// Trajectory `t` uses `ChaCha8Rng::seed_from_u64(master_seed)` on stream `t`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrajectoryPlan {
    pub trajectories: usize,
    pub master_seed: u64,
}

impl TrajectoryPlan {
    pub fn new(trajectories: usize, master_seed: u64) -> Self {
        TrajectoryPlan { trajectories, master_seed }
    }

    pub fn rng(&self, t: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(t as u64);
        rng
    }
}

/// Unit draws of one trajectory.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitDraws {
    pub site: Vec<f64>,
    pub gate: Vec<f64>,
}

impl UnitDraws {
    pub fn draw(circuit: &Circuit, shared: bool, rng: &mut ChaCha8Rng) -> Self {
        let unit = Uniform::new_inclusive(-1.0f64, 1.0);
        let n_gates = circuit.num_cz();
        if shared {
            let u = unit.sample(rng);
            return UnitDraws { site: vec![u; circuit.num_qubits()], gate: vec![u; n_gates] };
        }
        let site = (0..circuit.num_qubits()).map(|_| unit.sample(rng)).collect();
        let gate = (0..n_gates).map(|_| unit.sample(rng)).collect();
        UnitDraws { site, gate }
    }
}

/// Subset of sites that is simulated, with lattice-to-qubit index map.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Register {
    sites: Vec<usize>,
    local: Vec<Option<usize>>,
}

impl Register {
    pub fn full(n: usize) -> Self {
        Register { sites: (0..n).collect(), local: (0..n).map(Some).collect() }
    }

    pub fn from_sites(n: usize, sites: impl IntoIterator<Item = usize>) -> Self {
        let set: BTreeSet<usize> = sites.into_iter().collect();
        let mut local = vec![None; n];
        for (i, &s) in set.iter().enumerate() {
            local[s] = Some(i);
        }
        Register { sites: set.into_iter().collect(), local }
    }

    /// Enough of the lattice to reproduce every observable supported on
    /// `region` (X/Z on the interior, Z on the rest of `region`) exactly:
    /// `region` plus every CZ partner of an interior site.
    pub fn for_region(circuit: &Circuit, interior: &BTreeSet<usize>, region: &BTreeSet<usize>) -> Self {
        let mut sites = region.clone();
        for g in &circuit.gates {
            if let Gate::Cz { a, b, .. } = *g {
                if interior.contains(&a) {
                    sites.insert(b);
                }
                if interior.contains(&b) {
                    sites.insert(a);
                }
            }
        }
        Self::from_sites(circuit.num_qubits(), sites)
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn sites(&self) -> &[usize] {
        &self.sites
    }

    pub fn local(&self, site: usize) -> Option<usize> {
        self.local.get(site).copied().flatten()
    }

    /// Re-index a lattice Pauli string onto register qubits.
    pub fn localize(&self, p: &PauliString) -> Result<PauliString> {
        let mut out = PauliString::identity().with_phase(p.phase());
        for (q, pq) in p.iter() {
            let l = self
                .local(q)
                .ok_or_else(|| Error::InvalidRegion(format!("site {q} is outside the simulated register")))?;
            out.set(l, pq);
        }
        Ok(out)
    }
}

/// `exp(-i theta Z)` on one site.
pub fn apply_dephasing<T: Scalar>(state: &mut StateVector<T>, site: usize, theta: T) -> Result<()> {
    state.apply_z_rotation(theta, site)
}

/// CZ followed by `exp(i theta Z Z)`.
pub fn noisy_cz<T: Scalar>(state: &mut StateVector<T>, a: usize, b: usize, theta: T) -> Result<()> {
    state.apply_cz(a, b)?;
    state.apply_zz_phase(theta, a, b)
}

/// One trajectory on `register`. Measurements are sampled from `rng`.
pub fn simulate_trajectory<T: Scalar>(
    circuit: &Circuit,
    register: &Register,
    model: &NoiseModel,
    draws: &UnitDraws,
    cap: usize,
    rng: &mut ChaCha8Rng,
) -> Result<StateVector<T>> {
    let mut s = StateVector::from_product(register.len(), cap, |q| circuit.init_plus[register.sites[q]])?;
    let dephase_at_init = model.kind == NoiseKind::Dephasing && model.insertion == Insertion::AfterInit;
    let dephase_per_gate = model.kind == NoiseKind::Dephasing && model.insertion == Insertion::PerCzGate;
    if dephase_at_init {
        for (q, &site) in register.sites.iter().enumerate() {
            let theta = draws.site[site] * model.site_theta_prime(site);
            if theta != 0.0 {
                apply_dephasing(&mut s, q, T::of(theta))?;
            }
        }
    }
    let mut k = 0usize;
    for g in &circuit.gates {
        match *g {
            Gate::H(site) => {
                if let Some(q) = register.local(site) {
                    s.apply_h(q)?;
                }
            }
            Gate::Cz { a, b, .. } => {
                let u = draws.gate[k];
                k += 1;
                let (Some(qa), Some(qb)) = (register.local(a), register.local(b)) else {
                    continue;
                };
                match model.kind {
                    NoiseKind::IsingCz if model.theta_prime != 0.0 => {
                        noisy_cz(&mut s, qa, qb, T::of(u * model.theta_prime))?;
                    }
                    _ => s.apply_cz(qa, qb)?,
                }
                if dephase_per_gate {
                    for (q, site) in [(qa, a), (qb, b)] {
                        apply_dephasing(&mut s, q, T::of(u * model.site_theta_prime(site)))?;
                    }
                }
            }
            Gate::MeasureX(site) => {
                if let Some(q) = register.local(site) {
                    s.measure(&PauliString::single(q, Pauli::X), false, rng)?;
                }
            }
        }
    }
    Ok(s)
}

/// Run all trajectories in parallel and return `eval(t, state)` for each, in
/// trajectory order.
pub fn run_trajectories<T, F>(
    circuit: &Circuit,
    register: &Register,
    model: &NoiseModel,
    plan: &TrajectoryPlan,
    cap: usize,
    eval: F,
) -> Result<Vec<Vec<f64>>>
where
    T: Scalar,
    F: Fn(usize, &StateVector<T>) -> Result<Vec<f64>> + Sync,
{
    if plan.trajectories == 0 {
        return Err(Error::NoTrajectories);
    }
    model.validate()?;
    if register.len() > cap {
        return Err(Error::TooManyQubits { n: register.len(), cap });
    }
    (0..plan.trajectories)
        .into_par_iter()
        .map(|t| {
            let mut rng = plan.rng(t);
            let draws = UnitDraws::draw(circuit, model.shared_theta, &mut rng);
            let state = simulate_trajectory::<T>(circuit, register, model, &draws, cap, &mut rng)?;
            eval(t, &state)
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObservableStats {
    pub mean: f64,
    pub std: f64,
    pub se: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleStats {
    pub trajectories: usize,
    pub observables: Vec<ObservableStats>,
}

impl EnsembleStats {
    /// Column statistics of per-trajectory rows, summed in row order. The
    /// standard deviation uses `N - 1` and is 0 for a single trajectory.
    pub fn from_samples(samples: &[Vec<f64>]) -> Result<Self> {
        let n = samples.len();
        if n == 0 {
            return Err(Error::NoTrajectories);
        }
        let width = samples[0].len();
        let observables = (0..width)
            .map(|j| {
                let mean = samples.iter().map(|r| r[j]).sum::<f64>() / n as f64;
                let std = if n > 1 {
                    (samples.iter().map(|r| (r[j] - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
                } else {
                    0.0
                };
                ObservableStats { mean, std, se: std / (n as f64).sqrt() }
            })
            .collect();
        Ok(EnsembleStats { trajectories: n, observables })
    }
}

/// Trajectory-averaged Pauli expectations over the whole lattice.
pub fn run_monte_carlo(
    lattice: &Lattice,
    seq: &ConstructionSequence,
    model: &NoiseModel,
    plan: &TrajectoryPlan,
    observables: &[PauliString],
) -> Result<EnsembleStats> {
    if observables.is_empty() {
        return Err(Error::EmptyObservables);
    }
    seq.validate()?;
    for o in observables {
        o.require_hermitian()?;
    }
    let circuit = Circuit::lower(lattice, seq);
    let register = Register::full(circuit.num_qubits());
    let rows = run_trajectories::<f64, _>(&circuit, &register, model, plan, DEFAULT_QUBIT_CAP, |_, s| {
        observables.iter().map(|o| s.expectation(o)).collect()
    })?;
    EnsembleStats::from_samples(&rows)
}
