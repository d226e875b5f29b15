//! Running construction sequences on the two backends.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Gate};
use crate::error::Result;
use crate::graph::Graph;
use crate::lattice::{ConstructionSequence, Lattice};
use crate::pauli::{Pauli, PauliString};
use crate::scalar::Scalar;
use crate::statevector::StateVector;
use crate::tableau::{OutcomePolicy, Tableau};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeasurementEntry {
    pub site: usize,
    pub observable: String,
    pub outcome: i8,
    pub deterministic: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeasurementRecord {
    pub entries: Vec<MeasurementEntry>,
}

impl MeasurementRecord {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("site,observable,outcome,deterministic\n");
        for e in &self.entries {
            out.push_str(&format!("{},{},{},{}\n", e.site, e.observable, e.outcome, e.deterministic));
        }
        out
    }
}

pub fn init_tableau(circuit: &Circuit) -> Tableau {
    Tableau::from_product(circuit.num_qubits(), |q| circuit.init_plus[q])
}

/// Apply a lowered circuit to a tableau; X measurements run in gate order
/// (ascending site index within each global op).
pub fn apply_circuit_clifford<R: Rng + ?Sized>(
    tableau: &mut Tableau,
    gates: &[Gate],
    policy: OutcomePolicy,
    rng: &mut R,
    record: &mut MeasurementRecord,
) -> Result<()> {
    for g in gates {
        match *g {
            Gate::H(q) => tableau.apply_h(q)?,
            Gate::Cz { a, b, .. } => tableau.apply_cz(a, b)?,
            Gate::MeasureX(q) => {
                let p = PauliString::single(q, Pauli::X);
                let m = tableau.measure(&p, policy, rng)?;
                record.entries.push(MeasurementEntry {
                    site: q,
                    observable: p.to_string(),
                    outcome: m.outcome,
                    deterministic: m.deterministic,
                });
            }
        }
    }
    Ok(())
}

pub fn run_sequence_clifford<R: Rng + ?Sized>(
    lattice: &Lattice,
    seq: &ConstructionSequence,
    policy: OutcomePolicy,
    rng: &mut R,
) -> Result<(Tableau, MeasurementRecord)> {
    seq.validate()?;
    let circuit = Circuit::lower(lattice, seq);
    let mut t = init_tableau(&circuit);
    let mut record = MeasurementRecord::default();
    apply_circuit_clifford(&mut t, &circuit.gates, policy, rng, &mut record)?;
    Ok((t, record))
}

/// Noiseless dense run of a sequence (measurements post-selected to +1 if
/// `force_plus`, sampled otherwise).
pub fn run_sequence_statevector<T: Scalar, R: Rng + ?Sized>(
    lattice: &Lattice,
    seq: &ConstructionSequence,
    cap: usize,
    force_plus: bool,
    rng: &mut R,
) -> Result<StateVector<T>> {
    seq.validate()?;
    let circuit = Circuit::lower(lattice, seq);
    let mut s = StateVector::from_product(circuit.num_qubits(), cap, |q| circuit.init_plus[q])?;
    for g in &circuit.gates {
        match *g {
            Gate::H(q) => s.apply_h(q)?,
            Gate::Cz { a, b, .. } => s.apply_cz(a, b)?,
            Gate::MeasureX(q) => {
                s.measure(&PauliString::single(q, Pauli::X), force_plus, rng)?;
            }
        }
    }
    Ok(s)
}

/// `|+>^n` with CZ on every edge; qubit `q` of the result is site `q`, and
/// sites below `n` that are not vertices are left in |0>.
pub fn ideal_graph_state<T: Scalar>(graph: &Graph, n: usize, cap: usize) -> Result<StateVector<T>> {
    let mut s = StateVector::from_product(n, cap, |q| graph.contains(q))?;
    for (a, b) in graph.edges() {
        s.apply_cz(a, b)?;
    }
    Ok(s)
}
