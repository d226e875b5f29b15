//! Lowering of a construction sequence to a flat gate list on site indices.

use crate::lattice::{ConstructionSequence, GlobalOp, InitState, Lattice};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Gate {
    H(usize),
    /// `op` is the index of the global op that emitted the pair.
    Cz {
        a: usize,
        b: usize,
        op: usize,
    },
    MeasureX(usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Circuit {
    /// `true` for |+>, `false` for |0>, per site.
    pub init_plus: Vec<bool>,
    pub gates: Vec<Gate>,
}

impl Circuit {
    pub fn lower(lattice: &Lattice, seq: &ConstructionSequence) -> Circuit {
        let init_plus = lattice.sites().iter().map(|s| seq.init.state_of(s) == InitState::Plus).collect();
        let mut gates = Vec::new();
        for (op_index, op) in seq.ops.iter().enumerate() {
            match op {
                GlobalOp::RowHadamard { species, parity } => {
                    gates.extend(lattice.row_sites(*species, *parity).into_iter().map(Gate::H));
                }
                GlobalOp::GlobalCz { source, displacement } => {
                    gates.extend(lattice.cz_pairs(*source, *displacement).into_iter().map(|(a, b)| Gate::Cz {
                        a,
                        b,
                        op: op_index,
                    }));
                }
                GlobalOp::GlobalMeasureX { species } => {
                    gates.extend(lattice.sites_of(*species).map(Gate::MeasureX));
                }
            }
        }
        Circuit { init_plus, gates }
    }

    pub fn num_qubits(&self) -> usize {
        self.init_plus.len()
    }

    pub fn num_cz(&self) -> usize {
        self.gates.iter().filter(|g| matches!(g, Gate::Cz { .. })).count()
    }
}
