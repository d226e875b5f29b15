//! Graph-level model of the constructions: edge toggling under CZ, the
//! |0>-spectator rule, graph stabilizers, local complementation and the
//! X-measurement rule, plus the surface-code generators of scheme (ii).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Gate};
use crate::error::{Error, Result};
use crate::lattice::{ConstructionSequence, Lattice, RowParity, Species};
use crate::pauli::{Pauli, PauliString};

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Graph {
    adj: BTreeMap<usize, BTreeSet<usize>>,
}

impl Graph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_edges(vertices: impl IntoIterator<Item = usize>, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = Graph::new();
        for v in vertices {
            g.add_vertex(v);
        }
        for &(a, b) in edges {
            if a == b {
                return Err(Error::SameSite(a));
            }
            g.add_vertex(a);
            g.add_vertex(b);
            g.toggle_edge(a, b);
        }
        Ok(g)
    }

    pub fn add_vertex(&mut self, v: usize) {
        self.adj.entry(v).or_default();
    }

    pub fn remove_vertex(&mut self, v: usize) {
        if let Some(nbrs) = self.adj.remove(&v) {
            for u in nbrs {
                if let Some(set) = self.adj.get_mut(&u) {
                    set.remove(&v);
                }
            }
        }
    }

    pub fn contains(&self, v: usize) -> bool {
        self.adj.contains_key(&v)
    }

    /// Toggle `{a, b}`; both endpoints must already be vertices.
    pub fn toggle_edge(&mut self, a: usize, b: usize) {
        debug_assert!(a != b && self.contains(a) && self.contains(b));
        let present = self.adj.get_mut(&a).map(|s| s.remove(&b)).unwrap_or(false);
        if present {
            self.adj.get_mut(&b).map(|s| s.remove(&a));
        } else {
            self.adj.entry(a).or_default().insert(b);
            self.adj.entry(b).or_default().insert(a);
        }
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adj.get(&a).is_some_and(|s| s.contains(&b))
    }

    pub fn vertices(&self) -> impl Iterator<Item = usize> + '_ {
        self.adj.keys().copied()
    }

    pub fn num_vertices(&self) -> usize {
        self.adj.len()
    }

    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.adj.get(&v).into_iter().flat_map(|s| s.iter().copied())
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj.get(&v).map_or(0, BTreeSet::len)
    }

    /// Edges `(a, b)` with `a < b`, sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.adj.iter().flat_map(|(&a, nbrs)| nbrs.range(a + 1..).map(move |&b| (a, b))).collect()
    }

    pub fn num_edges(&self) -> usize {
        self.adj.values().map(BTreeSet::len).sum::<usize>() / 2
    }

    /// Subgraph induced on `keep`.
    pub fn induced(&self, keep: &BTreeSet<usize>) -> Graph {
        let adj = self
            .adj
            .iter()
            .filter(|(v, _)| keep.contains(v))
            .map(|(&v, nbrs)| (v, nbrs.intersection(keep).copied().collect()))
            .collect();
        Graph { adj }
    }

    /// One line per vertex: `v: n1 n2 ...`.
    pub fn to_adjacency_text(&self) -> String {
        let mut out = String::new();
        for (v, nbrs) in &self.adj {
            let _ = write!(out, "{v}:");
            for u in nbrs {
                let _ = write!(out, " {u}");
            }
            out.push('\n');
        }
        out
    }

    /// Edge list with lattice positions, for plotting.
    pub fn to_edge_csv(&self, lattice: &Lattice) -> String {
        let mut out = String::from("a,b,ax,ay,bx,by\n");
        for (a, b) in self.edges() {
            let (ax, ay) = lattice.site(a).position();
            let (bx, by) = lattice.site(b).position();
            let _ = writeln!(out, "{a},{b},{ax},{ay},{bx},{by}");
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum NodeStatus {
    Zero,
    Plus,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TrackedState {
    pub status: Vec<NodeStatus>,
    edges: Graph,
}

impl TrackedState {
    pub fn new(init_plus: &[bool]) -> Self {
        let status = init_plus.iter().map(|&p| if p { NodeStatus::Plus } else { NodeStatus::Zero }).collect();
        let mut edges = Graph::new();
        for v in 0..init_plus.len() {
            edges.add_vertex(v);
        }
        TrackedState { status, edges }
    }

    pub fn apply(&mut self, gate: &Gate) -> Result<()> {
        match *gate {
            Gate::Cz { a, b, .. } => {
                if self.status[a] == NodeStatus::Plus && self.status[b] == NodeStatus::Plus {
                    self.edges.toggle_edge(a, b);
                }
            }
            Gate::H(s) => match self.status[s] {
                NodeStatus::Zero => self.status[s] = NodeStatus::Plus,
                NodeStatus::Plus if self.edges.degree(s) == 0 => self.status[s] = NodeStatus::Zero,
                NodeStatus::Plus => return Err(Error::HadamardOnEntangledVertex(s)),
            },
            Gate::MeasureX(_) => return Err(Error::UnsupportedOp("measure_x".into())),
        }
        Ok(())
    }

    /// Plus vertices with their edges.
    pub fn graph(&self) -> Graph {
        let keep: BTreeSet<usize> = (0..self.status.len()).filter(|&v| self.status[v] == NodeStatus::Plus).collect();
        self.edges.induced(&keep)
    }
}

/// Graph produced by a measurement-free sequence.
pub fn track_sequence(lattice: &Lattice, seq: &ConstructionSequence) -> Result<Graph> {
    let circuit = Circuit::lower(lattice, seq);
    let mut state = TrackedState::new(&circuit.init_plus);
    for g in &circuit.gates {
        state.apply(g)?;
    }
    Ok(state.graph())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StabilizerGenerator {
    pub center: usize,
    pub pauli: PauliString,
}

/// `S_i = X_i prod_{j in N(i)} Z_j` for every vertex, in vertex order.
pub fn graph_stabilizers(graph: &Graph) -> Vec<StabilizerGenerator> {
    graph
        .vertices()
        .map(|v| StabilizerGenerator { center: v, pauli: PauliString::graph_stabilizer(v, graph.neighbors(v)) })
        .collect()
}

/// Generators of the full state on `n` qubits: graph stabilizers for
/// vertices and `+Z` for every other site.
pub fn state_generators(graph: &Graph, n: usize) -> Vec<PauliString> {
    (0..n)
        .map(|v| {
            if graph.contains(v) {
                PauliString::graph_stabilizer(v, graph.neighbors(v))
            } else {
                PauliString::single(v, Pauli::Z)
            }
        })
        .collect()
}

/// Complement the edge set inside `N(v)`.
pub fn local_complementation(graph: &Graph, v: usize) -> Result<Graph> {
    if !graph.contains(v) {
        return Err(Error::UnknownVertex(v));
    }
    let nbrs: Vec<usize> = graph.neighbors(v).collect();
    let mut out = graph.clone();
    for (i, &a) in nbrs.iter().enumerate() {
        for &b in &nbrs[i + 1..] {
            out.toggle_edge(a, b);
        }
    }
    Ok(out)
}

/// Graph after measuring X on `v` with outcome +1: `tau_b0(tau_v(tau_b0(G)))`
/// minus `v`. `special` defaults to the lowest-index neighbour. The result
/// equals the post-measurement state up to the local Clifford
/// `sqrt(+iY)_b0 prod_{b in N(v) \ N(b0) \ {b0}} Z_b`.
pub fn measure_x_graph_rule(graph: &Graph, v: usize, special: Option<usize>) -> Result<Graph> {
    if !graph.contains(v) {
        return Err(Error::UnknownVertex(v));
    }
    if graph.degree(v) == 0 {
        let mut out = graph.clone();
        out.remove_vertex(v);
        return Ok(out);
    }
    let b0 = match special {
        Some(b0) if graph.has_edge(v, b0) => b0,
        Some(b0) => return Err(Error::NotAdjacent { vertex: v, special: b0 }),
        None => graph.neighbors(v).next().expect("degree >= 1"),
    };
    let g = local_complementation(graph, b0)?;
    let g = local_complementation(&g, v)?;
    let mut g = local_complementation(&g, b0)?;
    g.remove_vertex(v);
    Ok(g)
}

/// Local Clifford relating the X-measurement rule's graph to the actual
/// post-measurement state (outcome +1), as a map on Pauli strings.
pub fn measure_x_byproduct(graph: &Graph, v: usize, special: Option<usize>) -> Result<LocalClifford> {
    if graph.degree(v) == 0 {
        return Ok(LocalClifford::default());
    }
    let b0 = special.unwrap_or_else(|| graph.neighbors(v).next().expect("degree >= 1"));
    if !graph.has_edge(v, b0) {
        return Err(Error::NotAdjacent { vertex: v, special: b0 });
    }
    let nb0: BTreeSet<usize> = graph.neighbors(b0).collect();
    let mut lc = LocalClifford::default();
    lc.ops.insert(b0, LocalOp::SqrtPlusIY);
    for b in graph.neighbors(v) {
        if b != b0 && !nb0.contains(&b) {
            lc.ops.insert(b, LocalOp::Z);
        }
    }
    Ok(lc)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LocalOp {
    Z,
    /// `exp(i pi/4 Y)`: X -> Z, Z -> -X.
    SqrtPlusIY,
}

/// Product of single-site Cliffords acting by conjugation.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LocalClifford {
    pub ops: BTreeMap<usize, LocalOp>,
}

impl LocalClifford {
    /// `U P U^dagger`.
    pub fn conjugate(&self, p: &PauliString) -> PauliString {
        let mut out = PauliString::identity().with_phase(p.phase());
        let mut negate = false;
        for (q, pq) in p.iter() {
            let mapped = match (self.ops.get(&q), pq) {
                (None, p) => p,
                (Some(LocalOp::Z), Pauli::X | Pauli::Y) => {
                    negate ^= true;
                    pq
                }
                (Some(LocalOp::Z), p) => p,
                (Some(LocalOp::SqrtPlusIY), Pauli::X) => Pauli::Z,
                (Some(LocalOp::SqrtPlusIY), Pauli::Z) => {
                    negate ^= true;
                    Pauli::X
                }
                (Some(LocalOp::SqrtPlusIY), p) => p,
            };
            out.set(q, mapped);
        }
        if negate {
            out.negated()
        } else {
            out
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CodeOperatorKind {
    /// X-type, centred on an odd-row Red position.
    Star,
    /// Z-type, centred on an even-row Red position.
    Plaquette,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CodeOperator {
    pub kind: CodeOperatorKind,
    /// Red site the operator is centred on.
    pub center: usize,
    pub pauli: PauliString,
}

/// Star and plaquette operators on the Blue sublattice. Blue sites are the
/// edge qubits; each Red position is a vertex or face whose four Blue
/// neighbours (fewer at the boundary) carry the operator. Odd-row Red
/// positions give X-type stars, even-row ones Z-type plaquettes.
pub fn surface_code_stabilizers(lattice: &Lattice, retained: &[usize]) -> Result<Vec<CodeOperator>> {
    let blue: BTreeSet<usize> = lattice.sites_of(Species::BlueCs).collect();
    let given: BTreeSet<usize> = retained.iter().copied().collect();
    if given != blue {
        let extra = given.difference(&blue).next();
        let missing = blue.difference(&given).next();
        return Err(Error::SurfaceCodePattern(format!(
            "expected exactly the {} Blue sites (first extra: {extra:?}, first missing: {missing:?})",
            blue.len()
        )));
    }
    let mut out = Vec::new();
    for r in lattice.sites_of(Species::RedLi) {
        let site = lattice.site(r);
        let (x, y) = site.doubled();
        let support: Vec<usize> = [(1, 0), (-1, 0), (0, 1), (0, -1)]
            .iter()
            .filter_map(|&(dx, dy)| lattice.index_at(x + dx, y + dy))
            .collect();
        if support.is_empty() {
            continue;
        }
        let (kind, p) = match site.row_parity() {
            RowParity::Odd => (CodeOperatorKind::Star, Pauli::X),
            RowParity::Even => (CodeOperatorKind::Plaquette, Pauli::Z),
        };
        out.push(CodeOperator {
            kind,
            center: r,
            pauli: PauliString::from_factors(support.into_iter().map(|q| (q, p))),
        });
    }
    Ok(out)
}
