//! Two-species lattice geometry, the global-operation vocabulary and the
//! canonical construction sequences.
//!
//! Coordinates are kept doubled so that every site sits on an integer grid
//! `(X, Y)` with `0 <= X < 2 Lx`, `0 <= Y < Ly`; the physical position in
//! lattice-constant units is `(X / 2, Y / 2)`. Red (Li) sites are those with
//! `X + Y` even and Blue (Cs) sites those with `X + Y` odd, so every row holds
//! `Lx` sites of each species and nearest neighbours along either axis, at
//! distance 1/2, belong to the other species. The sublattice index of a site
//! is `(ix, iy) = (X div 2, Y)`.
//!
//! Site order is the Red block row-major (`iy` outer, `ix` inner), then the
//! Blue block row-major.

use std::collections::BTreeSet;
use std::fmt::{self, Write as _};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Species {
    RedLi,
    BlueCs,
}

impl Species {
    pub const ALL: [Species; 2] = [Species::RedLi, Species::BlueCs];

    pub fn other(self) -> Species {
        match self {
            Species::RedLi => Species::BlueCs,
            Species::BlueCs => Species::RedLi,
        }
    }

    fn index(self) -> usize {
        self as usize
    }

    fn token(self) -> &'static str {
        match self {
            Species::RedLi => "red",
            Species::BlueCs => "blue",
        }
    }
}

impl FromStr for Species {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "red" | "li" | "redli" => Ok(Species::RedLi),
            "blue" | "cs" | "bluecs" => Ok(Species::BlueCs),
            other => Err(format!("unknown species '{other}'")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum RowParity {
    Even,
    Odd,
}

impl RowParity {
    pub const ALL: [RowParity; 2] = [RowParity::Even, RowParity::Odd];

    pub fn of_row(y: i64) -> Self {
        if y.rem_euclid(2) == 0 {
            RowParity::Even
        } else {
            RowParity::Odd
        }
    }

    fn index(self) -> usize {
        self as usize
    }

    fn token(self) -> &'static str {
        match self {
            RowParity::Even => "even",
            RowParity::Odd => "odd",
        }
    }
}

impl FromStr for RowParity {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "even" => Ok(RowParity::Even),
            "odd" => Ok(RowParity::Odd),
            other => Err(format!("unknown row parity '{other}'")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum InitState {
    Zero,
    Plus,
}

impl InitState {
    fn token(self) -> &'static str {
        match self {
            InitState::Zero => "zero",
            InitState::Plus => "plus",
        }
    }
}

impl FromStr for InitState {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "zero" | "0" => Ok(InitState::Zero),
            "plus" | "+" => Ok(InitState::Plus),
            other => Err(format!("unknown initial state '{other}'")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Site {
    pub species: Species,
    pub ix: i64,
    pub iy: i64,
}

impl Site {
    /// Doubled coordinates `(X, Y)`.
    pub fn doubled(&self) -> (i64, i64) {
        let shift = match self.species {
            Species::RedLi => self.iy.rem_euclid(2),
            Species::BlueCs => 1 - self.iy.rem_euclid(2),
        };
        (2 * self.ix + shift, self.iy)
    }

    /// Position in lattice-constant units.
    pub fn position(&self) -> (f64, f64) {
        let (x, y) = self.doubled();
        (x as f64 / 2.0, y as f64 / 2.0)
    }

    /// One-based physical row index `k`.
    pub fn row(&self) -> u32 {
        self.iy as u32 + 1
    }

    pub fn row_parity(&self) -> RowParity {
        RowParity::of_row(self.iy)
    }

    /// Column parity of the doubled x coordinate.
    pub fn column_even(&self) -> bool {
        self.doubled().0 % 2 == 0
    }
}

impl fmt::Display for Site {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (x, y) = self.doubled();
        write!(f, "{}({x},{y})", self.species.token())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Boundary {
    #[default]
    Open,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lattice {
    lx: usize,
    ly: usize,
    boundary: Boundary,
    sites: Vec<Site>,
}

impl Lattice {
    pub fn new(lx: i64, ly: i64) -> Result<Self> {
        if lx < 1 || ly < 1 {
            return Err(Error::InvalidExtent { lx, ly });
        }
        let mut sites = Vec::with_capacity((2 * lx * ly) as usize);
        for species in Species::ALL {
            for iy in 0..ly {
                for ix in 0..lx {
                    sites.push(Site { species, ix, iy });
                }
            }
        }
        Ok(Lattice { lx: lx as usize, ly: ly as usize, boundary: Boundary::Open, sites })
    }

    pub fn lx(&self) -> usize {
        self.lx
    }

    pub fn ly(&self) -> usize {
        self.ly
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn num_sites(&self) -> usize {
        self.sites.len()
    }

    pub fn sites(&self) -> &[Site] {
        &self.sites
    }

    pub fn site(&self, index: usize) -> Site {
        self.sites[index]
    }

    pub fn index_of(&self, species: Species, ix: i64, iy: i64) -> Option<usize> {
        if ix < 0 || iy < 0 || ix >= self.lx as i64 || iy >= self.ly as i64 {
            return None;
        }
        let block = species.index() * self.lx * self.ly;
        Some(block + iy as usize * self.lx + ix as usize)
    }

    /// Site at doubled coordinates, if inside the lattice.
    pub fn index_at(&self, x: i64, y: i64) -> Option<usize> {
        if x < 0 || y < 0 || x >= 2 * self.lx as i64 || y >= self.ly as i64 {
            return None;
        }
        let species = if (x + y) % 2 == 0 { Species::RedLi } else { Species::BlueCs };
        self.index_of(species, x / 2, y)
    }

    pub fn sites_of(&self, species: Species) -> impl Iterator<Item = usize> + '_ {
        let block = self.lx * self.ly;
        let start = species.index() * block;
        start..start + block
    }

    /// Source/target pairs of a displaced CZ wave; pairs leaving the lattice
    /// are skipped.
    pub fn cz_pairs(&self, source: Species, d: Displacement) -> Vec<(usize, usize)> {
        self.sites_of(source)
            .filter_map(|s| {
                let (x, y) = self.sites[s].doubled();
                self.index_at(x + d.dx2, y + d.dy2).map(|t| (s, t))
            })
            .collect()
    }

    /// Sites addressed by a row-selective operation.
    pub fn row_sites(&self, species: Species, parity: RowParity) -> Vec<usize> {
        self.sites_of(species).filter(|&s| self.sites[s].row_parity() == parity).collect()
    }
}

/// Displacement in half lattice constants: `(dx2 / 2, dy2 / 2)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Displacement {
    pub dx2: i64,
    pub dy2: i64,
}

impl Displacement {
    /// Validated constructor from half-unit components.
    pub fn new(dx2: i64, dy2: i64) -> Result<Self> {
        if (dx2 + dy2).rem_euclid(2) == 0 {
            return Err(Error::SameSpeciesDisplacement);
        }
        Ok(Displacement { dx2, dy2 })
    }

    /// From lattice-constant components, which must be multiples of 1/2.
    pub fn from_units(dx: f64, dy: f64) -> Result<Self> {
        let half = |v: f64| {
            let d = v * 2.0;
            (v.is_finite() && (d - d.round()).abs() < 1e-9).then_some(d.round() as i64)
        };
        match (half(dx), half(dy)) {
            (Some(a), Some(b)) => Self::new(a, b),
            _ => Err(Error::NonHalfInteger { dx, dy }),
        }
    }

    pub fn units(&self) -> (f64, f64) {
        (self.dx2 as f64 / 2.0, self.dy2 as f64 / 2.0)
    }
}

fn fmt_half(v: i64) -> String {
    if v % 2 == 0 {
        format!("{}", v / 2)
    } else {
        format!("{}", v as f64 / 2.0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GlobalOp {
    RowHadamard { species: Species, parity: RowParity },
    GlobalCz { source: Species, displacement: Displacement },
    GlobalMeasureX { species: Species },
}

impl fmt::Display for GlobalOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GlobalOp::RowHadamard { species, parity } => {
                write!(f, "hadamard {} {}", species.token(), parity.token())
            }
            GlobalOp::GlobalCz { source, displacement } => {
                write!(f, "cz {} {} {}", source.token(), fmt_half(displacement.dx2), fmt_half(displacement.dy2))
            }
            GlobalOp::GlobalMeasureX { species } => write!(f, "measure_x {}", species.token()),
        }
    }
}

/// Initial product state per (species, row parity).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct InitPattern {
    states: [[InitState; 2]; 2],
}

impl Default for InitPattern {
    fn default() -> Self {
        Self::uniform(InitState::Plus)
    }
}

impl InitPattern {
    pub fn uniform(state: InitState) -> Self {
        InitPattern { states: [[state; 2]; 2] }
    }

    pub fn with(mut self, species: Species, parity: RowParity, state: InitState) -> Self {
        self.states[species.index()][parity.index()] = state;
        self
    }

    pub fn get(&self, species: Species, parity: RowParity) -> InitState {
        self.states[species.index()][parity.index()]
    }

    pub fn state_of(&self, site: &Site) -> InitState {
        self.get(site.species, site.row_parity())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct ConstructionSequence {
    pub init: InitPattern,
    pub ops: Vec<GlobalOp>,
}

impl ConstructionSequence {
    pub fn new(init: InitPattern, ops: Vec<GlobalOp>) -> Result<Self> {
        let seq = ConstructionSequence { init, ops };
        seq.validate()?;
        Ok(seq)
    }

    /// Every measurement must come after every CZ.
    pub fn validate(&self) -> Result<()> {
        let first_measure = self.ops.iter().position(|op| matches!(op, GlobalOp::GlobalMeasureX { .. }));
        let last_cz = self.ops.iter().rposition(|op| matches!(op, GlobalOp::GlobalCz { .. }));
        if let (Some(m), Some(c)) = (first_measure, last_cz) {
            if c > m {
                return Err(Error::MeasurementBeforeCz { measure_index: m, cz_index: c });
            }
        }
        Ok(())
    }

    pub fn count_cz(&self) -> usize {
        self.ops.iter().filter(|op| matches!(op, GlobalOp::GlobalCz { .. })).count()
    }

    pub fn count_hadamard(&self) -> usize {
        self.ops.iter().filter(|op| matches!(op, GlobalOp::RowHadamard { .. })).count()
    }

    /// The sequence with all measurements dropped.
    pub fn entangling_part(&self) -> ConstructionSequence {
        ConstructionSequence {
            init: self.init,
            ops: self.ops.iter().filter(|op| !matches!(op, GlobalOp::GlobalMeasureX { .. })).cloned().collect(),
        }
    }

    /// Sequence truncated to the first `len` ops.
    pub fn prefix(&self, len: usize) -> ConstructionSequence {
        ConstructionSequence { init: self.init, ops: self.ops[..len.min(self.ops.len())].to_vec() }
    }

    /// Sites measured by the sequence, in ascending order.
    pub fn measured_sites(&self, lattice: &Lattice) -> Vec<usize> {
        let mut out = BTreeSet::new();
        for op in &self.ops {
            if let GlobalOp::GlobalMeasureX { species } = op {
                out.extend(lattice.sites_of(*species));
            }
        }
        out.into_iter().collect()
    }

    /// Canonical text form; `parse_sequence(seq.to_text())` reproduces `seq`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for species in Species::ALL {
            for parity in RowParity::ALL {
                let _ = writeln!(
                    out,
                    "init {} {} {}",
                    species.token(),
                    parity.token(),
                    self.init.get(species, parity).token()
                );
            }
        }
        for op in &self.ops {
            let _ = writeln!(out, "{op}");
        }
        out
    }
}

impl FromStr for ConstructionSequence {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_sequence(s)
    }
}

/// Parse the line-oriented sequence format. Init entries that are not given
/// default to `plus`.
pub fn parse_sequence(text: &str) -> Result<ConstructionSequence> {
    let mut init = InitPattern::default();
    let mut ops = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let err = |message: String| Error::Parse { line, message };
        let words: Vec<&str> = content.split_whitespace().collect();
        let arity = |n: usize| {
            if words.len() == n + 1 {
                Ok(())
            } else {
                Err(err(format!("'{}' takes {n} arguments, got {}", words[0], words.len() - 1)))
            }
        };
        match words[0] {
            "init" => {
                arity(3)?;
                let species: Species = words[1].parse().map_err(err)?;
                let parity: RowParity = words[2].parse().map_err(err)?;
                let state: InitState = words[3].parse().map_err(err)?;
                init = init.with(species, parity, state);
            }
            "hadamard" => {
                arity(2)?;
                let species = words[1].parse().map_err(err)?;
                let parity = words[2].parse().map_err(err)?;
                ops.push(GlobalOp::RowHadamard { species, parity });
            }
            "cz" => {
                arity(3)?;
                let source = words[1].parse().map_err(err)?;
                let num = |w: &str| w.parse::<f64>().map_err(|e| err(format!("bad number '{w}': {e}")));
                let displacement =
                    Displacement::from_units(num(words[2])?, num(words[3])?).map_err(|e| err(e.to_string()))?;
                ops.push(GlobalOp::GlobalCz { source, displacement });
            }
            "measure_x" => {
                arity(1)?;
                let species = words[1].parse().map_err(err)?;
                ops.push(GlobalOp::GlobalMeasureX { species });
            }
            other => return Err(err(format!("unknown directive '{other}'"))),
        }
    }
    ConstructionSequence::new(init, ops)
}

fn cz(source: Species, dx2: i64, dy2: i64) -> GlobalOp {
    GlobalOp::GlobalCz { source, displacement: Displacement::new(dx2, dy2).expect("cross-species") }
}

/// Bilayer cubic cluster on the even rows.
///
/// Red even rows start in |0> and are switched on by the single row
/// Hadamard. Odd rows are entangled into horizontal chains by step (b),
/// then step (c) toggles every second chain link off, and step (d) adds the
/// remaining four links of every even-row Red site: its Blue partner is at
/// `+1/2` (from step c), in-layer neighbours at `-1/2` and `+3/2`, and the
/// two out-of-row neighbours at `(+1/2, +-1)`.
pub fn scheme_i_sequence(_lattice: &Lattice) -> ConstructionSequence {
    use Species::*;
    let init = InitPattern::uniform(InitState::Plus).with(RedLi, RowParity::Even, InitState::Zero);
    let ops = vec![
        cz(RedLi, 1, 0),
        cz(RedLi, -1, 0),
        GlobalOp::RowHadamard { species: RedLi, parity: RowParity::Even },
        cz(RedLi, 1, 0),
        cz(RedLi, -1, 0),
        cz(RedLi, 3, 0),
        cz(RedLi, 1, 2),
        cz(RedLi, 1, -2),
    ];
    ConstructionSequence { init, ops }
}

/// Surface-code extraction: Red even rows are active, Red odd rows stay in
/// |0>. Four nearest-neighbour CZ waves followed by X on every Red site
/// leave a surface code on Blue.
pub fn scheme_ii_sequence(_lattice: &Lattice) -> ConstructionSequence {
    use Species::*;
    let init = InitPattern::uniform(InitState::Plus).with(RedLi, RowParity::Odd, InitState::Zero);
    let ops = vec![
        cz(RedLi, 1, 0),
        cz(RedLi, -1, 0),
        cz(RedLi, 0, 1),
        cz(RedLi, 0, -1),
        GlobalOp::GlobalMeasureX { species: RedLi },
    ];
    ConstructionSequence { init, ops }
}

/// The two canonical constructions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Scheme {
    /// Bilayer cubic cluster.
    I,
    /// Surface-code extraction.
    II,
}

impl Scheme {
    pub fn sequence(self, lattice: &Lattice) -> ConstructionSequence {
        match self {
            Scheme::I => scheme_i_sequence(lattice),
            Scheme::II => scheme_ii_sequence(lattice),
        }
    }

    /// Bipartition used for verification of the (pre-measurement) graph.
    pub fn bipartition_mode(self) -> BipartitionMode {
        match self {
            Scheme::I => BipartitionMode::ByColumns,
            Scheme::II => BipartitionMode::BySpecies,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Scheme::I => "i",
            Scheme::II => "ii",
        }
    }
}

impl FromStr for Scheme {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "i" | "1" => Ok(Scheme::I),
            "ii" | "2" => Ok(Scheme::II),
            other => Err(format!("unknown scheme '{other}'")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BipartitionMode {
    /// A = even doubled column, B = odd.
    ByColumns,
    /// A = Red, B = Blue.
    BySpecies,
}

impl BipartitionMode {
    fn name(self) -> &'static str {
        match self {
            BipartitionMode::ByColumns => "ByColumns",
            BipartitionMode::BySpecies => "BySpecies",
        }
    }
}

impl FromStr for BipartitionMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "columns" | "bycolumns" => Ok(BipartitionMode::ByColumns),
            "species" | "byspecies" => Ok(BipartitionMode::BySpecies),
            other => Err(format!("unknown bipartition mode '{other}'")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bipartition {
    pub a: BTreeSet<usize>,
    pub b: BTreeSet<usize>,
    pub mode: BipartitionMode,
}

impl Bipartition {
    /// Split the graph's vertices by `mode`, rejecting any edge inside a set.
    pub fn new(lattice: &Lattice, graph: &crate::graph::Graph, mode: BipartitionMode) -> Result<Self> {
        let in_a = |s: usize| {
            let site = lattice.site(s);
            match mode {
                BipartitionMode::ByColumns => site.column_even(),
                BipartitionMode::BySpecies => site.species == Species::RedLi,
            }
        };
        let (mut a, mut b) = (BTreeSet::new(), BTreeSet::new());
        for v in graph.vertices() {
            if v >= lattice.num_sites() {
                return Err(Error::UnknownVertex(v));
            }
            if in_a(v) {
                a.insert(v);
            } else {
                b.insert(v);
            }
        }
        for (u, v) in graph.edges() {
            if in_a(u) == in_a(v) {
                return Err(Error::NotBipartite { mode: mode.name(), a: u, b: v });
            }
        }
        Ok(Bipartition { a, b, mode })
    }

    /// Which side a site is on (`Some(true)` for A).
    pub fn side(&self, site: usize) -> Option<bool> {
        if self.a.contains(&site) {
            Some(true)
        } else if self.b.contains(&site) {
            Some(false)
        } else {
            None
        }
    }
}

/// Interior `M` and its graph border.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalRegion {
    pub interior: BTreeSet<usize>,
    pub border: BTreeSet<usize>,
}

impl LocalRegion {
    /// Region with border set to every graph neighbour of the interior that
    /// is not itself interior.
    pub fn new(graph: &crate::graph::Graph, interior: impl IntoIterator<Item = usize>) -> Result<Self> {
        let interior: BTreeSet<usize> = interior.into_iter().collect();
        if interior.is_empty() {
            return Err(Error::InvalidRegion("empty interior".into()));
        }
        let mut border = BTreeSet::new();
        for &v in &interior {
            if !graph.contains(v) {
                return Err(Error::UnknownVertex(v));
            }
            border.extend(graph.neighbors(v).filter(|u| !interior.contains(u)));
        }
        Ok(LocalRegion { interior, border })
    }

    /// The whole graph as one region.
    pub fn whole(graph: &crate::graph::Graph) -> Result<Self> {
        Self::new(graph, graph.vertices())
    }

    /// Check a region supplied from outside against the graph.
    pub fn check(&self, graph: &crate::graph::Graph) -> Result<()> {
        let expected = Self::new(graph, self.interior.iter().copied())?;
        if expected.border != self.border {
            return Err(Error::InvalidRegion("border is not the neighbour closure of the interior".into()));
        }
        Ok(())
    }

    pub fn sites(&self) -> BTreeSet<usize> {
        self.interior.union(&self.border).copied().collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn build_lattice_counts() {
        assert_eq!(Lattice::new(1, 1).unwrap().num_sites(), 2);
        assert_eq!(Lattice::new(2, 2).unwrap().num_sites(), 8);
        assert_eq!(Lattice::new(4, 3).unwrap().num_sites(), 24);
        assert!(matches!(Lattice::new(0, 3), Err(Error::InvalidExtent { .. })));
        assert!(Lattice::new(2, -1).is_err());
    }

    #[test]
    fn coordinate_convention() {
        let l = Lattice::new(3, 3).unwrap();
        let red = l.index_of(Species::RedLi, 1, 1).unwrap();
        assert_eq!(red, 4);
        assert_eq!(l.site(red).doubled(), (3, 1));
        assert_eq!(l.site(red).position(), (1.5, 0.5));
        let blue = l.index_of(Species::BlueCs, 1, 1).unwrap();
        assert_eq!(blue, 9 + 4);
        assert_eq!(l.site(blue).position(), (1.0, 0.5));
        // injective and consistent with index_at
        let mut seen = BTreeSet::new();
        for (i, s) in l.sites().iter().enumerate() {
            let (x, y) = s.doubled();
            assert!(seen.insert((x, y)));
            assert_eq!(l.index_at(x, y), Some(i));
        }
    }

    #[test]
    fn displacement_validation() {
        assert!(Displacement::from_units(0.5, 0.0).is_ok());
        assert_eq!(Displacement::from_units(1.0, 0.0), Err(Error::SameSpeciesDisplacement));
        assert_eq!(Displacement::from_units(0.5, 0.5), Err(Error::SameSpeciesDisplacement));
        assert!(matches!(Displacement::from_units(0.3, 0.0), Err(Error::NonHalfInteger { .. })));
    }

    #[test]
    fn cz_pairs_form_a_matching() {
        let l = Lattice::new(4, 4).unwrap();
        for op in scheme_i_sequence(&l).ops.iter().chain(scheme_ii_sequence(&l).ops.iter()) {
            if let GlobalOp::GlobalCz { source, displacement } = op {
                let pairs = l.cz_pairs(*source, *displacement);
                let mut used = BTreeSet::new();
                for (a, b) in pairs {
                    assert_ne!(l.site(a).species, l.site(b).species);
                    assert!(used.insert(a) && used.insert(b));
                }
            }
        }
    }

    #[test]
    fn canonical_sequence_shapes() {
        let l = Lattice::new(4, 4).unwrap();
        let s1 = scheme_i_sequence(&l);
        assert_eq!(s1.count_cz(), 7);
        assert_eq!(s1.count_hadamard(), 1);
        let s2 = scheme_ii_sequence(&l);
        assert_eq!(s2.count_cz(), 4);
        assert_eq!(s2.ops.last(), Some(&GlobalOp::GlobalMeasureX { species: Species::RedLi }));
        assert_eq!(scheme_i_sequence(&l).to_text(), s1.to_text());
    }

    #[test]
    fn tiny_lattice_clips_pairs() {
        let l = Lattice::new(1, 1).unwrap();
        let s = scheme_ii_sequence(&l);
        assert_eq!(s.count_cz(), 4);
        let total: usize = s
            .ops
            .iter()
            .filter_map(|op| match op {
                GlobalOp::GlobalCz { source, displacement } => Some(l.cz_pairs(*source, *displacement).len()),
                _ => None,
            })
            .sum();
        assert_eq!(total, 1);
    }

    #[test]
    fn text_round_trip() {
        let l = Lattice::new(3, 3).unwrap();
        for seq in [scheme_i_sequence(&l), scheme_ii_sequence(&l), ConstructionSequence::default()] {
            let text = seq.to_text();
            assert_eq!(parse_sequence(&text).unwrap(), seq);
            assert_eq!(parse_sequence(&text).unwrap().to_text(), text);
        }
    }

    #[test]
    fn parse_errors() {
        let e = parse_sequence("init red even plus\ncz red 1 0\n").unwrap_err();
        assert_eq!(e, Error::Parse { line: 2, message: "displacement maps within one species".into() });
        assert!(matches!(parse_sequence("cz red 0.25 0"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_sequence("\n\nfoo red"), Err(Error::Parse { line: 3, .. })));
        assert!(matches!(parse_sequence("init red even maybe"), Err(Error::Parse { .. })));
        assert!(matches!(
            parse_sequence("measure_x red\ncz red 0.5 0"),
            Err(Error::MeasurementBeforeCz { measure_index: 0, cz_index: 1 })
        ));
        let empty = parse_sequence("# nothing\n\n").unwrap();
        assert!(empty.ops.is_empty());
    }

    #[test]
    fn comments_and_aliases() {
        let s = parse_sequence("init li odd zero # gate\ncz cs -0.5 1\n").unwrap();
        assert_eq!(s.init.get(Species::RedLi, RowParity::Odd), InitState::Zero);
        assert_eq!(
            s.ops,
            vec![GlobalOp::GlobalCz { source: Species::BlueCs, displacement: Displacement { dx2: -1, dy2: 2 } }]
        );
    }
}
