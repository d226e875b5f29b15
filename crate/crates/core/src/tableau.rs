//! Stabilizer tableau with destabilizers and sign bits.
//!
//! Storage is qubit-major: for every qubit `q` there is one bit-vector over the
//! `2n` rows (destabilizers `0..n`, stabilizers `n..2n`) for the X part and one
//! for the Z part. Clifford gates then touch `2n / 64` words per qubit, and
//! multiplying one row into a set of rows is a bit-sliced sweep over the
//! qubits with a two-bit phase counter per row.
//!
//! A row `(x, z, s)` denotes `(-1)^s * prod_q P_q` with `P_q` in
//! {I, X, Y, Z} encoded as `(x_q, z_q)`, `Y = (1, 1)` (Hermitian `Y`).

use std::fmt;

use rand::Rng;

use crate::error::{Error, Result};
use crate::pauli::{Pauli, PauliString, Phase};

#[inline]
fn words_for(bits: usize) -> usize {
    bits.div_ceil(64)
}

/// How random measurement outcomes are chosen.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutcomePolicy {
    /// Draw uniformly from the supplied RNG.
    Random,
    /// Post-select outcome +1; fails if +1 has zero probability.
    ForcePlus,
}

/// Result of one Pauli measurement.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MeasurementOutcome {
    pub outcome: i8,
    pub deterministic: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tableau {
    n: usize,
    /// Words per qubit column (covers 2n rows).
    rw: usize,
    xs: Vec<u64>,
    zs: Vec<u64>,
    signs: Vec<u64>,
}

impl Tableau {
    /// |0...0>.
    pub fn new(n: usize) -> Self {
        Self::from_product(n, |_| false)
    }

    /// Product state: qubit `q` is |+> if `plus(q)`, else |0>.
    pub fn from_product<F: Fn(usize) -> bool>(n: usize, plus: F) -> Self {
        let rw = words_for(2 * n).max(1);
        let mut t = Tableau { n, rw, xs: vec![0; n * rw], zs: vec![0; n * rw], signs: vec![0; rw] };
        for q in 0..n {
            let (destab, stab) = (q, n + q);
            if plus(q) {
                t.set_bit_z(q, destab);
                t.set_bit_x(q, stab);
            } else {
                t.set_bit_x(q, destab);
                t.set_bit_z(q, stab);
            }
        }
        t
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    #[inline]
    fn set_bit_x(&mut self, q: usize, row: usize) {
        self.xs[q * self.rw + row / 64] |= 1 << (row % 64);
    }

    #[inline]
    fn set_bit_z(&mut self, q: usize, row: usize) {
        self.zs[q * self.rw + row / 64] |= 1 << (row % 64);
    }

    #[inline]
    fn x_bit(&self, q: usize, row: usize) -> bool {
        self.xs[q * self.rw + row / 64] >> (row % 64) & 1 == 1
    }

    #[inline]
    fn z_bit(&self, q: usize, row: usize) -> bool {
        self.zs[q * self.rw + row / 64] >> (row % 64) & 1 == 1
    }

    #[inline]
    fn sign_bit(&self, row: usize) -> bool {
        self.signs[row / 64] >> (row % 64) & 1 == 1
    }

    fn check_site(&self, q: usize) -> Result<()> {
        if q < self.n {
            Ok(())
        } else {
            Err(Error::SiteOutOfRange { site: q, n: self.n })
        }
    }

    fn check_pair(&self, a: usize, b: usize) -> Result<()> {
        self.check_site(a)?;
        self.check_site(b)?;
        if a == b {
            return Err(Error::SameSite(a));
        }
        Ok(())
    }

    pub fn apply_h(&mut self, q: usize) -> Result<()> {
        self.check_site(q)?;
        let (xo, zo) = (q * self.rw, q * self.rw);
        for w in 0..self.rw {
            let x = self.xs[xo + w];
            let z = self.zs[zo + w];
            self.signs[w] ^= x & z;
            self.xs[xo + w] = z;
            self.zs[zo + w] = x;
        }
        Ok(())
    }

    /// Phase gate diag(1, i).
    pub fn apply_s(&mut self, q: usize) -> Result<()> {
        self.check_site(q)?;
        let o = q * self.rw;
        for w in 0..self.rw {
            let x = self.xs[o + w];
            self.signs[w] ^= x & self.zs[o + w];
            self.zs[o + w] ^= x;
        }
        Ok(())
    }

    pub fn apply_cz(&mut self, a: usize, b: usize) -> Result<()> {
        self.check_pair(a, b)?;
        let (oa, ob) = (a * self.rw, b * self.rw);
        for w in 0..self.rw {
            let (xa, za) = (self.xs[oa + w], self.zs[oa + w]);
            let (xb, zb) = (self.xs[ob + w], self.zs[ob + w]);
            self.signs[w] ^= xa & xb & (za ^ zb);
            self.zs[oa + w] = za ^ xb;
            self.zs[ob + w] = zb ^ xa;
        }
        Ok(())
    }

    pub fn apply_cx(&mut self, control: usize, target: usize) -> Result<()> {
        self.check_pair(control, target)?;
        let (oc, ot) = (control * self.rw, target * self.rw);
        for w in 0..self.rw {
            let (xc, zc) = (self.xs[oc + w], self.zs[oc + w]);
            let (xt, zt) = (self.xs[ot + w], self.zs[ot + w]);
            self.signs[w] ^= xc & zt & !(xt ^ zc);
            self.xs[ot + w] = xt ^ xc;
            self.zs[oc + w] = zc ^ zt;
        }
        Ok(())
    }

    /// Conjugate by a Pauli operator (flips the signs of anticommuting rows).
    pub fn apply_pauli(&mut self, p: &PauliString) -> Result<()> {
        if let Some(q) = p.max_site() {
            self.check_site(q)?;
        }
        for (q, pq) in p.iter() {
            let o = q * self.rw;
            for w in 0..self.rw {
                let flip = match pq {
                    Pauli::X => self.zs[o + w],
                    Pauli::Z => self.xs[o + w],
                    Pauli::Y => self.xs[o + w] ^ self.zs[o + w],
                    Pauli::I => 0,
                };
                self.signs[w] ^= flip;
            }
        }
        Ok(())
    }

    fn packed(&self, p: &PauliString) -> Result<PackedPauli> {
        if let Some(q) = p.max_site() {
            self.check_site(q)?;
        }
        p.require_hermitian()?;
        Ok(PackedPauli::from_string(self.n, p))
    }

    /// Bitmask over rows that anticommute with `p`.
    fn anticommuting_rows(&self, p: &PackedPauli) -> Vec<u64> {
        let mut mask = vec![0u64; self.rw];
        for q in p.support() {
            let (px, pz) = (p.x_bit(q), p.z_bit(q));
            let o = q * self.rw;
            for (w, m) in mask.iter_mut().enumerate() {
                if px {
                    *m ^= self.zs[o + w];
                }
                if pz {
                    *m ^= self.xs[o + w];
                }
            }
        }
        mask
    }

    /// Multiply row `src` (on the left) into every row selected by `mask`.
    /// `src` itself must not be selected.
    fn multiply_row_into(&mut self, src: usize, mask: &[u64]) {
        debug_assert_eq!(mask[src / 64] >> (src % 64) & 1, 0);
        let mut c0 = vec![0u64; self.rw];
        let mut c1 = vec![0u64; self.rw];
        for q in 0..self.n {
            let (sx, sz) = (self.x_bit(q, src), self.z_bit(q, src));
            if !sx && !sz {
                continue;
            }
            let o = q * self.rw;
            for w in 0..self.rw {
                let m = mask[w];
                if m == 0 {
                    continue;
                }
                let (tx, tz) = (self.xs[o + w], self.zs[o + w]);
                // Exponent of i picked up by P_src * P_target on this qubit.
                let (plus, minus) = match (sx, sz) {
                    (true, true) => (tz & !tx, tx & !tz),
                    (true, false) => (tx & tz, tz & !tx),
                    (false, true) => (tx & !tz, tx & tz),
                    (false, false) => (0, 0),
                };
                let plus = plus & m;
                let minus = minus & m;
                c1[w] ^= c0[w] & plus;
                c0[w] ^= plus;
                c1[w] ^= !c0[w] & minus;
                c0[w] ^= minus;
                if sx {
                    self.xs[o + w] = tx ^ m;
                }
                if sz {
                    self.zs[o + w] = tz ^ m;
                }
            }
        }
        let src_sign = if self.sign_bit(src) { u64::MAX } else { 0 };
        for w in 0..self.rw {
            self.signs[w] ^= (c1[w] ^ src_sign) & mask[w];
        }
    }

    fn row(&self, row: usize) -> PackedPauli {
        let mut p = PackedPauli::identity(self.n);
        for q in 0..self.n {
            if self.x_bit(q, row) {
                p.x[q / 64] |= 1 << (q % 64);
            }
            if self.z_bit(q, row) {
                p.z[q / 64] |= 1 << (q % 64);
            }
        }
        p.sign = self.sign_bit(row);
        p
    }

    fn write_row(&mut self, row: usize, p: &PackedPauli) {
        let (w, b) = (row / 64, 1u64 << (row % 64));
        for q in 0..self.n {
            let o = q * self.rw + w;
            if p.x_bit(q) {
                self.xs[o] |= b;
            } else {
                self.xs[o] &= !b;
            }
            if p.z_bit(q) {
                self.zs[o] |= b;
            } else {
                self.zs[o] &= !b;
            }
        }
        if p.sign {
            self.signs[w] |= b;
        } else {
            self.signs[w] &= !b;
        }
    }

    /// Product of the stabilizers whose destabilizer partners anticommute
    /// with `p`. Equals `±p` whenever `p` commutes with every stabilizer.
    fn decompose(&self, p: &PackedPauli, anti: &[u64]) -> PackedPauli {
        let mut acc = PackedPauli::identity(self.n);
        for i in 0..self.n {
            if anti[i / 64] >> (i % 64) & 1 == 1 {
                acc.left_mul(&self.row(self.n + i));
            }
        }
        debug_assert_eq!(acc.x, p.x);
        debug_assert_eq!(acc.z, p.z);
        acc
    }

    fn first_stabilizer_in(&self, anti: &[u64]) -> Option<usize> {
        (self.n..2 * self.n).find(|&r| anti[r / 64] >> (r % 64) & 1 == 1)
    }

    /// Exact expectation value: +1 or -1 if `±p` is in the stabilizer group,
    /// 0 otherwise.
    pub fn expectation(&self, p: &PauliString) -> Result<i8> {
        let packed = self.packed(p)?;
        if packed.is_identity() {
            return Ok(if packed.sign { -1 } else { 1 });
        }
        let anti = self.anticommuting_rows(&packed);
        if self.first_stabilizer_in(&anti).is_some() {
            return Ok(0);
        }
        let acc = self.decompose(&packed, &anti);
        Ok(if acc.sign == packed.sign { 1 } else { -1 })
    }

    /// Measure a Hermitian Pauli operator, collapsing the state.
    pub fn measure<R: Rng + ?Sized>(
        &mut self,
        p: &PauliString,
        policy: OutcomePolicy,
        rng: &mut R,
    ) -> Result<MeasurementOutcome> {
        let packed = self.packed(p)?;
        if packed.is_identity() {
            return Err(Error::IdentityMeasurement);
        }
        let anti = self.anticommuting_rows(&packed);
        let Some(pivot) = self.first_stabilizer_in(&anti) else {
            let acc = self.decompose(&packed, &anti);
            let outcome = if acc.sign == packed.sign { 1 } else { -1 };
            if policy == OutcomePolicy::ForcePlus && outcome != 1 {
                return Err(Error::ZeroProbability);
            }
            return Ok(MeasurementOutcome { outcome, deterministic: true });
        };
        let outcome: i8 = match policy {
            OutcomePolicy::ForcePlus => 1,
            OutcomePolicy::Random => {
                if rng.gen::<bool>() {
                    1
                } else {
                    -1
                }
            }
        };
        let mut others = anti;
        others[pivot / 64] &= !(1u64 << (pivot % 64));
        self.multiply_row_into(pivot, &others);
        let old = self.row(pivot);
        self.write_row(pivot - self.n, &old);
        let mut new = packed;
        if outcome == -1 {
            new.sign = !new.sign;
        }
        self.write_row(pivot, &new);
        Ok(MeasurementOutcome { outcome, deterministic: false })
    }

    pub fn stabilizers(&self) -> Vec<PauliString> {
        (self.n..2 * self.n).map(|r| self.row(r).to_string_form()).collect()
    }

    pub fn destabilizers(&self) -> Vec<PauliString> {
        (0..self.n).map(|r| self.row(r).to_string_form()).collect()
    }

    /// Checks the symplectic-basis invariant in O(n^2 * n / 64).
    pub fn is_valid(&self) -> bool {
        let rows: Vec<PackedPauli> = (0..2 * self.n).map(|r| self.row(r)).collect();
        for i in 0..self.n {
            for j in 0..self.n {
                let stab_stab = rows[self.n + i].anticommutes(&rows[self.n + j]);
                let destab_stab = rows[i].anticommutes(&rows[self.n + j]);
                let destab_destab = rows[i].anticommutes(&rows[j]);
                if stab_stab || destab_destab || destab_stab != (i == j) {
                    return false;
                }
            }
        }
        true
    }

    /// Unique reduced basis of the stabilizer group.
    pub fn canonical_form(&self) -> CanonicalForm {
        CanonicalForm::from_generators(self.n, (self.n..2 * self.n).map(|r| self.row(r)).collect())
    }

    pub fn groups_equal(&self, other: &Tableau) -> Result<bool> {
        if self.n != other.n {
            return Err(Error::SizeMismatch(self.n, other.n));
        }
        Ok(self.canonical_form() == other.canonical_form())
    }
}

/// Dense, row-major Pauli row used for products and canonical forms.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub(crate) struct PackedPauli {
    n: usize,
    x: Vec<u64>,
    z: Vec<u64>,
    sign: bool,
}

impl PackedPauli {
    fn identity(n: usize) -> Self {
        let w = words_for(n);
        PackedPauli { n, x: vec![0; w], z: vec![0; w], sign: false }
    }

    fn from_string(n: usize, p: &PauliString) -> Self {
        let mut out = Self::identity(n);
        for (q, pq) in p.iter() {
            let (x, z) = pq.bits();
            if x {
                out.x[q / 64] |= 1 << (q % 64);
            }
            if z {
                out.z[q / 64] |= 1 << (q % 64);
            }
        }
        out.sign = p.phase() == Phase::MinusOne;
        out
    }

    fn to_string_form(&self) -> PauliString {
        let mut s = PauliString::identity();
        for q in 0..self.n {
            s.set(q, Pauli::from_bits(self.x_bit(q), self.z_bit(q)));
        }
        if self.sign {
            s = s.negated();
        }
        s
    }

    #[inline]
    fn x_bit(&self, q: usize) -> bool {
        self.x[q / 64] >> (q % 64) & 1 == 1
    }

    #[inline]
    fn z_bit(&self, q: usize) -> bool {
        self.z[q / 64] >> (q % 64) & 1 == 1
    }

    fn support(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.n).filter(|&q| self.x_bit(q) || self.z_bit(q))
    }

    fn is_identity(&self) -> bool {
        self.x.iter().chain(&self.z).all(|&w| w == 0)
    }

    fn anticommutes(&self, other: &PackedPauli) -> bool {
        let mut parity = 0u32;
        for w in 0..self.x.len() {
            parity ^= ((self.x[w] & other.z[w]) ^ (self.z[w] & other.x[w])).count_ones();
        }
        parity & 1 == 1
    }

    /// `self := lhs * self`, keeping only the real part of the phase.
    fn left_mul(&mut self, lhs: &PackedPauli) {
        let mut plus = 0u32;
        let mut minus = 0u32;
        for w in 0..self.x.len() {
            let (x1, z1, x2, z2) = (lhs.x[w], lhs.z[w], self.x[w], self.z[w]);
            let y1 = x1 & z1;
            let xo1 = x1 & !z1;
            let zo1 = z1 & !x1;
            plus += ((y1 & z2 & !x2) | (xo1 & x2 & z2) | (zo1 & x2 & !z2)).count_ones();
            minus += ((y1 & x2 & !z2) | (xo1 & z2 & !x2) | (zo1 & x2 & z2)).count_ones();
            self.x[w] = x1 ^ x2;
            self.z[w] = z1 ^ z2;
        }
        let total = 2 * (lhs.sign as u32) + 2 * (self.sign as u32) + plus + 3 * minus;
        self.sign = total % 4 >= 2;
    }

    fn leading_column(&self) -> Option<usize> {
        (0..self.n).find(|&q| self.x_bit(q)).or_else(|| (0..self.n).find(|&q| self.z_bit(q)).map(|q| self.n + q))
    }
}

/// Reduced row-echelon basis of a stabilizer group over the column order
/// `x_0 .. x_{n-1}, z_0 .. z_{n-1}`, with signs. Two groups are equal iff
/// their canonical forms are equal.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CanonicalForm {
    n: usize,
    rows: Vec<PackedPauli>,
}

impl CanonicalForm {
    fn from_generators(n: usize, mut rows: Vec<PackedPauli>) -> Self {
        let mut rank = 0;
        for col in 0..2 * n {
            let (xpart, q) = if col < n { (true, col) } else { (false, col - n) };
            let bit = |r: &PackedPauli| if xpart { r.x_bit(q) } else { r.z_bit(q) };
            let Some(pivot) = (rank..rows.len()).find(|&r| bit(&rows[r])) else {
                continue;
            };
            rows.swap(rank, pivot);
            let p = rows[rank].clone();
            for (r, row) in rows.iter_mut().enumerate() {
                if r != rank && bit(row) {
                    row.left_mul(&p);
                }
            }
            rank += 1;
            if rank == rows.len() {
                break;
            }
        }
        rows.truncate(rank);
        CanonicalForm { n, rows }
    }

    /// Canonical form of the group generated by arbitrary (commuting,
    /// Hermitian) Pauli strings on `n` qubits.
    pub fn from_paulis(n: usize, gens: &[PauliString]) -> Result<Self> {
        let mut rows = Vec::with_capacity(gens.len());
        for g in gens {
            if let Some(q) = g.max_site() {
                if q >= n {
                    return Err(Error::SiteOutOfRange { site: q, n });
                }
            }
            g.require_hermitian()?;
            rows.push(PackedPauli::from_string(n, g));
        }
        Ok(Self::from_generators(n, rows))
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn generators(&self) -> Vec<PauliString> {
        self.rows.iter().map(PackedPauli::to_string_form).collect()
    }

    /// Restrict to qubits `keep` (in the given order), dropping generators
    /// that act on any other qubit. Used to compare post-measurement states
    /// on a retained subset: generators supported on measured qubits vanish.
    pub fn restricted(&self, keep: &[usize]) -> CanonicalForm {
        let inside: std::collections::HashSet<usize> = keep.iter().copied().collect();
        let mut gens = Vec::new();
        // Re-reduce with the discarded qubits ordered first so that every
        // generator touching them is eliminated from the rest.
        let mut order: Vec<usize> = (0..self.n).filter(|q| !inside.contains(q)).collect();
        let cut = order.len();
        order.extend_from_slice(keep);
        let permuted: Vec<PackedPauli> = self
            .rows
            .iter()
            .map(|r| {
                let mut p = PackedPauli::identity(self.n);
                for (new_q, &old_q) in order.iter().enumerate() {
                    if r.x_bit(old_q) {
                        p.x[new_q / 64] |= 1 << (new_q % 64);
                    }
                    if r.z_bit(old_q) {
                        p.z[new_q / 64] |= 1 << (new_q % 64);
                    }
                }
                p.sign = r.sign;
                p
            })
            .collect();
        let reduced = CanonicalForm::from_generators_blockwise(permuted, cut);
        for r in reduced {
            let mut p = PauliString::identity();
            for (i, _) in keep.iter().enumerate() {
                let q = cut + i;
                p.set(i, Pauli::from_bits(r.x_bit(q), r.z_bit(q)));
            }
            if r.sign {
                p = p.negated();
            }
            gens.push(p);
        }
        CanonicalForm::from_paulis(keep.len(), &gens).expect("restricted generators are valid")
    }

    /// Eliminate the first `cut` qubits (both X and Z columns) first, then
    /// return the rows that are identity on them.
    fn from_generators_blockwise(mut rows: Vec<PackedPauli>, cut: usize) -> Vec<PackedPauli> {
        let mut rank = 0;
        let cols = (0..cut).map(|q| (true, q)).chain((0..cut).map(|q| (false, q)));
        for (xpart, q) in cols {
            let bit = |r: &PackedPauli| if xpart { r.x_bit(q) } else { r.z_bit(q) };
            let Some(pivot) = (rank..rows.len()).find(|&r| bit(&rows[r])) else {
                continue;
            };
            rows.swap(rank, pivot);
            let p = rows[rank].clone();
            for (r, row) in rows.iter_mut().enumerate() {
                if r != rank && bit(row) {
                    row.left_mul(&p);
                }
            }
            rank += 1;
        }
        rows.split_off(rank)
    }

    /// One line per generator: sign followed by the dense Pauli word.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for r in &self.rows {
            out.push(if r.sign { '-' } else { '+' });
            for q in 0..self.n {
                out.push(match (r.x_bit(q), r.z_bit(q)) {
                    (false, false) => 'I',
                    (true, false) => 'X',
                    (true, true) => 'Y',
                    (false, true) => 'Z',
                });
            }
            out.push('\n');
        }
        out
    }

    /// Pivot column of every row (diagnostics).
    pub fn pivots(&self) -> Vec<usize> {
        self.rows.iter().filter_map(PackedPauli::leading_column).collect()
    }
}

impl fmt::Display for CanonicalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.dump())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ps(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    #[test]
    fn init_patterns() {
        let t = Tableau::from_product(2, |_| true);
        assert_eq!(t.stabilizers(), vec![ps("XI"), ps("IX")]);
        let t = Tableau::from_product(3, |q| q != 1);
        assert_eq!(t.stabilizers()[1], ps("IZI"));
        let empty = Tableau::new(0);
        assert_eq!(empty.stabilizers().len(), 0);
        assert!(empty.canonical_form().dump().is_empty());
    }

    #[test]
    fn hadamard_maps_z_to_x() {
        let mut t = Tableau::new(1);
        t.apply_h(0).unwrap();
        assert_eq!(t.stabilizers(), vec![ps("X")]);
    }

    #[test]
    fn cz_on_plus_plus_gives_edge_stabilizers() {
        let mut t = Tableau::from_product(2, |_| true);
        t.apply_cz(0, 1).unwrap();
        assert_eq!(t.stabilizers(), vec![ps("XZ"), ps("ZX")]);
        let before = Tableau::from_product(2, |_| true);
        t.apply_cz(0, 1).unwrap();
        assert!(t.groups_equal(&before).unwrap());
        assert!(matches!(t.apply_cz(1, 1), Err(Error::SameSite(1))));
        assert!(matches!(t.apply_cz(0, 2), Err(Error::SiteOutOfRange { .. })));
    }

    #[test]
    fn expectation_values() {
        let t = Tableau::new(1);
        assert_eq!(t.expectation(&ps("Z")).unwrap(), 1);
        assert_eq!(t.expectation(&ps("-Z")).unwrap(), -1);
        assert_eq!(t.expectation(&ps("X")).unwrap(), 0);
        assert!(t.expectation(&ps("+iZ")).is_err());

        let mut g = Tableau::from_product(3, |_| true);
        g.apply_cz(0, 1).unwrap();
        g.apply_cz(1, 2).unwrap();
        // S_0 S_1 S_2 = (XZI)(ZXZ)(IZX)
        let prod = ps("XZI") * ps("ZXZ") * ps("IZX");
        assert_eq!(g.expectation(&prod).unwrap(), 1);
        assert_eq!(g.expectation(&ps("IZI")).unwrap(), 0);
    }

    #[test]
    fn deterministic_and_random_measurements() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut t = Tableau::from_product(1, |_| true);
        let m = t.measure(&ps("X"), OutcomePolicy::Random, &mut rng).unwrap();
        assert_eq!(m, MeasurementOutcome { outcome: 1, deterministic: true });

        let mut sum = 0i64;
        let shots = 10_000;
        for _ in 0..shots {
            let mut t = Tableau::from_product(1, |_| true);
            let m = t.measure(&ps("Z"), OutcomePolicy::Random, &mut rng).unwrap();
            assert!(!m.deterministic);
            // collapsed: repeating gives the same answer
            let again = t.measure(&ps("Z"), OutcomePolicy::Random, &mut rng).unwrap();
            assert_eq!(again.outcome, m.outcome);
            sum += m.outcome as i64;
        }
        let mean = sum as f64 / shots as f64;
        assert!(mean.abs() < 3.0 / (shots as f64).sqrt(), "mean {mean}");
    }

    #[test]
    fn forced_outcome_on_impossible_branch_errors() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut t = Tableau::new(1);
        assert_eq!(t.measure(&ps("-Z"), OutcomePolicy::ForcePlus, &mut rng), Err(Error::ZeroProbability));
        assert_eq!(t.measure(&ps("I"), OutcomePolicy::Random, &mut rng), Err(Error::IdentityMeasurement));
    }

    #[test]
    fn measuring_a_stabilizer_leaves_the_group_unchanged() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut g = Tableau::from_product(4, |_| true);
        for (a, b) in [(0, 1), (1, 2), (2, 3), (3, 0)] {
            g.apply_cz(a, b).unwrap();
        }
        let before = g.canonical_form();
        let s1 = ps("ZXZI");
        let m = g.measure(&s1, OutcomePolicy::Random, &mut rng).unwrap();
        assert_eq!(m, MeasurementOutcome { outcome: 1, deterministic: true });
        assert_eq!(g.canonical_form(), before);
        assert!(g.is_valid());
    }

    #[test]
    fn tableau_stays_symplectic_after_random_clifford_measurements() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 9;
        let mut t = Tableau::from_product(n, |q| q % 2 == 0);
        for step in 0..200 {
            let a = rng.gen_range(0..n);
            let b = (a + 1 + rng.gen_range(0..n - 1)) % n;
            match step % 5 {
                0 => t.apply_h(a).unwrap(),
                1 => t.apply_s(a).unwrap(),
                2 => t.apply_cz(a, b).unwrap(),
                3 => t.apply_cx(a, b).unwrap(),
                _ => {
                    let p = PauliString::from_factors([(a, Pauli::X), (b, Pauli::Y)]);
                    t.measure(&p, OutcomePolicy::Random, &mut rng).unwrap();
                }
            }
            assert!(t.is_valid(), "step {step}");
        }
    }

    #[test]
    fn canonical_form_is_basis_independent() {
        let a = CanonicalForm::from_paulis(3, &[ps("XZI"), ps("ZXZ"), ps("IZX")]).unwrap();
        let b = CanonicalForm::from_paulis(3, &[ps("XZI") * ps("ZXZ"), ps("ZXZ"), ps("IZX") * ps("XZI")]).unwrap();
        assert_eq!(a, b);
        let plus = Tableau::from_product(1, |_| true);
        let zero = Tableau::new(1);
        assert!(!plus.groups_equal(&zero).unwrap());
        assert!(plus.groups_equal(&plus).unwrap());
        assert!(plus.groups_equal(&Tableau::new(2)).is_err());
        assert_eq!(a.dump().lines().count(), 3);
    }

    #[test]
    fn restriction_keeps_generators_off_discarded_qubits() {
        // |+> on qubit 0, Bell pair on 1-2
        let mut t = Tableau::from_product(3, |_| true);
        t.apply_cz(1, 2).unwrap();
        let r = t.canonical_form().restricted(&[1, 2]);
        let expect = CanonicalForm::from_paulis(2, &[ps("XZ"), ps("ZX")]).unwrap();
        assert_eq!(r, expect);
    }
}
