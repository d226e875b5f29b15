//! Dense complex-amplitude backend for non-Clifford (noisy) evolution.
//!
//! Basis index bit `q` is the computational value of site `q`; site 0 is the
//! least significant bit.

use std::io::{self, Write};

use num_complex::Complex;
use rand::Rng;

use crate::error::{Error, Result};
use crate::pauli::{Pauli, PauliString, Phase};
use crate::scalar::Scalar;

/// Default qubit cap (about 4M amplitudes).
pub const DEFAULT_QUBIT_CAP: usize = 22;

/// A 2x2 complex matrix, row-major.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Unitary2<T: Scalar> {
    pub m: [[Complex<T>; 2]; 2],
}

impl<T: Scalar> Unitary2<T> {
    pub fn new(m: [[Complex<T>; 2]; 2]) -> Self {
        Unitary2 { m }
    }

    pub fn identity() -> Self {
        let (o, l) = (Complex::new(T::zero(), T::zero()), Complex::new(T::one(), T::zero()));
        Self::new([[l, o], [o, l]])
    }

    pub fn hadamard() -> Self {
        let h = Complex::new(T::FRAC_1_SQRT_2(), T::zero());
        Self::new([[h, h], [h, -h]])
    }

    /// exp(-i theta X / 2)
    pub fn rx(theta: T) -> Self {
        let two = T::one() + T::one();
        let (c, s) = ((theta / two).cos(), (theta / two).sin());
        let z = T::zero();
        Self::new([[Complex::new(c, z), Complex::new(z, -s)], [Complex::new(z, -s), Complex::new(c, z)]])
    }

    /// exp(-i theta Y / 2)
    pub fn ry(theta: T) -> Self {
        let two = T::one() + T::one();
        let (c, s) = ((theta / two).cos(), (theta / two).sin());
        let z = T::zero();
        Self::new([[Complex::new(c, z), Complex::new(-s, z)], [Complex::new(s, z), Complex::new(c, z)]])
    }

    /// exp(-i theta Z / 2)
    pub fn rz(theta: T) -> Self {
        let two = T::one() + T::one();
        let half = theta / two;
        let z = Complex::new(T::zero(), T::zero());
        Self::new([[Complex::from_polar(T::one(), -half), z], [z, Complex::from_polar(T::one(), half)]])
    }

    /// Row-selective pseudo-Hadamard for lattice row `k >= 1`, taken as
    /// `(-i)^k H^(k-1)`: a pure phase on odd rows, `(-i)^k H` on even rows.
    pub fn pseudo_hadamard(k: u32) -> Self {
        assert!(k >= 1, "row index starts at 1");
        let phase = match k % 4 {
            0 => Complex::new(T::one(), T::zero()),
            1 => Complex::new(T::zero(), -T::one()),
            2 => Complex::new(-T::one(), T::zero()),
            _ => Complex::new(T::zero(), T::one()),
        };
        let base = if k.is_multiple_of(2) { Self::hadamard() } else { Self::identity() };
        base.scaled(phase)
    }

    /// The pulse product `Rz(pi/4) Ry(k pi) Rz(pi/4)`. This does not coincide
    /// with [`Unitary2::pseudo_hadamard`] (for k = 1 it is `-iY`); it is kept
    /// so the two can be compared.
    pub fn pseudo_hadamard_pulse(k: u32) -> Self {
        let quarter = T::FRAC_PI_4();
        let kpi = T::of(k as f64) * T::PI();
        Self::rz(quarter).mul(&Self::ry(kpi)).mul(&Self::rz(quarter))
    }

    pub fn scaled(&self, c: Complex<T>) -> Self {
        let mut out = *self;
        for row in out.m.iter_mut() {
            for e in row.iter_mut() {
                *e = *e * c;
            }
        }
        out
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        let mut out = [[Complex::new(T::zero(), T::zero()); 2]; 2];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, e) in row.iter_mut().enumerate() {
                *e = self.m[i][0] * rhs.m[0][j] + self.m[i][1] * rhs.m[1][j];
            }
        }
        Self::new(out)
    }

    pub fn adjoint(&self) -> Self {
        let m = &self.m;
        Self::new([[m[0][0].conj(), m[1][0].conj()], [m[0][1].conj(), m[1][1].conj()]])
    }

    /// Largest entry-wise deviation from `other`.
    pub fn distance(&self, other: &Self) -> T {
        let mut d = T::zero();
        for i in 0..2 {
            for j in 0..2 {
                d = d.max((self.m[i][j] - other.m[i][j]).norm());
            }
        }
        d
    }

    /// `other` up to a global phase.
    pub fn distance_up_to_phase(&self, other: &Self) -> T {
        // align on the largest entry of `other`
        let (mut bi, mut bj, mut best) = (0, 0, T::zero());
        for i in 0..2 {
            for j in 0..2 {
                if other.m[i][j].norm() > best {
                    best = other.m[i][j].norm();
                    (bi, bj) = (i, j);
                }
            }
        }
        if self.m[bi][bj].norm() <= T::zero() {
            return T::infinity();
        }
        let phase = other.m[bi][bj] / self.m[bi][bj];
        let phase = phase / phase.norm();
        self.scaled(phase).distance(other)
    }

    pub fn is_unitary(&self, tol: T) -> bool {
        self.mul(&self.adjoint()).distance(&Self::identity()) <= tol
    }
}

/// Dense pure state on `n` qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector<T: Scalar> {
    n: usize,
    amps: Vec<Complex<T>>,
}

impl<T: Scalar> StateVector<T> {
    fn check_cap(n: usize, cap: usize) -> Result<()> {
        if n > cap || n >= usize::BITS as usize - 1 {
            Err(Error::TooManyQubits { n, cap })
        } else {
            Ok(())
        }
    }

    /// |0...0> with the default cap.
    pub fn zero(n: usize) -> Result<Self> {
        Self::zero_with_cap(n, DEFAULT_QUBIT_CAP)
    }

    pub fn zero_with_cap(n: usize, cap: usize) -> Result<Self> {
        Self::check_cap(n, cap)?;
        let mut amps = vec![Complex::new(T::zero(), T::zero()); 1 << n];
        amps[0] = Complex::new(T::one(), T::zero());
        Ok(StateVector { n, amps })
    }

    /// Product of |+> (where `plus(q)`) and |0> factors.
    pub fn from_product<F: Fn(usize) -> bool>(n: usize, cap: usize, plus: F) -> Result<Self> {
        Self::check_cap(n, cap)?;
        let plus_mask: usize = (0..n).filter(|&q| plus(q)).fold(0, |m, q| m | 1 << q);
        let k = plus_mask.count_ones() as i32;
        let amp = Complex::new(T::of(2f64.powi(-k).sqrt()), T::zero());
        let zero = Complex::new(T::zero(), T::zero());
        let amps = (0..1usize << n).map(|b| if b & !plus_mask == 0 { amp } else { zero }).collect();
        Ok(StateVector { n, amps })
    }

    pub fn from_amplitudes(amps: Vec<Complex<T>>) -> Result<Self> {
        let len = amps.len();
        if !len.is_power_of_two() {
            return Err(Error::InvalidRegion(format!("{len} amplitudes is not a power of two")));
        }
        Ok(StateVector { n: len.trailing_zeros() as usize, amps })
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex<T>] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> T {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
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
            Err(Error::SameSite(a))
        } else {
            Ok(())
        }
    }

    pub fn apply_1q(&mut self, u: &Unitary2<T>, q: usize) -> Result<()> {
        self.check_site(q)?;
        let bit = 1usize << q;
        let [[a, b], [c, d]] = u.m;
        for i in 0..self.amps.len() {
            if i & bit == 0 {
                let (x0, x1) = (self.amps[i], self.amps[i | bit]);
                self.amps[i] = a * x0 + b * x1;
                self.amps[i | bit] = c * x0 + d * x1;
            }
        }
        Ok(())
    }

    pub fn apply_h(&mut self, q: usize) -> Result<()> {
        self.check_site(q)?;
        let bit = 1usize << q;
        let s = T::FRAC_1_SQRT_2();
        for i in 0..self.amps.len() {
            if i & bit == 0 {
                let (x0, x1) = (self.amps[i], self.amps[i | bit]);
                self.amps[i] = (x0 + x1) * s;
                self.amps[i | bit] = (x0 - x1) * s;
            }
        }
        Ok(())
    }

    /// diag(1, 1, 1, -1) on (a, b).
    pub fn apply_cz(&mut self, a: usize, b: usize) -> Result<()> {
        self.check_pair(a, b)?;
        let mask = (1usize << a) | (1usize << b);
        for (i, amp) in self.amps.iter_mut().enumerate() {
            if i & mask == mask {
                *amp = -*amp;
            }
        }
        Ok(())
    }

    /// exp(i theta Z_a Z_b).
    pub fn apply_zz_phase(&mut self, theta: T, a: usize, b: usize) -> Result<()> {
        self.check_pair(a, b)?;
        if !theta.is_finite() {
            return Err(Error::OutOfRange { what: "theta", value: theta.to_f64_lossy() });
        }
        let even = Complex::from_polar(T::one(), theta);
        let odd = even.conj();
        for (i, amp) in self.amps.iter_mut().enumerate() {
            let parity = ((i >> a) ^ (i >> b)) & 1;
            *amp = *amp * if parity == 0 { even } else { odd };
        }
        Ok(())
    }

    /// exp(-i theta Z_q) (full angle, no factor 1/2).
    pub fn apply_z_rotation(&mut self, theta: T, q: usize) -> Result<()> {
        self.check_site(q)?;
        if !theta.is_finite() {
            return Err(Error::OutOfRange { what: "theta", value: theta.to_f64_lossy() });
        }
        let p0 = Complex::from_polar(T::one(), -theta);
        let p1 = p0.conj();
        for (i, amp) in self.amps.iter_mut().enumerate() {
            *amp = *amp * if (i >> q) & 1 == 0 { p0 } else { p1 };
        }
        Ok(())
    }

    /// Multiply each amplitude by `exp(i * phase(b))`, for a caller-supplied
    /// diagonal phase function.
    pub fn apply_diagonal<F: Fn(usize) -> T>(&mut self, phase: F) {
        for (i, amp) in self.amps.iter_mut().enumerate() {
            *amp = *amp * Complex::from_polar(T::one(), phase(i));
        }
    }

    fn masks(&self, p: &PauliString) -> Result<(usize, usize, usize)> {
        if let Some(q) = p.max_site() {
            self.check_site(q)?;
        }
        let (mut xm, mut zm, mut ny) = (0usize, 0usize, 0usize);
        for (q, pq) in p.iter() {
            let (x, z) = pq.bits();
            if x {
                xm |= 1 << q;
            }
            if z {
                zm |= 1 << q;
            }
            if pq == Pauli::Y {
                ny += 1;
            }
        }
        Ok((xm, zm, ny))
    }

    /// `P|psi>` for an arbitrary Pauli string.
    pub fn apply_pauli(&mut self, p: &PauliString) -> Result<()> {
        let (xm, zm, ny) = self.masks(p)?;
        let coeff = phase_factor::<T>(Phase::from_exponent(p.phase().exponent() + ny as u8));
        let src = self.amps.clone();
        for (b, &a) in src.iter().enumerate() {
            let sign = if (b & zm).count_ones() % 2 == 1 { -T::one() } else { T::one() };
            self.amps[b ^ xm] = a * coeff * sign;
        }
        Ok(())
    }

    /// Real expectation value of a Hermitian Pauli string.
    pub fn expectation(&self, p: &PauliString) -> Result<T> {
        p.require_hermitian()?;
        let (xm, zm, ny) = self.masks(p)?;
        let coeff = phase_factor::<T>(Phase::from_exponent(p.phase().exponent() + ny as u8));
        let mut acc = Complex::new(T::zero(), T::zero());
        for (b, &a) in self.amps.iter().enumerate() {
            let term = self.amps[b ^ xm].conj() * a;
            if (b & zm).count_ones() % 2 == 1 {
                acc = acc - term;
            } else {
                acc = acc + term;
            }
        }
        Ok((acc * coeff).re)
    }

    /// Born-rule measurement of a Hermitian Pauli string. With `force_plus`
    /// the +1 branch is post-selected (error if it has zero probability).
    pub fn measure<R: Rng + ?Sized>(&mut self, p: &PauliString, force_plus: bool, rng: &mut R) -> Result<i8> {
        if p.is_identity() {
            return Err(Error::IdentityMeasurement);
        }
        let ev = self.expectation(p)?;
        let two = T::one() + T::one();
        let p_plus = ((T::one() + ev) / two).max(T::zero()).min(T::one());
        let outcome: i8 = if force_plus {
            if p_plus <= T::tolerance() {
                return Err(Error::ZeroProbability);
            }
            1
        } else if T::of(rng.gen::<f64>()) < p_plus {
            1
        } else {
            -1
        };
        let prob = if outcome == 1 { p_plus } else { T::one() - p_plus };
        // |psi> -> (1 + m P)|psi> / (2 sqrt(prob))
        let mut flipped = self.clone();
        flipped.apply_pauli(p)?;
        let m = if outcome == 1 { T::one() } else { -T::one() };
        let scale = T::one() / (two * prob.sqrt());
        for (a, f) in self.amps.iter_mut().zip(&flipped.amps) {
            *a = (*a + *f * m) * scale;
        }
        Ok(outcome)
    }

    pub fn inner(&self, other: &StateVector<T>) -> Result<Complex<T>> {
        if self.n != other.n {
            return Err(Error::SizeMismatch(self.n, other.n));
        }
        Ok(self.amps.iter().zip(&other.amps).fold(Complex::new(T::zero(), T::zero()), |acc, (a, b)| acc + a.conj() * b))
    }

    /// |<reference|self>|^2.
    pub fn fidelity_to(&self, reference: &StateVector<T>) -> Result<T> {
        Ok(reference.inner(self)?.norm_sqr())
    }

    /// Probability of every computational basis state.
    pub fn probabilities(&self) -> Vec<T> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Debug dump: `n` as u64, then (re, im) pairs as little-endian f64.
    pub fn write_dump<W: Write>(&self, mut w: W) -> io::Result<()> {
        w.write_all(&(self.n as u64).to_le_bytes())?;
        for a in &self.amps {
            w.write_all(&a.re.to_f64_lossy().to_le_bytes())?;
            w.write_all(&a.im.to_f64_lossy().to_le_bytes())?;
        }
        Ok(())
    }
}

fn phase_factor<T: Scalar>(p: Phase) -> Complex<T> {
    let (o, z) = (T::one(), T::zero());
    match p {
        Phase::PlusOne => Complex::new(o, z),
        Phase::PlusI => Complex::new(z, o),
        Phase::MinusOne => Complex::new(-o, z),
        Phase::MinusI => Complex::new(z, -o),
    }
}
