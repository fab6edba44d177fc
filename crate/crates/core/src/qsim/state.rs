use std::collections::HashMap;
use std::hash::{BuildHasherDefault, DefaultHasher};
use std::fmt::Write as _;

use num_complex::Complex64;

use super::density::DensityMatrix;
use super::gate::{Gate, GateKind};
use super::layout::RegisterLayout;
use super::oracle::BasisPermutation;
use crate::error::{Error, Result};

pub const NORM_TOL: f64 = 1e-10;
/// Amplitudes with smaller magnitude are dropped after each operation.
pub const PRUNE: f64 = 1e-16;
/// Threshold below which a branch is treated as having zero probability.
pub const MIN_PROBABILITY: f64 = 1e-15;
/// Largest register a dense vector or density matrix is built for.
pub const MAX_DENSE_QUBITS: usize = 24;
/// Largest number of stored amplitudes a gate may produce.
pub const MAX_SUPPORT: usize = 1 << 21;

const DUMP_CUTOFF: f64 = 1e-12;

/// Fixed-key hashing keeps iteration order, and so floating-point summation
/// order, identical from run to run.
type Map<K, V> = HashMap<K, V, BuildHasherDefault<DefaultHasher>>;

/// Pure state stored as its non-zero amplitudes.
///
/// Only the populated part of the `2^q` basis is kept, which lets circuits
/// with many wide but mostly classical registers run at the cost of the
/// number of basis states actually in superposition.
#[derive(Clone, Debug)]
pub struct StateVector {
    layout: RegisterLayout,
    amps: Map<u128, Complex64>,
}

impl StateVector {
    /// `|0…0⟩`.
    pub fn zero(layout: RegisterLayout) -> Self {
        Self::basis(layout, 0).expect("index 0 exists")
    }

    pub fn basis(layout: RegisterLayout, index: u128) -> Result<Self> {
        let q = layout.num_qubits();
        if q < 128 && index >> q != 0 {
            return Err(Error::InvalidState(format!("basis index {index} outside {q} qubits")));
        }
        let mut amps = Map::default();
        amps.insert(index, Complex64::new(1.0, 0.0));
        Ok(Self { layout, amps })
    }

    /// Dense amplitudes, index 0 first. The norm must be 1 within 1e-10.
    pub fn from_amplitudes(layout: RegisterLayout, amplitudes: &[Complex64]) -> Result<Self> {
        let q = layout.num_qubits();
        if q > MAX_DENSE_QUBITS || amplitudes.len() != 1usize << q {
            return Err(Error::InvalidState(format!(
                "expected 2^{q} amplitudes, got {}",
                amplitudes.len()
            )));
        }
        if amplitudes.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::InvalidState("non-finite amplitude".into()));
        }
        let amps: Map<u128, Complex64> = amplitudes
            .iter()
            .enumerate()
            .filter(|(_, a)| a.norm() > 0.0)
            .map(|(i, a)| (i as u128, *a))
            .collect();
        let s = Self { layout, amps };
        s.check_norm()?;
        Ok(s)
    }

    pub fn from_real(layout: RegisterLayout, amplitudes: &[f64]) -> Result<Self> {
        let c: Vec<Complex64> = amplitudes.iter().map(|&a| Complex64::new(a, 0.0)).collect();
        Self::from_amplitudes(layout, &c)
    }

    /// Sparse construction from `(index, amplitude)` pairs.
    pub fn from_entries(layout: RegisterLayout, entries: impl IntoIterator<Item = (u128, Complex64)>) -> Result<Self> {
        let mut amps = Map::default();
        for (i, a) in entries {
            if a.norm() > PRUNE {
                *amps.entry(i).or_insert(Complex64::new(0.0, 0.0)) += a;
            }
        }
        let s = Self { layout, amps };
        s.check_norm()?;
        Ok(s)
    }

    pub fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    pub fn num_qubits(&self) -> usize {
        self.layout.num_qubits()
    }

    pub fn support_size(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitude(&self, index: u128) -> Complex64 {
        self.amps.get(&index).copied().unwrap_or_default()
    }

    pub fn norm_sq(&self) -> f64 {
        self.amps.values().map(|a| a.norm_sqr()).sum()
    }

    fn check_norm(&self) -> Result<()> {
        let n = self.norm_sq();
        if (n - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidState(format!("squared norm {n} differs from 1")));
        }
        Ok(())
    }

    /// Non-zero entries sorted by basis index.
    pub fn entries(&self) -> Vec<(u128, Complex64)> {
        let mut v: Vec<_> = self.amps.iter().map(|(&i, &a)| (i, a)).collect();
        v.sort_unstable_by_key(|e| e.0);
        v
    }

    pub fn to_dense(&self) -> Result<Vec<Complex64>> {
        let q = self.num_qubits();
        if q > MAX_DENSE_QUBITS {
            return Err(Error::ResourceRefusal {
                required: q,
                budget: MAX_DENSE_QUBITS,
            });
        }
        let mut v = vec![Complex64::new(0.0, 0.0); 1usize << q];
        for (&i, &a) in &self.amps {
            v[i as usize] = a;
        }
        Ok(v)
    }

    pub fn apply(&mut self, gate: &Gate) -> Result<()> {
        self.layout.check_qubits(&gate.targets)?;
        self.layout.check_qubits(&gate.controls)?;
        let cmask = self.layout.mask(&gate.controls);
        if let GateKind::Evolution(e) = &gate.kind {
            let tau_q = gate.controls.clone();
            let layout = self.layout.clone();
            let mut cache: Map<u64, Vec<Complex64>> = Map::default();
            return self.apply_grouped(&gate.targets, |_| true, |key| {
                let tau = layout.read(key, &tau_q);
                cache.entry(tau).or_insert_with(|| e.power(tau)).clone()
            });
        }
        if let Some([d0, d1]) = gate.kind.diagonal() {
            let bit = self.layout.bit(gate.targets[0]);
            for (i, a) in self.amps.iter_mut() {
                if i & cmask == cmask {
                    *a *= if (i >> bit) & 1 == 1 { d1 } else { d0 };
                }
            }
            return Ok(());
        }
        let m = gate.kind.matrix().expect("non-evolution gates have a matrix");
        self.apply_grouped(&gate.targets, |key| key & cmask == cmask, |_| m.clone())
    }

    /// Applies `matrix(key)` to each group of amplitudes that agree outside
    /// `targets`, skipping groups where `active(key)` is false.
    fn apply_grouped(
        &mut self,
        targets: &[usize],
        active: impl Fn(u128) -> bool,
        mut matrix: impl FnMut(u128) -> Vec<Complex64>,
    ) -> Result<()> {
        let layout = &self.layout;
        let tmask = layout.mask(targets);
        let d = 1usize << targets.len();
        let mut groups: Map<u128, Vec<Complex64>> = Map::default();
        let mut out: Map<u128, Complex64> = Map::with_capacity_and_hasher(self.amps.len(), Default::default());
        for (&i, &a) in &self.amps {
            let key = i & !tmask;
            if !active(key) {
                out.insert(i, a);
                continue;
            }
            let sub = layout.read(i, targets) as usize;
            groups.entry(key).or_insert_with(|| vec![Complex64::new(0.0, 0.0); d])[sub] = a;
        }
        let bound = out.len() + groups.len() * d;
        if bound > MAX_SUPPORT {
            return Err(Error::StateTooLarge {
                entries: bound,
                limit: MAX_SUPPORT,
            });
        }
        for (key, v) in groups {
            let m = matrix(key);
            for r in 0..d {
                let x: Complex64 = (0..d).map(|c| m[r * d + c] * v[c]).sum();
                if x.norm() > PRUNE {
                    out.insert(layout.write(key, targets, r as u64), x);
                }
            }
        }
        self.amps = out;
        Ok(())
    }

    pub fn apply_all(&mut self, gates: &[Gate]) -> Result<()> {
        gates.iter().try_for_each(|g| self.apply(g))
    }

    /// Moves the amplitude of every basis state `x` to `f(x)`.
    pub fn apply_permutation(&mut self, perm: &BasisPermutation) -> Result<()> {
        for s in perm.spans() {
            self.layout.check_qubits(s)?;
        }
        let mut out = Map::with_capacity_and_hasher(self.amps.len(), Default::default());
        for (&i, &a) in &self.amps {
            let vals: Vec<u64> = perm.spans().iter().map(|s| self.layout.read(i, s)).collect();
            let mapped = perm.apply_values(&vals);
            let j = perm
                .spans()
                .iter()
                .zip(&mapped)
                .fold(i, |idx, (s, &v)| self.layout.write(idx, s, v));
            if out.insert(j, a).is_some() {
                return Err(Error::InvalidOracle(format!(
                    "{}: two basis states map to {j}",
                    perm.name()
                )));
            }
        }
        self.amps = out;
        Ok(())
    }

    /// Probability of reading `outcome` on `qubit`.
    pub fn probability(&self, qubit: usize, outcome: u8) -> Result<f64> {
        self.layout.check_qubits(&[qubit])?;
        let bit = self.layout.bit(qubit);
        Ok(self
            .amps
            .iter()
            .filter(|(i, _)| ((**i >> bit) & 1) as u8 == outcome)
            .map(|(_, a)| a.norm_sqr())
            .sum())
    }

    /// Projects `qubit` onto `outcome` and renormalizes; returns the Born
    /// probability of that outcome.
    pub fn postselect(&self, qubit: usize, outcome: u8) -> Result<(StateVector, f64)> {
        let p = self.probability(qubit, outcome)?;
        if p <= MIN_PROBABILITY {
            return Err(Error::ImpossibleOutcome {
                qubit,
                outcome,
                probability: p,
            });
        }
        let bit = self.layout.bit(qubit);
        let scale = 1.0 / p.sqrt();
        let amps = self
            .amps
            .iter()
            .filter(|(i, _)| ((**i >> bit) & 1) as u8 == outcome)
            .map(|(&i, &a)| (i, a * scale))
            .collect();
        Ok((
            StateVector {
                layout: self.layout.clone(),
                amps,
            },
            p,
        ))
    }

    /// Squared norm of the components where any of `registers` is not |0⟩.
    pub fn leakage(&self, registers: &[&str]) -> Result<f64> {
        let mut mask = 0u128;
        for r in registers {
            mask |= self.layout.mask(&self.layout.qubits(r)?);
        }
        Ok(self
            .amps
            .iter()
            .filter(|(i, _)| **i & mask != 0)
            .map(|(_, a)| a.norm_sqr())
            .sum())
    }

    /// Reduced density matrix of the register `keep`.
    pub fn partial_trace(&self, keep: &str) -> Result<DensityMatrix> {
        let q = self.layout.qubits(keep)?;
        if q.len() > MAX_DENSE_QUBITS / 2 {
            return Err(Error::ResourceRefusal {
                required: q.len(),
                budget: MAX_DENSE_QUBITS / 2,
            });
        }
        let d = 1usize << q.len();
        let kmask = self.layout.mask(&q);
        let mut groups: Map<u128, Vec<(usize, Complex64)>> = Map::default();
        for (&i, &a) in &self.amps {
            groups
                .entry(i & !kmask)
                .or_default()
                .push((self.layout.read(i, &q) as usize, a));
        }
        let mut rho = vec![Complex64::new(0.0, 0.0); d * d];
        for v in groups.values() {
            for &(r, ar) in v {
                for &(c, ac) in v {
                    rho[r * d + c] += ar * ac.conj();
                }
            }
        }
        let norm = self.norm_sq();
        for x in rho.iter_mut() {
            *x /= norm;
        }
        DensityMatrix::new(d, rho)
    }

    /// Amplitudes of `keep` when every other register is in |0⟩.
    /// Errors when more than `tol` of the squared norm lies elsewhere.
    pub fn restrict(&self, keep: &[&str], tol: f64) -> Result<StateVector> {
        let others: Vec<&str> = self
            .layout
            .registers()
            .iter()
            .map(|r| r.name.as_str())
            .filter(|n| !keep.contains(n))
            .collect();
        let leak = self.leakage(&others)?;
        if leak > tol {
            return Err(Error::InvalidState(format!(
                "{leak:e} of the state lies outside registers {keep:?}"
            )));
        }
        let regs: Vec<(&str, usize)> = keep
            .iter()
            .map(|n| Ok((*n, self.layout.register(n)?.width)))
            .collect::<Result<_>>()?;
        let layout = RegisterLayout::new(&regs)?;
        let spans: Vec<Vec<usize>> = keep.iter().map(|n| self.layout.qubits(n)).collect::<Result<_>>()?;
        let new_spans: Vec<Vec<usize>> = keep.iter().map(|n| layout.qubits(n)).collect::<Result<_>>()?;
        let omask = {
            let mut m = 0u128;
            for o in &others {
                m |= self.layout.mask(&self.layout.qubits(o)?);
            }
            m
        };
        let mut amps = Map::default();
        for (&i, &a) in &self.amps {
            if i & omask != 0 {
                continue;
            }
            let j = spans
                .iter()
                .zip(&new_spans)
                .fold(0u128, |idx, (s, ns)| layout.write(idx, ns, self.layout.read(i, s)));
            amps.insert(j, a);
        }
        let n = amps.values().map(|a: &Complex64| a.norm_sqr()).sum::<f64>().sqrt();
        for a in amps.values_mut() {
            *a /= n;
        }
        Ok(StateVector { layout, amps })
    }

    /// `⟨self|other⟩`; layouts must have the same size.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        if self.num_qubits() != other.num_qubits() {
            return Err(Error::InvalidState("states have different qubit counts".into()));
        }
        Ok(self
            .amps
            .iter()
            .map(|(i, a)| a.conj() * other.amplitude(*i))
            .sum())
    }

    /// `|⟨target|self⟩|²` against a dense amplitude vector.
    pub fn fidelity(&self, target: &[Complex64]) -> Result<f64> {
        let q = self.num_qubits();
        if q > MAX_DENSE_QUBITS || target.len() != 1usize << q {
            return Err(Error::InvalidState(format!(
                "target has {} amplitudes, state has 2^{q}",
                target.len()
            )));
        }
        let s: Complex64 = self
            .amps
            .iter()
            .map(|(&i, &a)| target[i as usize].conj() * a)
            .sum();
        let tn: f64 = target.iter().map(|t| t.norm_sqr()).sum();
        Ok((s.norm_sqr() / (tn * self.norm_sq())).min(1.0))
    }

    pub fn fidelity_real(&self, target: &[f64]) -> Result<f64> {
        let c: Vec<Complex64> = target.iter().map(|&t| Complex64::new(t, 0.0)).collect();
        self.fidelity(&c)
    }

    /// One line per basis state, `bitstring real imag`, sorted by index;
    /// amplitudes below 1e-12 are omitted.
    pub fn dump(&self) -> String {
        let q = self.num_qubits();
        let mut s = String::new();
        for (i, a) in self.entries() {
            if a.norm() < DUMP_CUTOFF {
                continue;
            }
            let bits: String = (0..q)
                .map(|k| if (i >> (q - 1 - k)) & 1 == 1 { '1' } else { '0' })
                .collect();
            let _ = writeln!(s, "{bits} {:.17e} {:.17e}", a.re, a.im);
        }
        s
    }

    /// Parses [`StateVector::dump`] output.
    pub fn from_dump(layout: RegisterLayout, text: &str) -> Result<Self> {
        let q = layout.num_qubits();
        let mut entries = Vec::new();
        for (row, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let parse_err = |col: usize, msg: &str| Error::Parse {
                row: row + 1,
                col,
                msg: msg.to_string(),
            };
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() != 3 || f[0].len() != q {
                return Err(parse_err(1, "expected `bitstring real imag`"));
            }
            let idx = u128::from_str_radix(f[0], 2).map_err(|e| parse_err(1, &e.to_string()))?;
            let re: f64 = f[1].parse().map_err(|_| parse_err(2, "bad real part"))?;
            let im: f64 = f[2].parse().map_err(|_| parse_err(3, "bad imaginary part"))?;
            entries.push((idx, Complex64::new(re, im)));
        }
        Self::from_entries(layout, entries)
    }
}
