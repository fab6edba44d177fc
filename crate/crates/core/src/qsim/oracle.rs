use std::collections::HashSet;
use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Above this many input bits a bijection is checked by sampling.
pub const EXHAUSTIVE_CHECK_BITS: usize = 20;
const SAMPLED_CHECKS: usize = 4096;

type MapFn = Arc<dyn Fn(&[u64]) -> Vec<u64> + Send + Sync>;

/// A reversible classical map on the basis states of a tuple of qubit spans.
///
/// The map sees one integer per span (most significant qubit first) and
/// returns the same number of integers.
#[derive(Clone)]
pub struct BasisPermutation {
    name: String,
    spans: Vec<Vec<usize>>,
    forward: MapFn,
    backward: MapFn,
}

impl fmt::Debug for BasisPermutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BasisPermutation")
            .field("name", &self.name)
            .field("spans", &self.spans)
            .finish()
    }
}

fn total_bits(spans: &[Vec<usize>]) -> usize {
    spans.iter().map(Vec::len).sum()
}

fn split(x: u128, spans: &[Vec<usize>]) -> Vec<u64> {
    let mut rest = total_bits(spans);
    spans
        .iter()
        .map(|s| {
            rest -= s.len();
            ((x >> rest) & ((1u128 << s.len()) - 1)) as u64
        })
        .collect()
}

fn join(vals: &[u64], spans: &[Vec<usize>]) -> u128 {
    vals.iter()
        .zip(spans)
        .fold(0u128, |acc, (&v, s)| (acc << s.len()) | v as u128)
}

impl BasisPermutation {
    /// Map with a known inverse. Bijectivity and `backward ∘ forward = id` are
    /// verified exhaustively for small spans and on random samples otherwise.
    pub fn new<F, G>(name: &str, spans: Vec<Vec<usize>>, forward: F, backward: G) -> Result<Self>
    where
        F: Fn(&[u64]) -> Vec<u64> + Send + Sync + 'static,
        G: Fn(&[u64]) -> Vec<u64> + Send + Sync + 'static,
    {
        let p = Self {
            name: name.to_string(),
            spans,
            forward: Arc::new(forward),
            backward: Arc::new(backward),
        };
        p.verify()?;
        Ok(p)
    }

    /// Map that is its own inverse.
    pub fn involution<F>(name: &str, spans: Vec<Vec<usize>>, f: F) -> Result<Self>
    where
        F: Fn(&[u64]) -> Vec<u64> + Send + Sync + 'static,
    {
        let f: MapFn = Arc::new(f);
        let p = Self {
            name: name.to_string(),
            spans,
            forward: Arc::clone(&f),
            backward: f,
        };
        p.verify()?;
        Ok(p)
    }

    /// `|x_1⟩…|x_r⟩|y⟩ → |x_1⟩…|x_r⟩|y ⊕ f(x)⟩`, the standard way to embed
    /// an irreversible function. `f(x)` must fit in the output span.
    pub fn xor_into<F>(name: &str, inputs: Vec<Vec<usize>>, output: Vec<usize>, f: F) -> Result<Self>
    where
        F: Fn(&[u64]) -> u64 + Send + Sync + 'static,
    {
        let r = inputs.len();
        let w = output.len();
        let mut spans = inputs;
        spans.push(output);
        Self::involution(name, spans, move |vals| {
            let fx = f(&vals[..r]);
            debug_assert!(w >= 64 || fx < (1u64 << w), "oracle output {fx} exceeds {w} bits");
            let mut out = vals.to_vec();
            out[r] ^= if w >= 64 { fx } else { fx & ((1u64 << w) - 1) };
            out
        })
    }

    /// Input-only map without an explicit inverse; only usable on spans small
    /// enough to enumerate, from which the inverse table is built.
    pub fn from_table<F>(name: &str, spans: Vec<Vec<usize>>, forward: F) -> Result<Self>
    where
        F: Fn(&[u64]) -> Vec<u64> + Send + Sync + 'static,
    {
        let bits = total_bits(&spans);
        if bits > EXHAUSTIVE_CHECK_BITS {
            return Err(Error::InvalidOracle(format!(
                "{name}: {bits} bits is too many to tabulate an inverse"
            )));
        }
        let mut inv = vec![u128::MAX; 1usize << bits];
        for x in 0..(1u128 << bits) {
            let y = join(&forward(&split(x, &spans)), &spans);
            if y >> bits != 0 || inv[y as usize] != u128::MAX {
                return Err(Error::InvalidOracle(format!("{name}: map is not a bijection")));
            }
            inv[y as usize] = x;
        }
        let inv = Arc::new(inv);
        let sp = spans.clone();
        Self::new(name, spans, forward, move |v| split(inv[join(v, &sp) as usize], &sp))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn spans(&self) -> &[Vec<usize>] {
        &self.spans
    }

    pub fn qubits(&self) -> Vec<usize> {
        self.spans.iter().flatten().copied().collect()
    }

    pub fn apply_values(&self, vals: &[u64]) -> Vec<u64> {
        (self.forward)(vals)
    }

    pub fn inverse(&self) -> Self {
        Self {
            name: format!("{}^-1", self.name),
            spans: self.spans.clone(),
            forward: Arc::clone(&self.backward),
            backward: Arc::clone(&self.forward),
        }
    }

    fn verify(&self) -> Result<()> {
        let bits = total_bits(&self.spans);
        let mut all: Vec<usize> = self.qubits();
        all.sort_unstable();
        if all.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidOracle(format!("{}: spans overlap", self.name)));
        }
        if bits > 127 {
            return Err(Error::InvalidOracle(format!("{}: {bits} bits is too wide", self.name)));
        }
        let check = |x: u128| -> Result<u128> {
            let fx = (self.forward)(&split(x, &self.spans));
            if fx.len() != self.spans.len() {
                return Err(Error::InvalidOracle(format!("{}: wrong output arity", self.name)));
            }
            for (v, s) in fx.iter().zip(&self.spans) {
                if s.len() < 64 && v >> s.len() != 0 {
                    return Err(Error::InvalidOracle(format!(
                        "{}: output {v} does not fit {} qubits",
                        self.name,
                        s.len()
                    )));
                }
            }
            let y = join(&fx, &self.spans);
            let back = join(&(self.backward)(&fx), &self.spans);
            if back != x {
                return Err(Error::InvalidOracle(format!(
                    "{}: inverse does not undo the map at basis state {x}",
                    self.name
                )));
            }
            Ok(y)
        };
        if bits <= EXHAUSTIVE_CHECK_BITS {
            let mut seen = HashSet::with_capacity(1usize << bits);
            for x in 0..(1u128 << bits) {
                if !seen.insert(check(x)?) {
                    return Err(Error::InvalidOracle(format!("{}: map is not a bijection", self.name)));
                }
            }
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(bits as u64);
            let mask = (1u128 << bits) - 1;
            for _ in 0..SAMPLED_CHECKS {
                check(rng.random::<u128>() & mask)?;
            }
        }
        Ok(())
    }
}
