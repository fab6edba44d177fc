use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest qubit count a basis index can address.
pub const MAX_QUBITS: usize = 128;

/// A named, contiguous run of qubits.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Register {
    pub name: String,
    pub start: usize,
    pub width: usize,
}

impl Register {
    pub fn qubits(&self) -> Vec<usize> {
        (self.start..self.start + self.width).collect()
    }

    /// Qubit holding bit `2^(width-1-i)` of the register value.
    pub fn qubit(&self, i: usize) -> usize {
        assert!(i < self.width, "qubit {i} out of range for register {}", self.name);
        self.start + i
    }
}

/// Ordered registers covering qubits `0..q`.
///
/// Qubit 0 is the most significant bit of a basis index, and within each
/// register the first qubit is the most significant bit of its value. Reading
/// a basis index in binary therefore lists the registers left to right.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegisterLayout {
    registers: Vec<Register>,
    total: usize,
}

impl RegisterLayout {
    pub fn new<S: AsRef<str>>(regs: &[(S, usize)]) -> Result<Self> {
        let mut registers = Vec::with_capacity(regs.len());
        let mut start = 0;
        for (name, width) in regs {
            let name = name.as_ref();
            if registers.iter().any(|r: &Register| r.name == name) {
                return Err(Error::InvalidInput(format!("duplicate register name {name:?}")));
            }
            registers.push(Register {
                name: name.to_string(),
                start,
                width: *width,
            });
            start += width;
        }
        if start > MAX_QUBITS {
            return Err(Error::ResourceRefusal {
                required: start,
                budget: MAX_QUBITS,
            });
        }
        Ok(Self {
            registers,
            total: start,
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.total
    }

    pub fn registers(&self) -> &[Register] {
        &self.registers
    }

    pub fn register(&self, name: &str) -> Result<&Register> {
        self.registers
            .iter()
            .find(|r| r.name == name)
            .ok_or_else(|| Error::InvalidInput(format!("no register named {name:?}")))
    }

    pub fn qubits(&self, name: &str) -> Result<Vec<usize>> {
        Ok(self.register(name)?.qubits())
    }

    /// Bit position of `qubit` inside a basis index.
    #[inline]
    pub fn bit(&self, qubit: usize) -> u32 {
        (self.total - 1 - qubit) as u32
    }

    #[inline]
    pub fn mask(&self, qubits: &[usize]) -> u128 {
        qubits.iter().fold(0u128, |m, &q| m | (1u128 << self.bit(q)))
    }

    /// Integer spelled by `qubits` (first qubit most significant).
    #[inline]
    pub fn read(&self, index: u128, qubits: &[usize]) -> u64 {
        qubits
            .iter()
            .fold(0u64, |v, &q| (v << 1) | ((index >> self.bit(q)) & 1) as u64)
    }

    /// Overwrites the bits named by `qubits` with `value`.
    #[inline]
    pub fn write(&self, index: u128, qubits: &[usize], value: u64) -> u128 {
        let w = qubits.len();
        qubits.iter().enumerate().fold(index, |idx, (i, &q)| {
            let bit = ((value >> (w - 1 - i)) & 1) as u128;
            (idx & !(1u128 << self.bit(q))) | (bit << self.bit(q))
        })
    }

    pub fn read_register(&self, index: u128, name: &str) -> Result<u64> {
        Ok(self.read(index, &self.qubits(name)?))
    }

    pub fn check_qubits(&self, qubits: &[usize]) -> Result<()> {
        if let Some(q) = qubits.iter().find(|&&q| q >= self.total) {
            return Err(Error::InvalidGate(format!(
                "qubit {q} outside a {}-qubit layout",
                self.total
            )));
        }
        Ok(())
    }
}
