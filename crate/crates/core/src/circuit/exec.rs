use crate::error::Result;
use crate::qsim::{BasisPermutation, Gate, StateVector, Trace};

/// A state plus the trace of everything applied to it.
pub(crate) struct Exec {
    pub state: StateVector,
    pub trace: Trace,
}

impl Exec {
    pub fn new(state: StateVector) -> Self {
        Self {
            state,
            trace: Trace::default(),
        }
    }

    pub fn gate(&mut self, stage: &str, g: Gate) -> Result<()> {
        self.state.apply(&g)?;
        self.trace.record_gate(stage, &g);
        Ok(())
    }

    pub fn gates(&mut self, stage: &str, gates: impl IntoIterator<Item = Gate>) -> Result<()> {
        gates.into_iter().try_for_each(|g| self.gate(stage, g))
    }

    pub fn oracle(&mut self, stage: &str, p: &BasisPermutation) -> Result<()> {
        self.state.apply_permutation(p)?;
        self.trace.record_oracle(stage, p);
        Ok(())
    }
}
