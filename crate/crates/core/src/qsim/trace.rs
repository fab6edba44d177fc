use std::fmt::Write as _;

use super::gate::Gate;
use super::oracle::BasisPermutation;

#[derive(Clone, Debug, PartialEq)]
pub struct TraceEntry {
    pub stage: String,
    pub kind: String,
    pub targets: Vec<usize>,
    pub controls: Vec<usize>,
    pub params: Vec<f64>,
}

/// Ordered record of every operation applied to a state.
#[derive(Clone, Debug, Default)]
pub struct Trace {
    pub entries: Vec<TraceEntry>,
}

impl Trace {
    pub fn record_gate(&mut self, stage: &str, g: &Gate) {
        self.entries.push(TraceEntry {
            stage: stage.to_string(),
            kind: g.kind.name().to_string(),
            targets: g.targets.clone(),
            controls: g.controls.clone(),
            params: g.kind.params(),
        });
    }

    pub fn record_oracle(&mut self, stage: &str, p: &BasisPermutation) {
        self.entries.push(TraceEntry {
            stage: stage.to_string(),
            kind: format!("ORACLE:{}", p.name()),
            targets: p.qubits(),
            controls: vec![],
            params: vec![],
        });
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entries whose stage is `stage`.
    pub fn stage(&self, stage: &str) -> impl Iterator<Item = &TraceEntry> {
        let stage = stage.to_string();
        self.entries.iter().filter(move |e| e.stage == stage)
    }

    /// One line per entry: `stage kind targets controls params`, with
    /// comma-separated lists and `-` for an empty list.
    pub fn dump(&self) -> String {
        fn list<T: ToString>(v: &[T]) -> String {
            if v.is_empty() {
                "-".into()
            } else {
                v.iter().map(T::to_string).collect::<Vec<_>>().join(",")
            }
        }
        let mut s = String::new();
        for e in &self.entries {
            let _ = writeln!(
                s,
                "{} {} {} {} {}",
                e.stage,
                e.kind,
                list(&e.targets),
                list(&e.controls),
                list(&e.params)
            );
        }
        s
    }
}
