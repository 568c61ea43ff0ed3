use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Named, disjoint, ordered qubit lists inside one [`super::QuantumState`].
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegisterMap {
    regs: BTreeMap<String, Vec<usize>>,
}

impl RegisterMap {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a register; fails on a reused name or an index already taken.
    pub fn insert(&mut self, name: &str, qubits: Vec<usize>, n: usize) -> Result<()> {
        if self.regs.contains_key(name) {
            return Err(Error::Config(format!("register {name:?} defined twice")));
        }
        let taken: BTreeSet<usize> = self.regs.values().flatten().copied().collect();
        let mut seen = BTreeSet::new();
        for &q in &qubits {
            if q >= n {
                return Err(Error::IndexOutOfRange { index: q, n });
            }
            if taken.contains(&q) || !seen.insert(q) {
                return Err(Error::DuplicateIndex(q));
            }
        }
        self.regs.insert(name.to_string(), qubits);
        Ok(())
    }

    pub fn get(&self, name: &str) -> Result<&[usize]> {
        self.regs
            .get(name)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::Config(format!("no register named {name:?}")))
    }

    pub fn remove(&mut self, name: &str) -> Option<Vec<usize>> {
        self.regs.remove(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.regs.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.regs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.regs.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overlapping_registers_are_rejected() {
        let mut m = RegisterMap::new();
        m.insert("A", vec![0, 1], 4).unwrap();
        assert!(matches!(m.insert("B", vec![1, 2], 4), Err(Error::DuplicateIndex(1))));
        assert!(matches!(m.insert("C", vec![4], 4), Err(Error::IndexOutOfRange { .. })));
        assert!(m.insert("A", vec![3], 4).is_err());
        m.insert("B", vec![3, 2], 4).unwrap();
        assert_eq!(m.get("B").unwrap(), &[3, 2]);
    }
}
