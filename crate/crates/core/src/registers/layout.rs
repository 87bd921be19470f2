use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

pub const DEFAULT_QUBIT_CAP: usize = 24;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Register {
    pub name: String,
    pub qubits: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RegisterLayout {
    regs: Vec<Register>,
    cap: usize,
}

impl RegisterLayout {
    pub fn new<S: AsRef<str>>(regs: &[(S, usize)]) -> Result<Self> {
        Self::with_cap(regs, DEFAULT_QUBIT_CAP)
    }

    pub fn with_cap<S: AsRef<str>>(regs: &[(S, usize)], cap: usize) -> Result<Self> {
        let regs: Vec<Register> =
            regs.iter().map(|(n, q)| Register { name: n.as_ref().to_string(), qubits: *q }).collect();
        for (i, r) in regs.iter().enumerate() {
            if regs[..i].iter().any(|o| o.name == r.name) {
                return invalid(format!("duplicate register name `{}`", r.name));
            }
        }
        let total: usize = regs.iter().map(|r| r.qubits).sum();
        if total > cap {
            return Err(Error::CapacityExceeded { needed: total, cap });
        }
        Ok(Self { regs, cap })
    }

    pub fn registers(&self) -> &[Register] {
        &self.regs
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn total_qubits(&self) -> usize {
        self.regs.iter().map(|r| r.qubits).sum()
    }

    pub fn dim(&self) -> usize {
        1usize << self.total_qubits()
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.regs.iter().position(|r| r.name == name).ok_or_else(|| Error::UnknownRegister(name.to_string()))
    }

    pub fn reg_dim(&self, idx: usize) -> usize {
        1usize << self.regs[idx].qubits
    }

    /// Index distance between consecutive values of register `idx`.
    pub fn stride(&self, idx: usize) -> usize {
        1usize << self.regs[idx + 1..].iter().map(|r| r.qubits).sum::<usize>()
    }

    /// Value held by register `idx` in global basis index `global`.
    pub fn value_in(&self, idx: usize, global: usize) -> usize {
        (global / self.stride(idx)) % self.reg_dim(idx)
    }

    /// Layout with the named registers removed.
    pub fn without(&self, names: &[&str]) -> Result<Self> {
        for n in names {
            self.index_of(n)?;
        }
        let regs: Vec<(String, usize)> = self
            .regs
            .iter()
            .filter(|r| !names.contains(&r.name.as_str()))
            .map(|r| (r.name.clone(), r.qubits))
            .collect();
        Self::with_cap(&regs, self.cap)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strides_and_values() {
        let l = RegisterLayout::new(&[("label", 2), ("anc", 3), ("sys", 4)]).unwrap();
        assert_eq!(l.total_qubits(), 9);
        assert_eq!(l.stride(2), 1);
        assert_eq!(l.stride(1), 16);
        assert_eq!(l.stride(0), 128);
        let g = 2 * 128 + 5 * 16 + 9;
        assert_eq!(l.value_in(0, g), 2);
        assert_eq!(l.value_in(1, g), 5);
        assert_eq!(l.value_in(2, g), 9);
    }

    #[test]
    fn rejects_duplicates_and_cap() {
        assert!(RegisterLayout::new(&[("a", 1), ("a", 1)]).is_err());
        assert!(matches!(
            RegisterLayout::new(&[("a", 20), ("b", 5)]),
            Err(Error::CapacityExceeded { needed: 25, cap: 24 })
        ));
    }
}
