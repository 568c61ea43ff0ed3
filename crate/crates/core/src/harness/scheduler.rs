use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// Current holder of a qubit.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Holder {
    /// The trusted setup / auditor.
    Trusted,
    Party(usize),
    /// Sent and not yet delivered.
    InTransit,
}

/// Synchronous rounds with quantum registers passed by ownership.
///
/// A register sent in round `r` belongs to nobody until [`advance`] moves
/// to round `r + 1`, where it is handed to the recipient.
///
/// [`advance`]: RoundScheduler::advance
#[derive(Clone, Debug, Default)]
pub struct RoundScheduler {
    round: u64,
    owner: BTreeMap<usize, Holder>,
    pending: Vec<(Holder, Vec<usize>)>,
}

impl RoundScheduler {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn round(&self) -> u64 {
        self.round
    }

    /// Ends the current round and delivers everything sent in it.
    pub fn advance(&mut self) {
        self.round += 1;
        for (to, regs) in std::mem::take(&mut self.pending) {
            for q in regs {
                self.owner.insert(q, to);
            }
        }
    }

    /// Hands fresh qubits to `holder` (setup only).
    pub fn assign(&mut self, regs: &[usize], holder: Holder) {
        for &q in regs {
            self.owner.insert(q, holder);
        }
    }

    /// Forgets qubits that were measured and recycled.
    pub fn retire(&mut self, regs: &[usize]) {
        for q in regs {
            self.owner.remove(q);
        }
    }

    pub fn holder(&self, q: usize) -> Option<Holder> {
        self.owner.get(&q).copied()
    }

    pub fn check_owned(&self, who: Holder, regs: &[usize]) -> Result<()> {
        for &q in regs {
            match self.owner.get(&q) {
                Some(h) if *h == who => {}
                other => {
                    return Err(Error::Ownership(format!(
                        "{who:?} acted on qubit {q} held by {other:?} in round {}",
                        self.round
                    )))
                }
            }
        }
        Ok(())
    }

    /// Moves `regs` from `from` to `to`, delivered next round.
    pub fn send(&mut self, from: Holder, to: Holder, regs: &[usize]) -> Result<()> {
        self.check_owned(from, regs)?;
        for &q in regs {
            self.owner.insert(q, Holder::InTransit);
        }
        self.pending.push((to, regs.to_vec()));
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn delivery_happens_next_round() {
        let mut s = RoundScheduler::new();
        s.assign(&[0, 1], Holder::Party(0));
        s.send(Holder::Party(0), Holder::Party(1), &[1]).unwrap();
        assert!(s.check_owned(Holder::Party(0), &[1]).is_err());
        assert!(s.check_owned(Holder::Party(1), &[1]).is_err());
        s.advance();
        s.check_owned(Holder::Party(1), &[1]).unwrap();
        s.check_owned(Holder::Party(0), &[0]).unwrap();
        assert!(s.send(Holder::Party(0), Holder::Party(2), &[1]).is_err());
    }
}
