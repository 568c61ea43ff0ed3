use std::collections::BTreeSet;

use serde_json::{json, Value};

use crate::harness::transcript::{kinds, Sender, Transcript};

/// The trusted classical party: identified set, threshold and the public
/// transcript. Keys are held by the protocol structures it drives.
#[derive(Clone, Debug)]
pub struct CmpcState {
    thres: usize,
    corr: BTreeSet<usize>,
    transcript: Transcript,
}

impl CmpcState {
    /// Opens a transcript segment for `parties` with threshold `thres`.
    pub fn new(parties: &[usize], thres: usize, protocol: &str) -> Self {
        let mut s = Self {
            thres,
            corr: BTreeSet::new(),
            transcript: Transcript::new(),
        };
        s.open_segment(parties, thres, protocol, 0);
        s
    }

    /// Continues `transcript` with a new segment (one per partition group).
    pub fn continuing(transcript: Transcript, parties: &[usize], thres: usize, protocol: &str, round: u64) -> Self {
        let mut s = Self {
            thres,
            corr: BTreeSet::new(),
            transcript,
        };
        s.open_segment(parties, thres, protocol, round);
        s
    }

    fn open_segment(&mut self, parties: &[usize], thres: usize, protocol: &str, round: u64) {
        self.transcript.push(
            round,
            Sender::Cmpc,
            kinds::PARAMS,
            json!({ "n": parties.len(), "parties": parties, "thres": thres, "protocol": protocol }),
        );
    }

    pub fn thres(&self) -> usize {
        self.thres
    }

    pub fn corr(&self) -> &BTreeSet<usize> {
        &self.corr
    }

    pub fn is_identified(&self, party: usize) -> bool {
        self.corr.contains(&party)
    }

    /// Adds `party` to `Corr` (publicly). Returns whether it was new.
    pub fn identify(&mut self, round: u64, party: usize, reason: &str) -> bool {
        let fresh = self.corr.insert(party);
        if fresh {
            self.transcript.push(
                round,
                Sender::Cmpc,
                kinds::IDENTIFY,
                json!({ "party": party, "reason": reason }),
            );
        }
        fresh
    }

    pub fn must_abort(&self) -> bool {
        self.corr.len() > self.thres
    }

    pub fn publish(&mut self, round: u64, sender: Sender, kind: &str, payload: Value) {
        self.transcript.push(round, sender, kind, payload);
    }

    /// Closes the segment with a public abort naming `Corr`.
    pub fn publish_abort(&mut self, round: u64) {
        let named: Vec<usize> = self.corr.iter().copied().collect();
        self.transcript
            .push(round, Sender::Cmpc, kinds::ABORT, json!({ "identified": named }));
    }

    /// Closes the segment with the public classical output.
    pub fn publish_output(&mut self, round: u64, r_out: &[bool]) {
        let bits: String = r_out.iter().map(|&b| if b { '1' } else { '0' }).collect();
        self.transcript
            .push(round, Sender::Cmpc, kinds::OUTPUT, json!({ "r_out": bits }));
    }

    pub fn transcript(&self) -> &Transcript {
        &self.transcript
    }

    pub fn into_transcript(self) -> Transcript {
        self.transcript
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::transcript::observer_replay;

    #[test]
    fn corr_only_grows_and_abort_is_strict() {
        let mut c = CmpcState::new(&[0, 1, 2], 1, "test");
        assert!(c.identify(1, 2, "x"));
        assert!(!c.identify(2, 2, "again"));
        assert!(!c.must_abort());
        c.identify(3, 0, "y");
        assert!(c.must_abort());
        c.publish_abort(4);
        let v = observer_replay(c.transcript()).unwrap();
        assert!(v.aborted);
        assert_eq!(v.identified, vec![0, 2]);
    }
}
