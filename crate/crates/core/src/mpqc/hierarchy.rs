//! The partition driver: groups that the identifiable-abort oracle splits
//! are refined until every group finishes, then each group runs the
//! best-of-both-worlds protocol on its own.

use std::collections::{BTreeSet, VecDeque};

use crate::error::{Error, Result};
use crate::harness::transcript::Transcript;

use super::circuit::{CircuitIR, InputState};
use super::protocol::{bobw0_run, max_thres, MpqcOutcome, MpqcParams, Session};

/// Answer of the identifiable-abort oracle for one group.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SwiaResult {
    /// Preprocessing for the group succeeded.
    Succeed,
    /// The group is split in two; honest parties always land together.
    Split(Vec<usize>, Vec<usize>),
}

pub trait SwiaOracle {
    fn call(&mut self, group: &[usize]) -> SwiaResult;
}

/// Splits off the scripted sets, in order, from the groups containing them.
#[derive(Clone, Debug, Default)]
pub struct ScriptedSwia {
    pending: VecDeque<BTreeSet<usize>>,
}

impl ScriptedSwia {
    pub fn new(splits: &[Vec<usize>]) -> Self {
        Self {
            pending: splits.iter().map(|s| s.iter().copied().collect()).collect(),
        }
    }
}

impl SwiaOracle for ScriptedSwia {
    fn call(&mut self, group: &[usize]) -> SwiaResult {
        let g: BTreeSet<usize> = group.iter().copied().collect();
        let hit = self
            .pending
            .iter()
            .position(|s| !s.is_empty() && s.len() < g.len() && s.is_subset(&g));
        match hit {
            Some(i) => {
                let part = self.pending.remove(i).expect("index from position");
                let rest = g.difference(&part).copied().collect();
                SwiaResult::Split(part.into_iter().collect(), rest)
            }
            None => SwiaResult::Succeed,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartitionNode {
    pub parties: Vec<usize>,
    pub children: Option<(usize, usize)>,
    pub finished: bool,
}

/// Binary tree of party groups; node 0 is the root.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartitionTree {
    nodes: Vec<PartitionNode>,
}

impl PartitionTree {
    pub fn new(parties: &[usize]) -> Self {
        Self {
            nodes: vec![PartitionNode {
                parties: parties.to_vec(),
                children: None,
                finished: false,
            }],
        }
    }

    pub fn nodes(&self) -> &[PartitionNode] {
        &self.nodes
    }

    /// Leaves in creation order.
    pub fn leaves(&self) -> Vec<&PartitionNode> {
        self.nodes.iter().filter(|n| n.children.is_none()).collect()
    }

    fn split(&mut self, node: usize, a: Vec<usize>, b: Vec<usize>) -> (usize, usize) {
        let i = self.nodes.len();
        for parties in [a, b] {
            self.nodes.push(PartitionNode {
                parties,
                children: None,
                finished: false,
            });
        }
        self.nodes[node].children = Some((i, i + 1));
        (i, i + 1)
    }
}

#[derive(Clone, Debug)]
pub struct HierarchyOutcome {
    pub tree: PartitionTree,
    pub oracle_calls: usize,
    /// Finished groups with their runs, in tree order.
    pub leaves: Vec<(Vec<usize>, MpqcOutcome)>,
    pub aborted: bool,
    pub identified: Vec<usize>,
}

/// Refines `parties` with `oracle` and runs every finished group.
///
/// Panics if the oracle separates two honest parties: that is a broken
/// oracle, not a protocol outcome.
pub fn hierarchy_run(
    s: &mut Session<'_>,
    params: &MpqcParams,
    circuit: &CircuitIR,
    parties: &[usize],
    inputs: &[InputState],
    oracle: &mut dyn SwiaOracle,
) -> Result<(HierarchyOutcome, Transcript)> {
    if circuit.has_public_outputs() {
        return Err(Error::Config(
            "the partition driver only runs circuits with private outputs".into(),
        ));
    }
    let mut tree = PartitionTree::new(parties);
    let mut open = VecDeque::from([0usize]);
    let mut calls = 0;
    while let Some(node) = open.pop_front() {
        let group = tree.nodes[node].parties.clone();
        calls += 1;
        match oracle.call(&group) {
            SwiaResult::Succeed => tree.nodes[node].finished = true,
            SwiaResult::Split(a, b) => {
                let whole: BTreeSet<usize> = group.iter().copied().collect();
                let sa: BTreeSet<usize> = a.iter().copied().collect();
                let sb: BTreeSet<usize> = b.iter().copied().collect();
                if sa.is_empty() || sb.is_empty() || !sa.is_disjoint(&sb) || &sa | &sb != whole {
                    return Err(Error::Config(format!("oracle split {group:?} into {a:?} and {b:?}")));
                }
                let honest_a = a.iter().any(|&p| !s.hooks.is_corrupted(p));
                let honest_b = b.iter().any(|&p| !s.hooks.is_corrupted(p));
                assert!(
                    !(honest_a && honest_b),
                    "oracle separated honest parties: {a:?} / {b:?}"
                );
                let (i, j) = tree.split(node, a, b);
                open.push_back(i);
                open.push_back(j);
            }
        }
    }

    let mut transcript: Option<Transcript> = None;
    let mut leaves = Vec::new();
    let mut identified = BTreeSet::new();
    let mut aborted = false;
    for leaf in tree.leaves() {
        let group = leaf.parties.clone();
        let p = MpqcParams {
            thres: max_thres(&params.code, group.len(), params.thres),
            ..params.clone()
        };
        let (out, t) = bobw0_run(s, p, circuit, &group, inputs, transcript.take())?;
        transcript = Some(t);
        aborted |= out.aborted;
        identified.extend(out.identified.iter().copied());
        leaves.push((group, out));
    }
    Ok((
        HierarchyOutcome {
            tree,
            oracle_calls: calls,
            leaves,
            aborted,
            identified: identified.into_iter().collect(),
        },
        transcript.unwrap_or_default(),
    ))
}
