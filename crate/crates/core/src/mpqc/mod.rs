//! Multiparty quantum computation with publicly verifiable identifiable
//! abort, its partition driver and executable ideal functionalities.

pub mod circuit;
pub mod cmpc;
pub mod hierarchy;
pub mod ideal;
pub mod protocol;

pub use circuit::{CircuitIR, EffectiveInput, InputState, Instruction, Reference};
pub use cmpc::CmpcState;
pub use hierarchy::{hierarchy_run, HierarchyOutcome, PartitionNode, PartitionTree, ScriptedSwia, SwiaOracle, SwiaResult};
pub use ideal::{ideal_aqa, ideal_mpqc, ideal_rqc, IdealChoices, IdealOutcome};
pub use protocol::{
    bobw0_run, max_thres, outputs_correct, random_inputs, share_map, solve_bits, thres_is_valid, MpqcOutcome, MpqcParams, OutputSlot, Protocol,
    Session,
};
