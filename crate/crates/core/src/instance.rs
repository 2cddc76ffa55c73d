use crate::jsj::JsjGraph;
use crate::phi::PhiGraph;
use crate::semicover::{ConstantInput, CoverGraphSpec};

/// Everything known about a subgroup: the ambient decomposition, its almost
/// fibered surface, extra vertex and edge spaces of the compact core, and
/// any covering constants.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Instance {
    pub jsj: JsjGraph,
    pub phi: PhiGraph,
    pub cover: CoverGraphSpec,
    pub constants: ConstantInput,
    pub infinite_index: bool,
}
