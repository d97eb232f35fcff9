//! Error type shared by all structures in the crate.

use crate::{ElementKey, SetId};

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    /// A value does not fit in the value bits of a packed field.
    #[error("value {value} does not fit in a field (max {max})")]
    FieldOverflow { value: u64, max: u64 },

    /// Two packed lists with different layouts were combined.
    #[error("packed lists have different field layouts")]
    LayoutMismatch,

    /// msb_index of zero is undefined.
    #[error("most significant bit of zero is undefined")]
    ZeroWord,

    /// A field value that should be present in a packed list is not.
    #[error("value {0} not present in packed list")]
    FieldNotFound(u64),

    /// A structure parameter is out of its legal range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),

    /// Query or update names a set the family has never seen.
    #[error("unknown set {0}")]
    UnknownSet(SetId),

    /// Insert of an element already in the set.
    #[error("element {element} already in set {set}")]
    DuplicateElement { set: SetId, element: ElementKey },

    /// Delete of an element not in the set.
    #[error("element {element} not in set {set}")]
    ElementNotFound { set: SetId, element: ElementKey },

    /// Insert would push a capped set to its cap.
    #[error("set {set} is at capacity (cap {cap})")]
    CapacityExceeded { set: SetId, cap: usize },
}
