//! Exact arithmetic in the registered number fields, with star maps and
//! Minkowski embeddings.

mod element;
mod field;

pub use element::AlgebraicElement;
pub use field::{FieldId, FieldSpec, Generator};
