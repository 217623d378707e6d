//! Subgroups of `AGL₂(Z/2^k)` inside `Γ₀^☺(2)`: closure, index-2 subgroups,
//! the happy predicate, the `*` operation, conjugacy, and the descent that
//! enumerates the happy classes.

mod catalog;
mod conjugacy;
mod descent;
mod packed;
mod quotient;
mod subgroup;

pub use catalog::{
    assign_rows, chi_h2, chi_multiplier, decode_generators, literal_row_subgroups, CatalogClass,
    ExemplarRecord, Numbering, SubgroupCatalog, ENCODING_NOTE,
};
pub use conjugacy::{are_conjugate, conjugate, conjugator, Invariants};
pub use descent::{
    enumerate_from_root, enumerate_happy, enumerate_level4, ClassRecord, DescentStats, Enumeration,
};
pub use packed::{Arith, Packed, MAX_LEVEL};
pub use quotient::{frattini_subgroup, happy_index2_subgroups, index2_subgroups, CharacterSpace};
pub use subgroup::{
    congruence_kernel_generators, gamma0_gl2_order, is_happy, star, Ambient, AmbientKind,
    ClosureBuilder, HalfPoint, Happiness, Subgroup,
};
