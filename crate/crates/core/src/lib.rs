pub mod algebra;
pub mod budget;
pub mod classification;
pub mod error;
pub mod field;
pub mod finite_field;
pub mod groupoid;
pub mod linalg;
pub mod morphisms;
pub mod quad_ext;

pub use budget::Budget;
pub use error::{Error, Result};
pub use field::{square_abs, Field, Rational, Rationals};
pub use finite_field::{Fq, PrimePowerField};
pub use quad_ext::{ExtElem, QuadExt};
pub use algebra::{AlgElem, AlgebraSpec, Certificate, TripleType, Triple, VGrading};
pub use morphisms::{AutGroup, AutTag, EllStar, MorphismKind, MorphismWitness};
pub use classification::{ClassificationReport, Dichotomy, OrderedSetPredicates};
pub use groupoid::{GroupElem, OrbitPartition, SemidirectGroup};
