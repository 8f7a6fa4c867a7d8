//! Workbench for the AbC attribute-based communication calculus: syntax,
//! attribute evaluation, component and system semantics, bounded state
//! space exploration, bisimulation, and a broadcast π-calculus bridge.

pub mod attributes;
pub mod bpi;
pub mod component;
pub mod equivalence;
pub mod error;
pub mod explorer;
pub mod generate;
pub mod syntax;
pub mod system;

pub use attributes::{PredKey, Universe};
pub use component::{Delivery, Message};
pub use equivalence::{BisimReport, Mode, Verdict};
pub use error::{Error, ParseError, ResolveError, Result};
pub use explorer::{Bounds, ExploreOptions, Lts};
pub use syntax::*;
pub use system::{StepOptions, SystemLabel};
