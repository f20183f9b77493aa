//! Wire curves, the tubular neighborhood W, the Plateau domain D₀ and
//! the spanning gate.

mod domain;
mod spanning;
mod tube;
mod wire;

pub use domain::{inner_offset_domain, shoelace, uniform_offset_params, PlanarDomain};
pub use spanning::{spanning_check, spanning_report, SpanningReport};
pub use tube::{Tube, TubePoint, V3};
pub use wire::{CurveJet, WireCurve, WireSpec, V2};
