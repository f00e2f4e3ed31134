//! Verblunsky coefficients, the Szegő recursion, and exact moment identities
//! relating the α-law to the Gaussian law of the boundary field.

pub mod alpha;
pub mod combinatorics;
pub mod exact;
pub mod gaussian;
pub mod graph;
pub mod montecarlo;
pub mod opuc;
pub mod report;
pub mod series;
