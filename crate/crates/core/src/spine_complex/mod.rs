//! Posets, simplicial complexes and their homology, and the finite pieces of
//! the spine built from graph types and marked graphs.

mod collapse;
mod complex;
mod homology;
mod marked;
mod poset;
mod types;

pub use collapse::{collapsible, CollapseReport};
pub use complex::SimplicialComplex;
pub use homology::{
    homology, rational_rank, smith_diagonal, HomologyEngine, HomologyReport, RationalEngine,
    SmithEngine,
};
pub use marked::{for_each_isomorphism, spine_ball, BallConfig, MarkedBall, Marking};
pub use poset::Poset;
pub use types::{
    blow_up_family, collapse_poset, downset_poset, ideal_edge_label, link_complexes,
    poset_retract, small_spine, star_of_rose, RetractReport, Star, TypePoset,
};
