pub mod automorphisms;
pub mod blowup;
pub mod error;
pub mod index;
pub mod rays;
pub mod traintrack;
pub mod words;

pub use automorphisms::{make_alpha, make_alpha_inverse, positivity_basis, x0_basis_change, Automorphism, AutomorphismJson};
pub use blowup::{iwip_certificate, BlowupGraph, Flag, IwipCertificate, Verdict};
pub use error::{Error, Result};
pub use index::{
    check_4n_bound, check_gjll, classify_parageometric, index_of, ClassContribution, Classification, IndexReport,
    Rational, Side,
};
pub use rays::{build_inventory, build_inventory_for_power, FixedPointInventory, Ray, DEFAULT_DEPTH};
pub use traintrack::{find_inps, find_periodic_inps, fixed_subgroup_trivial, InpMode, InpSearch, RoseTrainTrack, TransitionMatrix};
pub use words::{Basis, BasisChange, Letter, ReducedWord};
