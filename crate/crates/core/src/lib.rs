//! Exact adapted optimal transport for finitely supported discrete-time
//! processes given as scenario trees.
//!
//! * [`process`]: trees, path laws and the path metric
//! * [`canonical`]: information states, canonical forms, equivalence
//! * [`ot`] and [`lp`]: classical transport and the simplex behind it
//! * [`bicausal`]: adapted Wasserstein distance, bicausal plans, gluing
//! * [`curves`]: grid curves, geodesics, energies and common-space flows

pub mod bicausal;
pub mod canonical;
pub mod config;
pub mod curves;
pub mod error;
pub mod io;
pub mod lp;
pub mod ot;
pub mod process;
pub mod quantize;

pub use bicausal::{
    aw_distance, aw_distance_lp, aw_value, check_bicausal, check_multicausal, glue, BicausalPlan,
    MulticausalCoupling,
};
pub use canonical::{canonicalize, equivalent, information_process, InfoState};
pub use curves::{
    flow_energy, geodesic, metric_derivative, p_energy, represent_curve, skorokhod,
    verify_flow_ac, weighted_p_variation, CommonSpaceFlow, FlowOptions, GridCurve,
};
pub use error::{Error, Result};
pub use ot::{w_distance, DiscreteLaw, TransportPlan};
pub use process::{path_distance, path_law, validate, PathLaw, RawTree, TreeBuilder, TreeProcess};
pub use quantize::quantize_paths;
