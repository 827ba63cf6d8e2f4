//! Adaptive oracle-efficient follow-the-perturbed-leader.
//!
//! * [`game`]: experts, adversary actions and bounded losses.
//! * [`ptm`]: perturbation translation matrices and their certification.
//! * [`perturbation`]: noise families and the expected-maximum bound.
//! * [`oracle`]: the offline optimization oracle and implementability.
//! * [`algorithms`]: FTL, FTPL, GFTPL (direct and oracle-based) and OFF.
//! * [`level_auction`]: the level-auction environment and its PTM.
//! * [`simulation`]: seeded environments, runs, probes and aggregation.

pub mod algorithms;
pub mod game;
pub mod level_auction;
pub mod oracle;
pub mod perturbation;
pub mod ptm;
pub mod rng;
pub mod simulation;
