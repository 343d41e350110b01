//! Entropy and mutual-information estimation on classical outcomes, the
//! Möbius subset-lattice decomposition of label information, label
//! permutation tests and stratified bootstrap intervals.

mod bootstrap;
mod entropy;
mod mobius;
mod permutation;
mod records;

pub use bootstrap::{bootstrap_ci, percentile};
pub use entropy::{
    entropy_with_ci, miller_madow_entropy, mutual_information, plugin_entropy, plugin_entropy_of,
    plugin_mutual_information, DiscreteDistribution, EntropyEstimate, MutualInformation,
};
pub use mobius::{mobius_atoms, mobius_triplet_atom, MobiusAtoms};
pub use permutation::{permutation_test, Labeled, PermutationTestResult};
pub use records::{RecordSet, RecordStatistic, ShotRecord};
