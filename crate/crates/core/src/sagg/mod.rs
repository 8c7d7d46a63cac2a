//! Higher level of the goal-babbling learner: how well goals are reached,
//! where progress happens, and which goal to try next.

pub mod competence;
pub mod goals;
pub mod tree;

pub use competence::{competence, competence_from_similarity, similarity, CompetenceParams};
pub use goals::{generate_goal, select_index, select_region, selection_probabilities, GoalModes};
pub use tree::{best_cut, candidate_cuts, interest_of, Cut, GoalAttempt, InterestParams, Region, RegionTree, SplitRecord};
