pub mod approval;
pub mod attack;
pub mod blossom;
pub mod cover;
pub mod election;
pub mod error;
pub mod gen;
pub mod graph;
pub mod matching;
pub mod oracles;
pub mod problem;
pub mod rx3c;
pub mod veto;
