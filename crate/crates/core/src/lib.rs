//! Line-level poetry generation with a word-level LSTM, plus the session
//! machinery for a human poet who selects and arranges the generated lines.

pub mod analysis;
pub mod corpus;
pub mod generator;
pub mod model;
pub mod numerics;
pub mod studio;
pub mod trainer;
