pub mod analysis;
pub mod corpus;
pub mod distinct;
pub mod embeddings;
pub mod features;
pub mod reddit;
pub mod report;
pub mod sentiment;
pub mod stats;
pub mod synth;
pub mod textprep;
