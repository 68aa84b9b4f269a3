//! Few-shot time-complexity prediction for Python and Java snippets.

pub mod augment;
pub mod class;
pub mod classifier;
pub mod cli;
pub mod corpus;
pub mod dataset;
pub mod frontend;
pub mod metrics;
pub mod process;
pub mod ssl;
pub mod symbolic;

pub use class::{ClassSet, ComplexityClass};
pub use dataset::{CodeSnippet, Dataset, LabeledExample, Language, UnlabeledExample};
