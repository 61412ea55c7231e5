pub mod cli;
pub mod doc;
pub mod error;
pub mod graph;
pub mod io;
pub mod metrics;
pub mod projection;
pub mod pursuit;
pub mod results;
pub mod rsc;
pub mod score;
pub mod synth;
pub mod util;

pub use error::{Error, Result};
pub use graph::{AttributeSubset, AttributedNetwork, IndexSet, NodeSubset};
