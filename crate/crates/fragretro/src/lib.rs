//! Fragment-based retrosynthetic analysis.
//!
//! A target molecule is decomposed into fragments by cutting rule-selected
//! acyclic bonds, then a staged search looks for ways to cover the fragment
//! set with combinations that are substructures of purchasable building
//! blocks. The result is the set of all such partitions ("solutions"), each
//! pairing a combination with the stock entries that matched it.

pub mod elements;
pub mod engine;
pub mod fragmenter;
pub mod matcher;
pub mod molgraph;
pub mod oracle;
pub mod screen;
pub mod stock;
pub mod synth;
