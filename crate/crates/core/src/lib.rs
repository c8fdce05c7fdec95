//! Network-based misinformation detection and mitigation.
//!
//! The crate is organised around six typed networks ([`graph`]) shared by
//! detection methods and mitigation methods:
//!
//! * [`embed`]: joint nonnegative factorization of the publisher/news/user
//!   interaction network, plus a ridge classifier on news factors.
//! * [`seqrep`]: engagement-sequence features and a tanh recurrent encoder.
//! * [`social`]: first/second-order proximity embeddings and
//!   community-preserving factorization of the friendship graph.
//! * [`credprop`]: signed credibility propagation over post networks.
//! * [`kgcheck`]: knowledge-graph fact checking by path specificity and
//!   min-cost max-flow knowledge streams.
//! * [`stance`]: semi-supervised Beta aggregation of like actions.
//! * [`mitigate`]: provenance paths, persuaders, audience size, cascade
//!   blocking and Hawkes mitigation campaigns.
//!
//! [`harness`] ties everything together behind the `misinfo-netkit` binary.
//! Every stochastic routine takes an explicit seed.

pub mod credprop;
pub mod embed;
pub mod graph;
pub mod harness;
pub mod io;
pub mod kgcheck;
pub mod linalg;
pub mod mitigate;
pub mod seqrep;
pub mod social;
pub mod stance;

pub use graph::NetworkBundle;
