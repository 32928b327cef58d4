//! Entity profiling over multi-source records.
//!
//! Given a partially filled *query* describing a real-world entity, the
//! library associates records from several sources with it using a trained
//! classifier, then picks one value per attribute, weighting each candidate
//! by how closely its source agrees with a user-chosen trusted source.
//!
//! ```
//! use entity_profile::model::{AttributeKind, Schema};
//! use entity_profile::similarity::{EditDistance, SimilarityModel};
//! use entity_profile::model::AttributeValue;
//!
//! let schema = Schema::from_pairs([("name", AttributeKind::Text), ("runs", AttributeKind::Numeric)]).unwrap();
//! let sim = SimilarityModel::new(&schema, &EditDistance);
//! let s = sim.tuples(
//!     &[AttributeValue::text("Gavaskar"), AttributeValue::Number(10122.0)],
//!     &[AttributeValue::text("Gavaskar"), AttributeValue::Missing],
//! );
//! assert_eq!(s, 1.0001);
//! ```

pub mod classify;
pub mod corrupt;
pub mod error;
pub mod eval;
pub mod model;
pub mod pipeline;
pub mod profile;
pub mod similarity;
pub mod sources;

pub use error::{Error, Result};
