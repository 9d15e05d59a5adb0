//! Ranking of candidate table programs by learned question/paraphrase
//! similarity.
//!
//! The pipeline: candidate logical forms are executed on a table to label
//! them against the gold answer, turned into readable paraphrases, embedded
//! together with the question by convolutional encoders, and ranked by a
//! similarity head trained with a pairwise hinge loss.

pub mod harness;
pub mod lambda_dcs;
pub mod nn;
pub mod par;
pub mod paraphrase;
pub mod synthetic;
pub mod table;
pub mod training;
