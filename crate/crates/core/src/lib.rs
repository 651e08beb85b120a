//! Synthetic bank-statement / loan-application pairs, extraction agents,
//! dual-agent cross-verification, and accuracy and cost scoring.

pub mod agents;
pub mod corpus;
pub mod cost;
pub mod datagen;
pub mod documents;
pub mod domain;
pub mod evaluate;
pub mod par;
pub mod prompts;
