//! Independent reference implementations shared by the test suites.
#![allow(dead_code)]

pub mod aghq;
pub mod corpus;
pub mod sim;
pub mod stats;
