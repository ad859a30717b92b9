#![allow(dead_code)]

pub mod cfg;
pub mod dice;
pub mod fixtures;
pub mod props;
