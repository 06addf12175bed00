#![allow(dead_code)]

pub mod collision_oracle;
pub mod qp_oracle;
pub mod rs_oracle;
pub mod tracking;
