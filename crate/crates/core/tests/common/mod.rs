#![allow(dead_code)]

pub mod dp_oracle;
pub mod panels;
pub mod static_oracle;
pub mod twfe_oracle;
