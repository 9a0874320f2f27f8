//! Generators for the two counterexample datasets: the block construction
//! with its max-rule weight (`s5`) and the interval system with its min-rule
//! weight and residual set (`s6`).

pub mod s5;
pub mod s6;
