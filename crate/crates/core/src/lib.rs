pub mod asymptotics;
pub mod automorphism;
pub mod cli;
pub mod domain;
pub mod error;
pub mod fefferman;
pub mod kernels;
pub mod metrics;
pub mod quadkernel;
pub mod quadrature;
pub mod summation;
pub mod variational;
