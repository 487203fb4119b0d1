pub mod engines;
pub mod environment;
pub mod gates;
pub mod observer;
pub mod probe;
pub mod qcore;
pub mod quadrature;
pub mod statistics;
pub mod toolkit;
