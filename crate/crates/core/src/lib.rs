//! Gate-scheduling toolkit: flight conflict graphs, QAP/QUBO models, diagonal
//! Ising Hamiltonians under one-hot and binary color encodings, a statevector
//! VQE with SPSA/COBYLA optimizers, and exhaustive classical oracles.

pub mod bits;
pub mod cli;
pub mod hamiltonian;
pub mod optim;
pub mod oracle;
pub mod qap;
pub mod schedule;
pub mod simulator;
pub mod vqe;
