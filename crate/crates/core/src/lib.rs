//! Extended Jaynes-Cummings model toolkit: Pauli decompositions of the
//! Hamiltonian, commuting-family partitions, Trotter schedules with error
//! bounds and cost optimizers, desk-scale state and density-matrix
//! simulation, and fault-tolerant resource budgets.

pub mod bounds;
pub mod dense;
pub mod hamiltonian;
pub mod mixed;
pub mod model;
pub mod partition;
pub mod pauli;
pub mod resources;
pub mod sim;
pub mod trotter;
