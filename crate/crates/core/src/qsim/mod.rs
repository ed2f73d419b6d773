//! Exact small-system quantum oracles: the electron to nuclear-ensemble
//! transfer and the noisy swapping circuit on a density-matrix register.

mod density;
mod swap;
mod transfer;

pub use density::{
    apply_cz, bell_fidelity, depolarizing_parameter, process_fidelity, Bell, DensityMatrix, Gate1,
    HADAMARD, IDENTITY, MAX_QUBITS, PAULIS, PAULI_X, PAULI_Y, PAULI_Z,
};
pub use swap::{
    averaged_swap_fidelity, chain_fidelity_oracle, swap_branches, swap_entanglement, ChainComponents,
    SwapBranch, SwapNoise, OUTCOMES,
};
pub use transfer::{
    build_flipflop_hamiltonian, collective_index, evolve_transfer, full_space_oracle, Basis, PureState,
    TransferParams, MAX_COLLECTIVE_NUCLEI, MAX_FULL_NUCLEI,
};
