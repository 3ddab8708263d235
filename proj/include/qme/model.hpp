#pragma once

#include <Eigen/Dense>
#include <span>

#include "qme/basis.hpp"

namespace qme {

// Long-range XY chain with a linear longitudinal field:
//   H = sum_{i<j} J/|i-j| (X_i X_j + Y_i Y_j) + h sum_i (i - L/2) Z_i
// with open boundaries and hbar = 1.
struct ModelParams {
    double J = 1.0;
    double h = 0.2;
    int L = 15;

    void validate() const;
};

struct SectorHamiltonian {
    ChargeSector sector;
    Eigen::MatrixXd matrix;
};

// Block of H restricted to one charge sector of the full chain.
SectorHamiltonian build_sector_hamiltonian(const ModelParams& p, const ChargeSector& s);

// Block of the bath-only Hamiltonian. `s` is a sector over the bath sites;
// couplings and the field use the original full-chain site positions.
SectorHamiltonian build_bath_hamiltonian(const ModelParams& p, const Geometry& g,
                                         const ChargeSector& s);

// General form: spins sit at the given 1-indexed chain positions of an
// L = p.L chain. Local bit k of the sector refers to positions[k].
SectorHamiltonian build_hamiltonian_on_sites(const ModelParams& p, std::span<const int> positions,
                                             const ChargeSector& s);

// Dense 2^L x 2^L matrix assembled from the sector blocks.
Eigen::MatrixXd assemble_full_hamiltonian(const ModelParams& p);

}  // namespace qme
