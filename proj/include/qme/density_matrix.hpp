#pragma once

#include <Eigen/Dense>

namespace qme {

// Hermitian, positive semidefinite, unit-trace matrix over the computational
// basis of a small subsystem (index = local bit word).
struct DensityMatrix {
    Eigen::MatrixXcd entries;

    Eigen::Index dim() const { return entries.rows(); }
};

// Largest deviations from the density-matrix invariants.
struct DensityDiagnostics {
    double hermiticity;      // max |rho - rho^dagger|
    double trace_error;      // |tr rho - 1|
    double min_eigenvalue;
};

DensityDiagnostics diagnose(const DensityMatrix& rho);

}  // namespace qme
