#pragma once

#include <Eigen/Dense>
#include <complex>
#include <span>
#include <vector>

#include "qme/basis.hpp"
#include "qme/model.hpp"
#include "qme/spectra.hpp"

namespace qme {

using Operator = Eigen::MatrixXcd;

// Largest chain for which dense operators are built.
inline constexpr int kMaxDenseOperatorSites = 10;

// (A, B) = Tr[A^dagger B] / dim
std::complex<double> hs_inner(const Operator& a, const Operator& b);
double hs_norm(const Operator& a);

// |ket><bra| on the QOS sites of `g`, tensored with the bath identity.
Operator qos_matrix_unit(const Geometry& g, SpinConfiguration ket, SpinConfiguration bra);

// Lanczos chain of the Liouvillian L = [H, .] started from `seed`.
//
// basis[n] are orthonormal under hs_inner; the Liouvillian acts as
//   L S_n = a_n S_n + b_n S_{n-1} + b_{n+1} S_{n+1}
// with b[0] = 0. overlaps[n] = (S_n, target).
struct KrylovChain {
    std::vector<double> a;
    std::vector<double> b;
    std::vector<Operator> basis;  // may be dropped after use; depth() stays valid
    std::vector<std::complex<double>> overlaps;
    double seed_norm = 0.0;
    bool diagonal_terms = true;  // false: a_n forced to zero (two-term recursion)
    bool terminated = false;     // true when the chain closed (b_D below tolerance)

    std::size_t depth() const { return a.size(); }
};

struct LanczosOptions {
    int max_depth = 200;
    double tolerance = 1e-10;
    // Keep the diagonal coefficients a_n = (S_n, L S_n). With false the
    // chain follows the pure two-term recursion and a_n is reported as zero.
    bool diagonal_terms = true;
};

KrylovChain lanczos_chain(const Operator& hamiltonian, const Operator& seed, const Operator& target,
                          const LanczosOptions& options = {});

// Chain amplitudes phi_n(t), defined by S(t) = e^{iLt} S_0 = sum_n i^n phi_n(t) S_n:
//   d/dt phi_n = i a_n phi_n + b_n phi_{n-1} - b_{n+1} phi_{n+1},  phi_n(0) = delta_n0.
// phi(n, j) is phi_n at times[j]. Integrated with classical RK4; the step is
// halved until sum_n |phi_n|^2 stays within 1e-8 of one at every sample.
struct KrylovWavefunction {
    std::vector<double> times;
    Eigen::MatrixXcd phi;
    double step = 0.0;
    double max_norm_error = 0.0;
};

inline constexpr double kPhiNormTolerance = 1e-8;

KrylovWavefunction phi_evolve(const KrylovChain& chain, std::span<const double> times);

// Full-space eigensystem of a Hermitian operator.
struct Eigensystem {
    Eigen::VectorXd energies;
    Eigen::MatrixXcd vectors;
};

Eigensystem eigensystem_of(const Operator& hamiltonian);
// Block eigensystem in the computational basis from per-sector spectra.
Eigensystem eigensystem_of(std::span<const SectorSpectrum> spectra);

// C(t) = Tr[U^dagger(t) S1 U(t) S2] / dim with U(t) = exp(-iHt).
std::vector<std::complex<double>> correlation_direct(const Eigensystem& h, const Operator& s1, const Operator& s2,
                                                     std::span<const double> times);

// Same correlator from a chain seeded with S1^dagger and targeting S2:
//   C(t) = ||S1|| sum_n conj(i^n phi_n(t)) (S_n, S2).
// Seeding with the adjoint makes the Hilbert-Schmidt overlap reproduce the
// trace Tr[S1(t) S2]; for Hermitian S1 it is the plain chain.
std::vector<std::complex<double>> correlation_krylov(const KrylovChain& chain, const KrylovWavefunction& phi);

struct CorrelationPair {
    Operator s1;
    Operator s2;
};

// Operator pairs of the mismatch study: S1 = |ddd><udd| and S2 = |udd><ddd| (q' = 0),
// |uud><udd| (q' = 1), |uuu><uud| (q' = 2) on the first three QOS sites; any
// further QOS sites stay down.
CorrelationPair mismatch_pair(const Geometry& g, int qprime);

struct SuppressionEntry {
    int qprime = 0;
    double max_abs_correlation = 0.0;
    int minimal_depth = -1;  // first n with |c_n| > 1e-10; -1 if none within the chain
    KrylovChain chain;
    std::vector<std::complex<double>> correlation;
};

struct SuppressionReport {
    std::vector<double> times;
    std::vector<SuppressionEntry> entries;
};

inline constexpr double kOverlapThreshold = 1e-10;

SuppressionReport suppression_study(const ModelParams& params, const Geometry& g, std::span<const int> qprimes,
                                    std::span<const double> times, const LanczosOptions& options = {},
                                    unsigned threads = 1);

}  // namespace qme
