#include "qme/krylov.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCore>
#include <algorithm>
#include <cmath>
#include <string>

#include "qme/errors.hpp"
#include "qme/parallel.hpp"

namespace qme {

namespace {

using Complex = std::complex<double>;
using SparseOperator = Eigen::SparseMatrix<Complex>;

constexpr double kStepScale = 0.02;  // RK4 step * ||generator|| to start from
constexpr int kMaxStepHalvings = 10;

void check_same_shape(const Operator& a, const Operator& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols() || a.rows() != a.cols()) {
        throw ParameterError("operators must be square and of equal dimension");
    }
}

Operator commutator(const SparseOperator& h, const Operator& s) {
    Operator out = h * s;
    out -= s * h;
    return out;
}

void subtract_projection(Operator& a, const std::vector<Operator>& basis) {
    for (const auto& s : basis) a -= hs_inner(s, a) * s;
}

}  // namespace

Complex hs_inner(const Operator& a, const Operator& b) {
    check_same_shape(a, b);
    return a.conjugate().cwiseProduct(b).sum() / static_cast<double>(a.rows());
}

double hs_norm(const Operator& a) { return std::sqrt(a.squaredNorm() / static_cast<double>(a.rows())); }

Operator qos_matrix_unit(const Geometry& g, SpinConfiguration ket, SpinConfiguration bra) {
    if (g.num_sites() > kMaxDenseOperatorSites) {
        throw ParameterError("dense operators are limited to L <= " + std::to_string(kMaxDenseOperatorSites));
    }
    const std::uint32_t mask = (1U << g.qos_size()) - 1;
    if ((ket.bits & ~mask) != 0 || (bra.bits & ~mask) != 0) throw ParameterError("matrix unit outside the QOS basis");
    const Eigen::Index dim = Eigen::Index{1} << g.num_sites();
    Operator op = Operator::Zero(dim, dim);
    for (std::uint32_t b = 0; b < (1U << g.bath_size()); ++b) {
        op(embed(ket, {b}, g).bits, embed(bra, {b}, g).bits) = 1.0;
    }
    return op;
}

KrylovChain lanczos_chain(const Operator& hamiltonian, const Operator& seed, const Operator& target,
                          const LanczosOptions& options) {
    check_same_shape(hamiltonian, seed);
    check_same_shape(seed, target);
    if (options.max_depth < 1) throw ParameterError("Lanczos depth must be at least 1");
    const double seed_norm = hs_norm(seed);
    if (!(seed_norm > 0.0)) throw ParameterError("Lanczos seed operator is zero");

    const SparseOperator h = hamiltonian.sparseView(1.0, 1e-14);
    KrylovChain chain;
    chain.seed_norm = seed_norm;
    chain.diagonal_terms = options.diagonal_terms;
    chain.b.push_back(0.0);
    chain.basis.push_back(seed / seed_norm);

    for (int n = 0;; ++n) {
        const Operator& current = chain.basis.back();
        chain.overlaps.push_back(hs_inner(current, target));
        Operator next = commutator(h, current);
        const double a_n = options.diagonal_terms ? hs_inner(current, next).real() : 0.0;
        chain.a.push_back(a_n);
        if (n + 1 >= options.max_depth) break;

        next -= a_n * current;
        if (n > 0) next -= chain.b[static_cast<std::size_t>(n)] * chain.basis[static_cast<std::size_t>(n) - 1];
        if (options.diagonal_terms) {
            // Two passes of classical Gram-Schmidt keep the basis orthonormal
            // to working precision.
            subtract_projection(next, chain.basis);
            subtract_projection(next, chain.basis);
        }
        const double b_next = hs_norm(next);
        if (b_next <= options.tolerance) {
            chain.terminated = true;
            break;
        }
        chain.b.push_back(b_next);
        chain.basis.push_back(next / b_next);
    }
    return chain;
}

KrylovWavefunction phi_evolve(const KrylovChain& chain, std::span<const double> times) {
    const auto depth = static_cast<Eigen::Index>(chain.a.size());
    if (depth == 0) throw ParameterError("empty Krylov chain");
    for (std::size_t j = 1; j < times.size(); ++j) {
        if (times[j] < times[j - 1]) throw ParameterError("phi_evolve needs nondecreasing times");
    }

    const auto a = Eigen::Map<const Eigen::VectorXd>(chain.a.data(), depth);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(depth + 1);  // b[n] couples n-1 and n; b[depth] = 0
    for (Eigen::Index n = 1; n < depth; ++n) b[n] = chain.b[static_cast<std::size_t>(n)];
    const double scale = a.cwiseAbs().maxCoeff() + 2.0 * b.maxCoeff();

    const auto rhs = [&](const Eigen::VectorXcd& phi) {
        Eigen::VectorXcd d(depth);
        for (Eigen::Index n = 0; n < depth; ++n) {
            Complex v = Complex(0.0, a[n]) * phi[n];
            if (n > 0) v += b[n] * phi[n - 1];
            if (n + 1 < depth) v -= b[n + 1] * phi[n + 1];
            d[n] = v;
        }
        return d;
    };

    double h_max = scale > 0.0 ? kStepScale / scale : 1.0;
    for (int attempt = 0; attempt <= kMaxStepHalvings; ++attempt, h_max *= 0.5) {
        KrylovWavefunction out;
        out.times.assign(times.begin(), times.end());
        out.phi.resize(depth, static_cast<Eigen::Index>(times.size()));
        out.step = h_max;
        Eigen::VectorXcd phi = Eigen::VectorXcd::Zero(depth);
        phi[0] = 1.0;
        double t = 0.0;
        for (std::size_t j = 0; j < times.size(); ++j) {
            const double span = times[j] - t;
            if (span > 0.0) {
                const auto steps = static_cast<long>(std::ceil(span / h_max));
                const double h = span / static_cast<double>(steps);
                for (long s = 0; s < steps; ++s) {
                    const Eigen::VectorXcd k1 = rhs(phi);
                    const Eigen::VectorXcd k2 = rhs(phi + 0.5 * h * k1);
                    const Eigen::VectorXcd k3 = rhs(phi + 0.5 * h * k2);
                    const Eigen::VectorXcd k4 = rhs(phi + h * k3);
                    phi += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
                }
                t = times[j];
            }
            out.phi.col(static_cast<Eigen::Index>(j)) = phi;
            out.max_norm_error = std::max(out.max_norm_error, std::abs(phi.squaredNorm() - 1.0));
        }
        if (out.max_norm_error < kPhiNormTolerance) return out;
    }
    throw NumericalError("Krylov amplitude integration could not hold the norm to 1e-8");
}

Eigensystem eigensystem_of(const Operator& hamiltonian) {
    Eigen::SelfAdjointEigenSolver<Operator> solver(hamiltonian);
    if (solver.info() != Eigen::Success) throw NumericalError("full-space eigensolver did not converge");
    return {solver.eigenvalues(), solver.eigenvectors()};
}

Eigensystem eigensystem_of(std::span<const SectorSpectrum> spectra) {
    if (spectra.empty()) throw ParameterError("no sector spectra supplied");
    const int sites = spectra.front().sector.num_sites();
    const Eigen::Index dim = Eigen::Index{1} << sites;
    Eigensystem out{Eigen::VectorXd(dim), Operator::Zero(dim, dim)};
    Eigen::Index offset = 0;
    for (const auto& sp : spectra) {
        const auto states = sp.sector.states();
        const auto d = static_cast<Eigen::Index>(sp.dimension());
        out.energies.segment(offset, d) = sp.eigenvalues;
        for (Eigen::Index r = 0; r < d; ++r) {
            out.vectors.block(states[static_cast<std::size_t>(r)].bits, offset, 1, d) =
                sp.eigenvectors.row(r).cast<Complex>();
        }
        offset += d;
    }
    if (offset != dim) throw ParameterError("sector spectra do not cover the full space");
    return out;
}

std::vector<Complex> correlation_direct(const Eigensystem& h, const Operator& s1, const Operator& s2,
                                        std::span<const double> times) {
    check_same_shape(s1, s2);
    if (s1.rows() != h.vectors.rows()) throw ParameterError("operators and eigensystem differ in dimension");
    const Operator e1 = h.vectors.adjoint() * s1 * h.vectors;
    const Operator e2 = h.vectors.adjoint() * s2 * h.vectors;
    const Operator weights = e1.cwiseProduct(e2.transpose());
    const double inv_dim = 1.0 / static_cast<double>(s1.rows());

    std::vector<Complex> out;
    out.reserve(times.size());
    for (double t : times) {
        Eigen::VectorXcd u(h.energies.size()), v(h.energies.size());
        for (Eigen::Index k = 0; k < h.energies.size(); ++k) {
            u[k] = std::polar(1.0, h.energies[k] * t);
            v[k] = std::conj(u[k]);
        }
        out.push_back(u.cwiseProduct(weights * v).sum() * inv_dim);
    }
    return out;
}

std::vector<Complex> correlation_krylov(const KrylovChain& chain, const KrylovWavefunction& phi) {
    const auto depth = static_cast<Eigen::Index>(chain.a.size());
    if (phi.phi.rows() != depth) throw ParameterError("wavefunction and chain differ in depth");
    std::vector<Complex> out(phi.times.size());
    for (std::size_t j = 0; j < out.size(); ++j) {
        Complex s{};
        Complex i_pow{1.0, 0.0};
        for (Eigen::Index n = 0; n < depth; ++n) {
            s += std::conj(i_pow * phi.phi(n, static_cast<Eigen::Index>(j))) * chain.overlaps[static_cast<std::size_t>(n)];
            i_pow *= Complex(0.0, 1.0);
        }
        out[j] = chain.seed_norm * s;
    }
    return out;
}

CorrelationPair mismatch_pair(const Geometry& g, int qprime) {
    if (g.qos_size() < 3) throw ParameterError("mismatch pairs need at least three QOS sites");
    // bit k = k-th QOS site; ddd = 0, udd = 1, uud = 3, uuu = 7
    const SpinConfiguration ddd{0}, udd{1}, uud{3}, uuu{7};
    Operator s1 = qos_matrix_unit(g, ddd, udd);
    switch (qprime) {
        case 0: return {std::move(s1), qos_matrix_unit(g, udd, ddd)};
        case 1: return {std::move(s1), qos_matrix_unit(g, uud, udd)};
        case 2: return {std::move(s1), qos_matrix_unit(g, uuu, uud)};
        default: throw ParameterError("q' must be 0, 1 or 2");
    }
}

SuppressionReport suppression_study(const ModelParams& params, const Geometry& g, std::span<const int> qprimes,
                                    std::span<const double> times, const LanczosOptions& options,
                                    unsigned threads) {
    if (params.L > kMaxDenseOperatorSites) {
        throw ParameterError("suppression study uses dense operators; L <= " +
                             std::to_string(kMaxDenseOperatorSites) + " required");
    }
    if (g.num_sites() != params.L) throw ParameterError("geometry and model disagree on L");
    const Operator h = assemble_full_hamiltonian(params).cast<Complex>();

    std::vector<SectorSpectrum> spectra;
    const SectorBasis basis(params.L);
    for (int n = 0; n <= params.L; ++n) spectra.push_back(diagonalize_sector(build_sector_hamiltonian(params, basis.sector(n))));
    const Eigensystem eig = eigensystem_of(spectra);

    SuppressionReport report;
    report.times.assign(times.begin(), times.end());
    report.entries.resize(qprimes.size());
    parallel_for(qprimes.size(), threads, [&](std::size_t k) {
        auto& entry = report.entries[k];
        entry.qprime = qprimes[k];
        const auto pair = mismatch_pair(g, entry.qprime);
        entry.correlation = correlation_direct(eig, pair.s1, pair.s2, times);
        for (const auto& c : entry.correlation) entry.max_abs_correlation = std::max(entry.max_abs_correlation, std::abs(c));
        entry.chain = lanczos_chain(h, pair.s1.adjoint(), pair.s2, options);
        entry.chain.basis.clear();
        entry.chain.basis.shrink_to_fit();
        for (std::size_t n = 0; n < entry.chain.overlaps.size(); ++n) {
            if (std::abs(entry.chain.overlaps[n]) > kOverlapThreshold) {
                entry.minimal_depth = static_cast<int>(n);
                break;
            }
        }
    });
    return report;
}

}  // namespace qme
