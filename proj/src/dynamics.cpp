#include "qme/dynamics.hpp"

#include <algorithm>
#include <functional>
#include <optional>
#include <cmath>
#include <random>
#include <string>

#include <Eigen/Eigenvalues>

#include "qme/errors.hpp"
#include "qme/parallel.hpp"

namespace qme {

namespace {

constexpr Eigen::Index kTimeChunk = 32;

std::vector<SectorSpectrum> diagonalize_all(int sites, unsigned threads,
                                            const std::function<SectorHamiltonian(const ChargeSector&)>& build) {
    const auto basis = shared_basis(sites);
    std::vector<std::optional<SectorSpectrum>> slots(static_cast<std::size_t>(basis->sector_count()));
    // Largest sectors first keeps the workers balanced.
    std::vector<int> order(slots.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        return basis->sector(a).dimension() > basis->sector(b).dimension();
    });
    parallel_for(order.size(), threads, [&](std::size_t i) {
        const int n = order[i];
        slots[static_cast<std::size_t>(n)] = diagonalize_sector(build(basis->sector(n)));
    });
    std::vector<SectorSpectrum> out;
    out.reserve(slots.size());
    for (auto& s : slots) out.push_back(std::move(*s));
    return out;
}

PureState evolve_with(std::span<const SectorSpectrum> spectra, const PureState& psi, double t) {
    if (static_cast<int>(spectra.size()) != psi.basis().sector_count()) {
        throw ParameterError("state and engine describe different chains");
    }
    std::vector<Eigen::VectorXcd> blocks;
    blocks.reserve(spectra.size());
    for (std::size_t n = 0; n < spectra.size(); ++n) {
        const auto& sp = spectra[n];
        const Eigen::VectorXcd& in = psi.block(static_cast<int>(n));
        if (in.squaredNorm() == 0.0) {
            blocks.push_back(in);
            continue;
        }
        const Eigen::VectorXd re = sp.eigenvectors.transpose() * in.real();
        const Eigen::VectorXd im = sp.eigenvectors.transpose() * in.imag();
        Eigen::VectorXd pr(re.size()), pi(re.size());
        for (Eigen::Index k = 0; k < re.size(); ++k) {
            const Complex c = Complex(re[k], im[k]) * std::polar(1.0, -sp.eigenvalues[k] * t);
            pr[k] = c.real();
            pi[k] = c.imag();
        }
        Eigen::VectorXcd out(re.size());
        out.real() = sp.eigenvectors * pr;
        out.imag() = sp.eigenvectors * pi;
        blocks.push_back(std::move(out));
    }
    return PureState(psi.basis_ptr(), std::move(blocks));
}

}  // namespace

DensityDiagnostics diagnose(const DensityMatrix& rho) {
    DensityDiagnostics d{};
    d.hermiticity = (rho.entries - rho.entries.adjoint()).cwiseAbs().maxCoeff();
    d.trace_error = std::abs(rho.entries.trace() - Complex(1.0, 0.0));
    const Eigen::MatrixXcd herm = 0.5 * (rho.entries + rho.entries.adjoint());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(herm, Eigen::EigenvaluesOnly);
    d.min_eigenvalue = solver.eigenvalues().minCoeff();
    return d;
}

EvolutionEngine::EvolutionEngine(ModelParams params, Geometry geometry, unsigned threads)
    : params_(params), geometry_(std::move(geometry)) {
    params_.validate();
    if (geometry_.num_sites() != params_.L) {
        throw ParameterError("geometry has " + std::to_string(geometry_.num_sites()) +
                             " sites but the model has L = " + std::to_string(params_.L));
    }
    spectra_ = diagonalize_all(params_.L, threads,
                               [&](const ChargeSector& s) { return build_sector_hamiltonian(params_, s); });
    bath_spectra_ = diagonalize_all(geometry_.bath_size(), threads, [&](const ChargeSector& s) {
        return build_bath_hamiltonian(params_, geometry_, s);
    });
}

PureState evolve(const EvolutionEngine& engine, const PureState& psi, double t) {
    return evolve_with(engine.spectra(), psi, t);
}

PureState evolve_bath(const EvolutionEngine& engine, const PureState& bath, double t) {
    return evolve_with(engine.bath_spectra(), bath, t);
}

void EnsembleSpec::validate() const {
    if (n_samples < 1) throw ParameterError("ensemble needs at least one sample");
    if (!(dt_min >= 0.0) || !(dt_max >= dt_min)) {
        throw ParameterError("ensemble needs 0 <= dt_min <= dt_max");
    }
}

double EnsembleSpec::sample_dt(int k) const {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(k)};
    std::mt19937_64 gen(seq);
    const double u = static_cast<double>(gen() >> 11) * 0x1.0p-53;
    return dt_min + (dt_max - dt_min) * u;
}

PureState pre_thermalize(const EvolutionEngine& engine, const PureState& qtb, const EnsembleSpec& e, int k) {
    e.validate();
    if (k < 0 || k >= e.n_samples) throw ParameterError("sample index outside the ensemble");
    return evolve_bath(engine, qtb, e.sample_dt(k));
}

DensityMatrix reduced_density_matrix(const PureState& psi, const Geometry& g) {
    if (psi.num_sites() != g.num_sites()) throw ParameterError("state and geometry disagree on L");
    const Eigen::Index qdim = Eigen::Index{1} << g.qos_size();
    const Eigen::Index bdim = Eigen::Index{1} << g.bath_size();
    Eigen::MatrixXcd amp = Eigen::MatrixXcd::Zero(qdim, bdim);
    for (int n = 0; n < psi.basis().sector_count(); ++n) {
        const auto states = psi.basis().sector(n).states();
        const auto& block = psi.block(n);
        for (std::size_t k = 0; k < states.size(); ++k) {
            const auto [a, b] = split(states[k], g);
            amp(a.bits, b.bits) = block[static_cast<Eigen::Index>(k)];
        }
    }
    return {amp * amp.adjoint()};
}

std::vector<double> make_time_grid(double t_max, int n_points) {
    if (n_points < 1 || !(t_max >= 0.0)) throw ParameterError("time grid needs n_points >= 1 and t_max >= 0");
    std::vector<double> t(static_cast<std::size_t>(n_points));
    for (int i = 0; i < n_points; ++i) t[i] = n_points == 1 ? 0.0 : t_max * i / (n_points - 1);
    return t;
}

std::vector<DensityMatrix> reduced_trajectory(const EvolutionEngine& engine, const PureState& psi,
                                              std::span<const double> times) {
    const Geometry& g = engine.geometry();
    if (psi.num_sites() != g.num_sites()) throw ParameterError("state and engine disagree on L");
    const Eigen::Index qdim = Eigen::Index{1} << g.qos_size();
    const Eigen::Index bdim = Eigen::Index{1} << g.bath_size();

    struct SectorWork {
        int n_up;
        Eigen::VectorXd coeff_re, coeff_im;
        std::vector<std::pair<std::uint32_t, std::uint32_t>> splits;
    };
    std::vector<SectorWork> work;
    for (int n = 0; n < psi.basis().sector_count(); ++n) {
        const auto& block = psi.block(n);
        if (block.squaredNorm() == 0.0) continue;
        const auto& sp = engine.spectrum(n);
        SectorWork w{n, sp.eigenvectors.transpose() * block.real(), sp.eigenvectors.transpose() * block.imag(), {}};
        const auto states = psi.basis().sector(n).states();
        w.splits.reserve(states.size());
        for (auto c : states) {
            const auto [a, b] = split(c, g);
            w.splits.emplace_back(a.bits, b.bits);
        }
        work.push_back(std::move(w));
    }

    const auto nt = static_cast<Eigen::Index>(times.size());
    std::vector<DensityMatrix> out(times.size());
    for (Eigen::Index t0 = 0; t0 < nt; t0 += kTimeChunk) {
        const Eigen::Index chunk = std::min(kTimeChunk, nt - t0);
        std::vector<Eigen::MatrixXcd> amp(static_cast<std::size_t>(chunk), Eigen::MatrixXcd::Zero(qdim, bdim));
        for (const auto& w : work) {
            const auto& sp = engine.spectrum(w.n_up);
            const Eigen::Index dim = w.coeff_re.size();
            Eigen::MatrixXd pr(dim, chunk), pi(dim, chunk);
            for (Eigen::Index j = 0; j < chunk; ++j) {
                const double t = times[static_cast<std::size_t>(t0 + j)];
                for (Eigen::Index k = 0; k < dim; ++k) {
                    const Complex c = Complex(w.coeff_re[k], w.coeff_im[k]) * std::polar(1.0, -sp.eigenvalues[k] * t);
                    pr(k, j) = c.real();
                    pi(k, j) = c.imag();
                }
            }
            const Eigen::MatrixXd re = sp.eigenvectors * pr;
            const Eigen::MatrixXd im = sp.eigenvectors * pi;
            for (Eigen::Index j = 0; j < chunk; ++j) {
                auto& m = amp[static_cast<std::size_t>(j)];
                for (std::size_t k = 0; k < w.splits.size(); ++k) {
                    const auto r = static_cast<Eigen::Index>(k);
                    m(w.splits[k].first, w.splits[k].second) = Complex(re(r, j), im(r, j));
                }
            }
        }
        for (Eigen::Index j = 0; j < chunk; ++j) {
            const auto& m = amp[static_cast<std::size_t>(j)];
            out[static_cast<std::size_t>(t0 + j)] = DensityMatrix{m * m.adjoint()};
        }
    }
    return out;
}

std::vector<DensityMatrix> ensemble_reduced(const EvolutionEngine& engine, const PureState& qos,
                                            const PureState& qtb, const EnsembleSpec& e,
                                            std::span<const double> times, unsigned threads) {
    e.validate();
    const auto n = static_cast<std::size_t>(e.n_samples);
    std::vector<std::vector<DensityMatrix>> samples(n);
    parallel_for(n, threads, [&](std::size_t k) {
        const PureState bath = pre_thermalize(engine, qtb, e, static_cast<int>(k));
        samples[k] = reduced_trajectory(engine, compose_full_state(qos, bath, engine.geometry()), times);
    });

    std::vector<DensityMatrix> avg = std::move(samples[0]);
    for (std::size_t k = 1; k < n; ++k) {
        for (std::size_t j = 0; j < avg.size(); ++j) avg[j].entries += samples[k][j].entries;
    }
    const double scale = 1.0 / static_cast<double>(n);
    for (auto& rho : avg) rho.entries *= scale;
    return avg;
}

std::vector<DensityMatrix> ensemble_reduced(const EvolutionEngine& engine, double theta_s, double theta_b,
                                            const EnsembleSpec& e, std::span<const double> times,
                                            unsigned threads) {
    const Geometry& g = engine.geometry();
    return ensemble_reduced(engine, qos_initial_state(theta_s, g.qos_size()),
                            bath_initial_state(theta_b, g.bath_size()), e, times, threads);
}

}  // namespace qme
