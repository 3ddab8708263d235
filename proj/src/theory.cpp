#include "qme/theory.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "qme/errors.hpp"
#include "qme/parallel.hpp"

namespace qme {

namespace {

constexpr Eigen::Index kTimeChunk = 64;

// Rows of the sector eigenvector matrix at embed(qos, b) for every bath
// configuration b of bath sector m.
Eigen::MatrixXd bath_rows(const SectorSpectrum& sp, const Geometry& g, SpinConfiguration qos,
                          const ChargeSector& bath_sector) {
    const auto states = bath_sector.states();
    Eigen::MatrixXd out(static_cast<Eigen::Index>(states.size()), sp.eigenvectors.cols());
    for (std::size_t k = 0; k < states.size(); ++k) {
        const auto full = embed(qos, states[k], g);
        out.row(static_cast<Eigen::Index>(k)) = sp.eigenvectors.row(static_cast<Eigen::Index>(sp.sector.rank(full)));
    }
    return out;
}

// sum_{a in QOS sector n_up} c_a * rows(a).
Eigen::MatrixXcd weighted_rows(const SectorSpectrum& sp, const Geometry& g, const Eigen::VectorXcd& coeffs,
                               int qos_n_up, const ChargeSector& bath_sector) {
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(bath_sector.dimension()),
                                                  sp.eigenvectors.cols());
    const ChargeSector qos_sector(g.qos_size(), qos_n_up);
    for (auto a : qos_sector.states()) {
        const Complex c = coeffs[a.bits];
        if (c == Complex{}) continue;
        out += c * bath_rows(sp, g, a, bath_sector).cast<Complex>();
    }
    return out;
}

std::vector<Complex> evaluate_pairs(const Eigen::MatrixXcd& weights, const Eigen::VectorXd& e1,
                                    const Eigen::VectorXd& e2, std::span<const double> times, double truncation) {
    const auto nt = static_cast<Eigen::Index>(times.size());
    std::vector<Complex> out(times.size(), Complex{});
    if (truncation > 0.0) {
        struct Pair {
            Eigen::Index n1, n2;
            double mag;
        };
        std::vector<Pair> pairs;
        pairs.reserve(static_cast<std::size_t>(weights.size()));
        double total = 0.0;
        for (Eigen::Index n2 = 0; n2 < weights.cols(); ++n2) {
            for (Eigen::Index n1 = 0; n1 < weights.rows(); ++n1) {
                const double mag = std::abs(weights(n1, n2));
                total += mag;
                pairs.push_back({n1, n2, mag});
            }
        }
        std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) { return a.mag < b.mag; });
        double dropped = 0.0;
        std::size_t first = 0;
        while (first < pairs.size() && dropped + pairs[first].mag <= truncation * total) dropped += pairs[first++].mag;
        for (Eigen::Index j = 0; j < nt; ++j) {
            const double t = times[static_cast<std::size_t>(j)];
            Complex s{};
            for (std::size_t p = first; p < pairs.size(); ++p) {
                const auto& q = pairs[p];
                s += weights(q.n1, q.n2) * std::polar(1.0, (e2[q.n2] - e1[q.n1]) * t);
            }
            out[static_cast<std::size_t>(j)] = s;
        }
        return out;
    }

    for (Eigen::Index t0 = 0; t0 < nt; t0 += kTimeChunk) {
        const Eigen::Index chunk = std::min(kTimeChunk, nt - t0);
        Eigen::MatrixXcd phase2(e2.size(), chunk);
        for (Eigen::Index j = 0; j < chunk; ++j) {
            const double t = times[static_cast<std::size_t>(t0 + j)];
            for (Eigen::Index n = 0; n < e2.size(); ++n) phase2(n, j) = std::polar(1.0, e2[n] * t);
        }
        const Eigen::MatrixXcd partial = weights * phase2;
        for (Eigen::Index j = 0; j < chunk; ++j) {
            const double t = times[static_cast<std::size_t>(t0 + j)];
            Complex s{};
            for (Eigen::Index n = 0; n < e1.size(); ++n) s += std::polar(1.0, -e1[n] * t) * partial(n, j);
            out[static_cast<std::size_t>(t0 + j)] = s;
        }
    }
    return out;
}

}  // namespace

double DephasedBath::trace() const { return std::accumulate(occupations.begin(), occupations.end(), 0.0); }

Eigen::MatrixXd DephasedBath::dense() const {
    const Eigen::Index dim = Eigen::Index{1} << num_sites;
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(dim, dim);
    for (Eigen::Index i = 0; i < dim; ++i) {
        const auto q = static_cast<std::size_t>(up_count({static_cast<std::uint32_t>(i)}));
        m(i, i) = occupations[q] / static_cast<double>(dimensions[q]);
    }
    return m;
}

DephasedBath dephased_bath(const PureState& bath) {
    DephasedBath out;
    out.num_sites = bath.num_sites();
    out.occupations = sector_occupations(bath);
    for (int q = 0; q <= bath.num_sites(); ++q) out.dimensions.push_back(binomial(bath.num_sites(), q));
    return out;
}

Eigen::MatrixXd transition_weights(const EvolutionEngine& engine, QosElement element, int m) {
    const Geometry& g = engine.geometry();
    if (m < 0 || m > g.bath_size()) throw ParameterError("bath sector out of range");
    const ChargeSector bath_sector(g.bath_size(), m);
    const auto& s1 = engine.spectrum(up_count(element.row) + m);
    const auto& s2 = engine.spectrum(up_count(element.col) + m);
    const Eigen::MatrixXd a1 = bath_rows(s1, g, element.row, bath_sector);
    const Eigen::MatrixXd a2 = bath_rows(s2, g, element.col, bath_sector);
    return (a1.transpose() * a2).array().square().matrix();
}

OffdiagPrediction predict_offdiagonal(const EvolutionEngine& engine, const Eigen::VectorXcd& qos_coefficients,
                                      const DephasedBath& bath, QosElement element,
                                      std::span<const double> times, const PredictionOptions& options) {
    const Geometry& g = engine.geometry();
    if (qos_coefficients.size() != (Eigen::Index{1} << g.qos_size())) {
        throw ParameterError("QOS coefficient vector does not match the geometry");
    }
    if (bath.num_sites != g.bath_size()) throw ParameterError("dephased bath does not match the geometry");
    const std::uint32_t qos_mask = (1U << g.qos_size()) - 1;
    if ((element.row.bits & ~qos_mask) != 0 || (element.col.bits & ~qos_mask) != 0) {
        throw ParameterError("QOS element outside the QOS basis");
    }

    const int u1 = up_count(element.row);
    const int u2 = up_count(element.col);

    OffdiagPrediction out;
    out.element = element;
    out.times.assign(times.begin(), times.end());
    for (int m = 0; m <= g.bath_size(); ++m) out.m_values.push_back(m);
    out.per_m.assign(out.m_values.size(), std::vector<Complex>(times.size(), Complex{}));

    parallel_for(out.m_values.size(), options.threads, [&](std::size_t k) {
        const int m = out.m_values[k];
        if (!(bath.occupations[static_cast<std::size_t>(m)] > 0.0)) return;
        const ChargeSector bath_sector(g.bath_size(), m);
        const auto& s1 = engine.spectrum(u1 + m);
        const auto& s2 = engine.spectrum(u2 + m);

        // x(n1, n2) = <n2| (|col><row| (x) I_m) |n1>
        const Eigen::MatrixXd x =
            bath_rows(s1, g, element.row, bath_sector).transpose() * bath_rows(s2, g, element.col, bath_sector);
        // w(n1, n2) = <n1| (|psi_S^{u1}><psi_S^{u2}| (x) I_m) |n2>
        const Eigen::MatrixXcd w = weighted_rows(s1, g, qos_coefficients, u1, bath_sector).transpose() *
                                   weighted_rows(s2, g, qos_coefficients, u2, bath_sector).conjugate();
        const double scale = bath.occupations[static_cast<std::size_t>(m)] /
                             static_cast<double>(bath.dimensions[static_cast<std::size_t>(m)]);
        const Eigen::MatrixXcd pair_weights = scale * x.cast<Complex>().cwiseProduct(w);
        out.per_m[k] = evaluate_pairs(pair_weights, s1.eigenvalues, s2.eigenvalues, times, options.truncation);
    });

    out.total.assign(times.size(), Complex{});
    for (const auto& curve : out.per_m) {
        for (std::size_t j = 0; j < curve.size(); ++j) out.total[j] += curve[j];
    }
    return out;
}

std::vector<MTimescale> per_m_timescale(const OffdiagPrediction& prediction, double floor) {
    std::vector<MTimescale> out;
    for (std::size_t k = 0; k < prediction.m_values.size(); ++k) {
        AsymmetryCurve curve{prediction.times, {}, {}};
        curve.values.reserve(prediction.per_m[k].size());
        double peak = 0.0;
        for (const auto& z : prediction.per_m[k]) {
            curve.values.push_back(std::abs(z));
            peak = std::max(peak, std::abs(z));
        }
        if (peak == 0.0) {
            out.push_back({prediction.m_values[k], std::nullopt});
        } else {
            out.push_back({prediction.m_values[k], fit_gaussian_decay(curve, floor)});
        }
    }
    return out;
}

}  // namespace qme
