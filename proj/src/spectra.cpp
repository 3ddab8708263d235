#include "qme/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include <Eigen/Eigenvalues>

#include "qme/errors.hpp"

namespace qme {

SectorSpectrum diagonalize_sector(const SectorHamiltonian& h) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(h.matrix);
    if (solver.info() != Eigen::Success) {
        throw NumericalError("eigensolver did not converge in sector n_up = " +
                             std::to_string(h.sector.n_up()) + " (L = " +
                             std::to_string(h.sector.num_sites()) + ")");
    }
    return {h.sector, solver.eigenvalues(), solver.eigenvectors()};
}

double population_variance(const Eigen::Ref<const Eigen::VectorXd>& values) {
    if (values.size() == 0) return 0.0;
    const double mean = values.mean();
    return (values.array() - mean).square().mean();
}

double sector_energy_variance(const SectorSpectrum& sp) { return population_variance(sp.eigenvalues); }

std::size_t GapHistogram::total_count() const {
    return std::accumulate(count.begin(), count.end(), std::size_t{0});
}

GapHistogram gap_histogram(const SectorSpectrum& a, const SectorSpectrum& b, double bin_width,
                           const Eigen::MatrixXd* weights) {
    if (!(bin_width > 0.0)) throw ParameterError("gap histogram bin width must be positive");
    const Eigen::Index na = a.eigenvalues.size();
    const Eigen::Index nb = b.eigenvalues.size();
    if (weights != nullptr && (weights->rows() != na || weights->cols() != nb)) {
        throw ParameterError("pair weight matrix has the wrong shape");
    }

    const double lo = b.eigenvalues.minCoeff() - a.eigenvalues.maxCoeff();
    const double hi = b.eigenvalues.maxCoeff() - a.eigenvalues.minCoeff();
    const auto bin_of = [bin_width](double w) { return static_cast<long>(std::floor(w / bin_width + 0.5)); };
    const long first = bin_of(lo);
    const long last = bin_of(hi);
    const auto nbins = static_cast<std::size_t>(last - first + 1);

    GapHistogram out;
    out.bin_width = bin_width;
    out.centers.resize(nbins);
    out.count.assign(nbins, 0);
    for (std::size_t k = 0; k < nbins; ++k) out.centers[k] = static_cast<double>(first + static_cast<long>(k)) * bin_width;

    std::vector<double> weight_sum(weights != nullptr ? nbins : 0, 0.0);
    for (Eigen::Index n1 = 0; n1 < na; ++n1) {
        for (Eigen::Index n2 = 0; n2 < nb; ++n2) {
            const double w = b.eigenvalues[n2] - a.eigenvalues[n1];
            const auto k = static_cast<std::size_t>(std::clamp(bin_of(w), first, last) - first);
            ++out.count[k];
            if (weights != nullptr) weight_sum[k] += (*weights)(n1, n2);
        }
    }

    const double pairs = static_cast<double>(na) * static_cast<double>(nb);
    out.n_per_pair.resize(nbins);
    out.n_per_level.resize(nbins);
    for (std::size_t k = 0; k < nbins; ++k) {
        out.n_per_pair[k] = static_cast<double>(out.count[k]) / pairs;
        out.n_per_level[k] = static_cast<double>(out.count[k]) / static_cast<double>(na);
    }
    if (weights != nullptr) {
        std::vector<double> avg(nbins, 0.0);
        for (std::size_t k = 0; k < nbins; ++k) {
            if (out.count[k] > 0) avg[k] = weight_sum[k] / static_cast<double>(out.count[k]);
        }
        out.m_avg = std::move(avg);
        out.nm_product = std::move(weight_sum);
    }
    return out;
}

double default_bin_width(const SectorSpectrum& a, const SectorSpectrum& b, int bins) {
    const double lo = b.eigenvalues.minCoeff() - a.eigenvalues.maxCoeff();
    const double hi = b.eigenvalues.maxCoeff() - a.eigenvalues.minCoeff();
    const double w = (hi - lo) / bins;
    return w > 0.0 ? w : 1.0;
}

double gap_variance(const SectorSpectrum& a, const SectorSpectrum& b) {
    return sector_energy_variance(a) + sector_energy_variance(b);
}

std::optional<double> dos_entropy(const SectorSpectrum& sp, EnergyWindow window) {
    const auto n = std::count_if(sp.eigenvalues.begin(), sp.eigenvalues.end(),
                                 [&](double e) { return e >= window.lo && e <= window.hi; });
    if (n == 0) return std::nullopt;
    return std::log(static_cast<double>(n));
}

}  // namespace qme
