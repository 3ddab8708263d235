#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "qme/basis.hpp"
#include "qme/model.hpp"

namespace qme {

struct SectorSpectrum {
    ChargeSector sector;
    Eigen::VectorXd eigenvalues;   // ascending
    Eigen::MatrixXd eigenvectors;  // column n pairs with eigenvalues[n]

    std::size_t dimension() const { return static_cast<std::size_t>(eigenvalues.size()); }
};

SectorSpectrum diagonalize_sector(const SectorHamiltonian& h);

// Population variance of the eigenvalues.
double sector_energy_variance(const SectorSpectrum& sp);
double population_variance(const Eigen::Ref<const Eigen::VectorXd>& values);

// Histogram of the gaps omega = E_b[n2] - E_a[n1] over all ordered pairs.
//
// `count[k]` is N(omega) in bin k, whose centre is centers[k]. Two
// normalisations of the pair density are kept side by side:
//   n_per_pair  = count / (dim_a * dim_b)
//   n_per_level = count / dim_a
// When pair weights are supplied, m_avg holds the mean weight of the pairs in
// each bin (zero for empty bins) and nm_product = count * m_avg, i.e. the
// bin-summed weight.
struct GapHistogram {
    double bin_width = 0.0;
    std::vector<double> centers;
    std::vector<std::size_t> count;
    std::vector<double> n_per_pair;
    std::vector<double> n_per_level;
    std::optional<std::vector<double>> m_avg;
    std::optional<std::vector<double>> nm_product;

    std::size_t total_count() const;
};

// Bins are aligned so that omega = 0 sits at a bin centre. `weights`, when
// given, is dim_a x dim_b with weights(n1, n2) attached to the pair (n1, n2).
GapHistogram gap_histogram(const SectorSpectrum& a, const SectorSpectrum& b, double bin_width,
                           const Eigen::MatrixXd* weights = nullptr);

// (max gap - min gap) / bins, falling back to 1 for a degenerate gap set.
double default_bin_width(const SectorSpectrum& a, const SectorSpectrum& b, int bins = 200);

// Var(a) + Var(b), which is exactly the variance of the all-pairs gap multiset.
double gap_variance(const SectorSpectrum& a, const SectorSpectrum& b);

struct EnergyWindow {
    double lo;
    double hi;  // inclusive on both ends
};

// ln(number of eigenvalues inside the window); nullopt when the window is empty.
std::optional<double> dos_entropy(const SectorSpectrum& sp, EnergyWindow window);

}  // namespace qme
