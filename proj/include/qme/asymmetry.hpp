#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qme/density_matrix.hpp"

namespace qme {

// Charge label of every basis index of an n-site subsystem (its up count).
std::vector<int> charge_labels(int num_sites);

// sum_q Pi_q rho Pi_q, where Pi_q projects on the indices with labels[i] == q.
DensityMatrix symmetrize(const DensityMatrix& rho, std::span<const int> labels);
DensityMatrix symmetrize(const DensityMatrix& rho);  // labels from the bit count

// -sum lambda ln lambda; eigenvalues at or below 1e-12 contribute nothing.
// Throws InvalidDensityError for an eigenvalue below -1e-8.
double von_neumann_entropy(const DensityMatrix& rho);

// S(symmetrize(rho)) - S(rho), the relative entropy between rho and its
// charge pinching. Rounding noise below 1e-10 is clamped to zero.
double entanglement_asymmetry(const DensityMatrix& rho, std::span<const int> labels);
double entanglement_asymmetry(const DensityMatrix& rho);

// Shannon entropy (nats) of a probability vector.
double occupation_entropy(std::span<const double> p);

struct AsymmetryCurve {
    std::vector<double> times;
    std::vector<double> values;
    std::string label;
};

AsymmetryCurve asymmetry_curve(std::span<const double> times, std::span<const DensityMatrix> rhos,
                               std::string label = {});

// y = A exp(-t^2 / t0^2) fitted on ln y against t^2.
struct GaussianFit {
    bool ok = false;
    double A = 0.0;
    double t0 = 0.0;
    double residual = 0.0;          // RMS of ln y - model over the window
    std::size_t window_begin = 0;   // fitted indices are [window_begin, window_end)
    std::size_t window_end = 0;
    std::string failure;            // reason when !ok
};

inline constexpr double kDefaultFitFloor = 1e-3;

// Fits the leading stretch of the curve where y > floor * y(0), using
// weights y^2 (the first-order variance of ln y under additive noise).
// Failures are reported in the result, never thrown.
GaussianFit fit_gaussian_decay(const AsymmetryCurve& curve, double floor = kDefaultFitFloor);

struct MpembaVerdict {
    bool occurs = false;
    std::optional<double> t_mpemba;
    std::optional<double> margin;   // min |dS1 - dS2| over sampled times after t_M
    int initially_larger = 0;       // 1 or 2; 0 when the initial values tie
};

inline constexpr double kMpembaStrictness = 1e-9;

// The curve with the larger initial asymmetry must end up strictly below the
// other (by kMpembaStrictness) at every sampled time after t_M; t_M is the
// earliest grid time with that property.
MpembaVerdict detect_mpemba(const AsymmetryCurve& c1, const AsymmetryCurve& c2);

}  // namespace qme
