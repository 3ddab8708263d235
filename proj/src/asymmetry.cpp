#include "qme/asymmetry.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <map>

#include <Eigen/Eigenvalues>

#include "qme/errors.hpp"

namespace qme {

namespace {

constexpr double kZeroEigenvalue = 1e-12;
constexpr double kNegativeEigenvalue = -1e-8;
constexpr double kAsymmetryNoise = 1e-10;

double entropy_of_spectrum(const Eigen::VectorXd& lambda) {
    double s = 0.0;
    for (double l : lambda) {
        if (l < kNegativeEigenvalue) {
            throw InvalidDensityError("density matrix has eigenvalue " + std::to_string(l));
        }
        if (l > kZeroEigenvalue) s -= l * std::log(l);
    }
    return s;
}

Eigen::VectorXd hermitian_eigenvalues(const Eigen::MatrixXcd& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(m, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) throw NumericalError("density-matrix eigensolver failed");
    return solver.eigenvalues();
}

void check_labels(const DensityMatrix& rho, std::span<const int> labels) {
    if (static_cast<Eigen::Index>(labels.size()) != rho.dim()) {
        throw ParameterError("charge labels do not cover the density-matrix basis");
    }
}

// Indices grouped by charge label, in ascending label order.
std::map<int, std::vector<Eigen::Index>> blocks_of(std::span<const int> labels) {
    std::map<int, std::vector<Eigen::Index>> blocks;
    for (std::size_t i = 0; i < labels.size(); ++i) blocks[labels[i]].push_back(static_cast<Eigen::Index>(i));
    return blocks;
}

}  // namespace

std::vector<int> charge_labels(int num_sites) {
    std::vector<int> labels(std::size_t{1} << num_sites);
    for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = std::popcount(i);
    return labels;
}

DensityMatrix symmetrize(const DensityMatrix& rho, std::span<const int> labels) {
    check_labels(rho, labels);
    DensityMatrix out{rho.entries};
    for (Eigen::Index i = 0; i < rho.dim(); ++i) {
        for (Eigen::Index j = 0; j < rho.dim(); ++j) {
            if (labels[i] != labels[j]) out.entries(i, j) = 0.0;
        }
    }
    return out;
}

DensityMatrix symmetrize(const DensityMatrix& rho) {
    const int sites = std::countr_zero(static_cast<unsigned long>(rho.dim()));
    return symmetrize(rho, charge_labels(sites));
}

double von_neumann_entropy(const DensityMatrix& rho) {
    return entropy_of_spectrum(hermitian_eigenvalues(rho.entries));
}

double entanglement_asymmetry(const DensityMatrix& rho, std::span<const int> labels) {
    check_labels(rho, labels);
    // A charge-diagonal state equals its own pinching; skip the rounding noise.
    bool symmetric = true;
    for (Eigen::Index i = 0; i < rho.dim() && symmetric; ++i) {
        for (Eigen::Index j = 0; j < rho.dim(); ++j) {
            if (labels[i] != labels[j] && rho.entries(i, j) != std::complex<double>{}) {
                symmetric = false;
                break;
            }
        }
    }
    if (symmetric) return 0.0;

    double pinched = 0.0;
    for (const auto& [label, idx] : blocks_of(labels)) {
        const auto n = static_cast<Eigen::Index>(idx.size());
        Eigen::MatrixXcd block(n, n);
        for (Eigen::Index a = 0; a < n; ++a) {
            for (Eigen::Index b = 0; b < n; ++b) block(a, b) = rho.entries(idx[a], idx[b]);
        }
        pinched += entropy_of_spectrum(hermitian_eigenvalues(block));
    }
    const double delta = pinched - von_neumann_entropy(rho);
    if (delta < 0.0 && delta > -kAsymmetryNoise) return 0.0;
    return delta;
}

double entanglement_asymmetry(const DensityMatrix& rho) {
    const int sites = std::countr_zero(static_cast<unsigned long>(rho.dim()));
    return entanglement_asymmetry(rho, charge_labels(sites));
}

double occupation_entropy(std::span<const double> p) {
    double s = 0.0;
    for (double x : p) {
        if (x > kZeroEigenvalue) s -= x * std::log(x);
    }
    return s;
}

AsymmetryCurve asymmetry_curve(std::span<const double> times, std::span<const DensityMatrix> rhos,
                               std::string label) {
    if (times.size() != rhos.size()) throw ParameterError("one density matrix per time point expected");
    AsymmetryCurve curve{{times.begin(), times.end()}, {}, std::move(label)};
    curve.values.reserve(rhos.size());
    for (const auto& rho : rhos) curve.values.push_back(std::max(0.0, entanglement_asymmetry(rho)));
    return curve;
}

GaussianFit fit_gaussian_decay(const AsymmetryCurve& curve, double floor) {
    GaussianFit fit;
    const auto& y = curve.values;
    const auto& t = curve.times;
    if (y.size() != t.size()) throw ParameterError("curve times and values differ in length");
    if (y.empty() || !(y.front() > 0.0)) {
        fit.failure = "curve does not start above zero";
        return fit;
    }
    const double threshold = floor * y.front();
    std::size_t end = 0;
    while (end < y.size() && y[end] > threshold) ++end;
    fit.window_begin = 0;
    fit.window_end = end;
    if (end < 5) {
        fit.failure = "fewer than 5 points above the fit floor";
        return fit;
    }

    double sw = 0.0, sx = 0.0, sy = 0.0;
    for (std::size_t i = 0; i < end; ++i) {
        const double w = y[i] * y[i];
        sw += w;
        sx += w * t[i] * t[i];
        sy += w * std::log(y[i]);
    }
    const double mx = sx / sw;
    const double my = sy / sw;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < end; ++i) {
        const double w = y[i] * y[i];
        const double dx = t[i] * t[i] - mx;
        sxx += w * dx * dx;
        sxy += w * dx * (std::log(y[i]) - my);
    }
    if (!(sxx > 0.0)) {
        fit.failure = "degenerate time window";
        return fit;
    }
    const double slope = sxy / sxx;
    const double intercept = my - slope * mx;
    const double x_span = t[end - 1] * t[end - 1] - t[0] * t[0];
    if (!(slope * x_span < -1e-12)) {
        fit.failure = "curve is not decaying";
        return fit;
    }

    double sq = 0.0;
    for (std::size_t i = 0; i < end; ++i) {
        const double r = std::log(y[i]) - (intercept + slope * t[i] * t[i]);
        sq += r * r;
    }
    fit.ok = true;
    fit.A = std::exp(intercept);
    fit.t0 = std::sqrt(-1.0 / slope);
    fit.residual = std::sqrt(sq / static_cast<double>(end));
    return fit;
}

MpembaVerdict detect_mpemba(const AsymmetryCurve& c1, const AsymmetryCurve& c2) {
    if (c1.times != c2.times) throw ParameterError("Mpemba comparison needs identical time grids");
    if (c1.values.size() != c1.times.size() || c2.values.size() != c2.times.size()) {
        throw ParameterError("curve times and values differ in length");
    }
    MpembaVerdict v;
    if (c1.values.empty() || c1.values.front() == c2.values.front()) return v;

    v.initially_larger = c1.values.front() > c2.values.front() ? 1 : 2;
    const auto& hi = v.initially_larger == 1 ? c1.values : c2.values;
    const auto& lo = v.initially_larger == 1 ? c2.values : c1.values;

    // Walk backwards while the inverted ordering holds; the first index
    // where it fails is the earliest admissible t_M.
    std::size_t k = hi.size();
    while (k > 0 && hi[k - 1] < lo[k - 1] - kMpembaStrictness) --k;
    if (k == hi.size() || k == 0) return v;  // never inverted at the end, or inverted from t = 0

    v.occurs = true;
    v.t_mpemba = c1.times[k - 1];
    double margin = std::numeric_limits<double>::infinity();
    for (std::size_t i = k; i < hi.size(); ++i) margin = std::min(margin, lo[i] - hi[i]);
    v.margin = margin;
    return v;
}

}  // namespace qme
