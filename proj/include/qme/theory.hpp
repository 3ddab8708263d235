#pragma once

#include <Eigen/Dense>
#include <optional>
#include <span>
#include <vector>

#include "qme/asymmetry.hpp"
#include "qme/basis.hpp"
#include "qme/dynamics.hpp"
#include "qme/states.hpp"

namespace qme {

// Post-thermalised bath sum_q (p_q / D_q) I_q, kept in compressed form.
struct DephasedBath {
    int num_sites = 0;
    std::vector<double> occupations;       // p_q indexed by bath n_up
    std::vector<std::size_t> dimensions;   // D_q = C(L_b, q)

    double trace() const;
    Eigen::MatrixXd dense() const;         // 2^L_b x 2^L_b, for small baths
};

DephasedBath dephased_bath(const PureState& bath);

// QOS matrix element <row| rho_S |col>.
struct QosElement {
    SpinConfiguration row;
    SpinConfiguration col;
};

// Direct spectral prediction of one QOS matrix element under a dephased bath,
// keeping only the terms where the QOS coherence does not change sector
// (bath sector m on both sides). per_m[k] is the contribution of bath
// sector m_values[k]; total is their sum.
struct OffdiagPrediction {
    QosElement element;
    std::vector<double> times;
    std::vector<int> m_values;
    std::vector<std::vector<Complex>> per_m;
    std::vector<Complex> total;
};

struct PredictionOptions {
    // Drop the smallest eigen-pair weights whose summed magnitude stays below
    // this fraction of the total. 0 keeps every pair.
    double truncation = 0.0;
    unsigned threads = 1;
};

// `qos_coefficients` are the 2^L_s amplitudes of the initial QOS state.
OffdiagPrediction predict_offdiagonal(const EvolutionEngine& engine, const Eigen::VectorXcd& qos_coefficients,
                                      const DephasedBath& bath, QosElement element,
                                      std::span<const double> times, const PredictionOptions& options = {});

// |<n2| (|col><row| (x) I_m) |n1>|^2 between sector n_up(row)+m (rows, n1)
// and sector n_up(col)+m (columns, n2); the weight source for gap histograms.
Eigen::MatrixXd transition_weights(const EvolutionEngine& engine, QosElement element, int m);

struct MTimescale {
    int m;
    std::optional<GaussianFit> fit;  // nullopt when the contribution vanishes
};

// Gaussian fit of |per-m contribution| for each bath sector.
std::vector<MTimescale> per_m_timescale(const OffdiagPrediction& prediction, double floor = kDefaultFitFloor);

}  // namespace qme
