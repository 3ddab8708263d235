#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "qme/basis.hpp"
#include "qme/density_matrix.hpp"
#include "qme/model.hpp"
#include "qme/spectra.hpp"
#include "qme/states.hpp"

namespace qme {

// Eigendata of every charge sector of the full chain and of the bath-only
// Hamiltonian. Immutable after construction and safe to share across threads.
class EvolutionEngine {
public:
    EvolutionEngine(ModelParams params, Geometry geometry, unsigned threads = 1);

    const ModelParams& params() const { return params_; }
    const Geometry& geometry() const { return geometry_; }

    const SectorSpectrum& spectrum(int n_up) const { return spectra_.at(static_cast<std::size_t>(n_up)); }
    const SectorSpectrum& bath_spectrum(int n_up) const { return bath_spectra_.at(static_cast<std::size_t>(n_up)); }
    std::span<const SectorSpectrum> spectra() const { return spectra_; }
    std::span<const SectorSpectrum> bath_spectra() const { return bath_spectra_; }

private:
    ModelParams params_;
    Geometry geometry_;
    std::vector<SectorSpectrum> spectra_;
    std::vector<SectorSpectrum> bath_spectra_;
};

// exp(-iHt) psi under the full-chain Hamiltonian.
PureState evolve(const EvolutionEngine& engine, const PureState& psi, double t);

// exp(-iH_B t) psi_B under the bath-only Hamiltonian.
PureState evolve_bath(const EvolutionEngine& engine, const PureState& bath, double t);

struct EnsembleSpec {
    int n_samples = 100;
    double dt_min = 50.0;
    double dt_max = 150.0;
    std::uint64_t seed = 20250502;

    void validate() const;

    // Thermalisation time of sample k, uniform on [dt_min, dt_max] and a pure
    // function of (seed, k).
    double sample_dt(int k) const;
};

PureState pre_thermalize(const EvolutionEngine& engine, const PureState& qtb, const EnsembleSpec& e, int k);

// Tr_B |psi><psi| over the QOS sites of `g`.
DensityMatrix reduced_density_matrix(const PureState& psi, const Geometry& g);

// n points evenly spaced on [0, t_max].
std::vector<double> make_time_grid(double t_max, int n_points);

// Reduced QOS density matrix of exp(-iHt) psi at every grid time.
std::vector<DensityMatrix> reduced_trajectory(const EvolutionEngine& engine, const PureState& psi,
                                              std::span<const double> times);

// Sample-averaged reduced density matrices. For every sample the bath state
// is pre-thermalised for its own dt_k, composed with the QOS state, evolved
// with the full Hamiltonian to each grid time and traced down to the QOS.
// The average is accumulated in sample order, so the result does not depend
// on `threads`.
std::vector<DensityMatrix> ensemble_reduced(const EvolutionEngine& engine, const PureState& qos,
                                            const PureState& qtb, const EnsembleSpec& e,
                                            std::span<const double> times, unsigned threads = 1);

// Same with the standard initial states: qos_initial_state(theta_s) and
// bath_initial_state(theta_b).
std::vector<DensityMatrix> ensemble_reduced(const EvolutionEngine& engine, double theta_s, double theta_b,
                                            const EnsembleSpec& e, std::span<const double> times,
                                            unsigned threads = 1);

}  // namespace qme
