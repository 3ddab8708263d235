#pragma once

#include <Eigen/Dense>
#include <complex>
#include <memory>
#include <vector>

#include "qme/basis.hpp"

namespace qme {

using Complex = std::complex<double>;

// Shared, immutable sector basis for `num_sites` spins.
std::shared_ptr<const SectorBasis> shared_basis(int num_sites);

// Pure state over a chain, stored as one amplitude block per charge sector.
class PureState {
public:
    PureState(std::shared_ptr<const SectorBasis> basis, std::vector<Eigen::VectorXcd> blocks);

    static PureState from_dense(int num_sites, const Eigen::VectorXcd& amplitudes);
    static PureState basis_state(int num_sites, SpinConfiguration c);

    int num_sites() const { return basis_->num_sites(); }
    const SectorBasis& basis() const { return *basis_; }
    const std::shared_ptr<const SectorBasis>& basis_ptr() const { return basis_; }

    const Eigen::VectorXcd& block(int n_up) const { return blocks_.at(static_cast<std::size_t>(n_up)); }
    Eigen::VectorXcd& block(int n_up) { return blocks_.at(static_cast<std::size_t>(n_up)); }

    Complex amplitude(SpinConfiguration c) const;
    Eigen::VectorXcd to_dense() const;
    double norm() const;

private:
    std::shared_ptr<const SectorBasis> basis_;
    std::vector<Eigen::VectorXcd> blocks_;
};

// sin(theta/2)/sqrt2 (|uu> + |dd>) + cos(theta/2)/sqrt2 (|ud> + |du>)
PureState qtb_pair_state(double theta_b);

// Pair states on sites (1,2), (3,4), ... of an even-length bath.
PureState qtb_initial_state(double theta_b, int bath_sites);

// Same as qtb_initial_state for an even bath; for an odd bath the last site
// is left in |down>, which carries no charge variance.
PureState bath_initial_state(double theta_b, int bath_sites);

// exp(-i theta/2 sum_i Y_i) |d...d>, i.e. cos(theta/2)|d> - sin(theta/2)|u> per site.
PureState qos_initial_state(double theta_s, int qos_sites);

// a on the low sites, b on the following sites.
PureState tensor_product(const PureState& a, const PureState& b);

// Product state |qos> (x) |qtb> placed on the chain according to `g`.
PureState compose_full_state(const PureState& qos, const PureState& qtb, const Geometry& g);

// p[n_up] = ||Pi_{n_up} psi||^2 for n_up = 0..L.
std::vector<double> sector_occupations(const PureState& psi);

// Variance of Q = sum_i Z_i, i.e. of 2 n_up - L under the sector occupations.
double charge_variance(const PureState& psi);
double charge_mean(const PureState& psi);

// Entanglement asymmetry of |psi><psi| with respect to its own charge,
// which reduces to the Shannon entropy of the sector occupations.
double state_asymmetry(const PureState& psi);

}  // namespace qme
