#include "qme/states.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <string>

#include "qme/asymmetry.hpp"
#include "qme/errors.hpp"

namespace qme {

std::shared_ptr<const SectorBasis> shared_basis(int num_sites) {
    static std::mutex mutex;
    static std::map<int, std::shared_ptr<const SectorBasis>> cache;
    const std::lock_guard lock(mutex);
    auto& slot = cache[num_sites];
    if (!slot) slot = std::make_shared<const SectorBasis>(num_sites);
    return slot;
}

PureState::PureState(std::shared_ptr<const SectorBasis> basis, std::vector<Eigen::VectorXcd> blocks)
    : basis_(std::move(basis)), blocks_(std::move(blocks)) {
    if (static_cast<int>(blocks_.size()) != basis_->sector_count()) {
        throw ParameterError("state needs one block per charge sector");
    }
    for (int n = 0; n < basis_->sector_count(); ++n) {
        if (static_cast<std::size_t>(blocks_[n].size()) != basis_->sector(n).dimension()) {
            throw ParameterError("state block " + std::to_string(n) + " has the wrong dimension");
        }
    }
}

PureState PureState::from_dense(int num_sites, const Eigen::VectorXcd& amplitudes) {
    auto basis = shared_basis(num_sites);
    if (static_cast<std::size_t>(amplitudes.size()) != basis->full_dimension()) {
        throw ParameterError("dense amplitude vector has the wrong length");
    }
    std::vector<Eigen::VectorXcd> blocks;
    blocks.reserve(static_cast<std::size_t>(basis->sector_count()));
    for (int n = 0; n < basis->sector_count(); ++n) {
        const auto states = basis->sector(n).states();
        Eigen::VectorXcd b(static_cast<Eigen::Index>(states.size()));
        for (std::size_t k = 0; k < states.size(); ++k) b[static_cast<Eigen::Index>(k)] = amplitudes[states[k].bits];
        blocks.push_back(std::move(b));
    }
    return PureState(std::move(basis), std::move(blocks));
}

PureState PureState::basis_state(int num_sites, SpinConfiguration c) {
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(Eigen::Index{1} << num_sites);
    v[c.bits] = 1.0;
    return from_dense(num_sites, v);
}

Complex PureState::amplitude(SpinConfiguration c) const {
    const auto loc = basis_->locate(c);
    return blocks_[static_cast<std::size_t>(loc.n_up)][static_cast<Eigen::Index>(loc.index)];
}

Eigen::VectorXcd PureState::to_dense() const {
    Eigen::VectorXcd v(static_cast<Eigen::Index>(basis_->full_dimension()));
    for (int n = 0; n < basis_->sector_count(); ++n) {
        const auto states = basis_->sector(n).states();
        for (std::size_t k = 0; k < states.size(); ++k) v[states[k].bits] = blocks_[n][static_cast<Eigen::Index>(k)];
    }
    return v;
}

double PureState::norm() const {
    double s = 0.0;
    for (const auto& b : blocks_) s += b.squaredNorm();
    return std::sqrt(s);
}

PureState qtb_pair_state(double theta_b) {
    const double s = std::sin(0.5 * theta_b) / std::sqrt(2.0);
    const double c = std::cos(0.5 * theta_b) / std::sqrt(2.0);
    Eigen::VectorXcd v(4);
    // bit 0 = first site; 0 = |dd>, 1 = |ud>, 2 = |du>, 3 = |uu>
    v << s, c, c, s;
    return PureState::from_dense(2, v);
}

namespace {

Eigen::VectorXcd kron_low_high(const Eigen::VectorXcd& low, const Eigen::VectorXcd& high) {
    // Result index = low_index | (high_index << low_sites).
    Eigen::VectorXcd out(low.size() * high.size());
    for (Eigen::Index h = 0; h < high.size(); ++h) out.segment(h * low.size(), low.size()) = high[h] * low;
    return out;
}

}  // namespace

PureState qtb_initial_state(double theta_b, int bath_sites) {
    if (bath_sites < 0 || bath_sites % 2 != 0) {
        throw ParameterError("bath pair state needs an even, nonnegative site count, got " +
                             std::to_string(bath_sites));
    }
    if (bath_sites > kMaxSites) throw ParameterError("bath too large");
    const Eigen::VectorXcd pair = qtb_pair_state(theta_b).to_dense();
    Eigen::VectorXcd v = Eigen::VectorXcd::Ones(1);
    for (int p = 0; p < bath_sites / 2; ++p) v = kron_low_high(v, pair);
    return PureState::from_dense(bath_sites, v);
}

PureState bath_initial_state(double theta_b, int bath_sites) {
    if (bath_sites % 2 == 0) return qtb_initial_state(theta_b, bath_sites);
    return tensor_product(qtb_initial_state(theta_b, bath_sites - 1), PureState::basis_state(1, {0}));
}

PureState qos_initial_state(double theta_s, int qos_sites) {
    if (qos_sites < 0 || qos_sites > kMaxSites) throw ParameterError("QOS site count out of range");
    Eigen::VectorXcd site(2);
    site << std::cos(0.5 * theta_s), -std::sin(0.5 * theta_s);  // (|d>, |u>)
    Eigen::VectorXcd v = Eigen::VectorXcd::Ones(1);
    for (int s = 0; s < qos_sites; ++s) v = kron_low_high(v, site);
    return PureState::from_dense(qos_sites, v);
}

PureState tensor_product(const PureState& a, const PureState& b) {
    const int sites = a.num_sites() + b.num_sites();
    if (sites > kMaxSites) throw ParameterError("tensor product exceeds the maximum chain length");
    return PureState::from_dense(sites, kron_low_high(a.to_dense(), b.to_dense()));
}

PureState compose_full_state(const PureState& qos, const PureState& qtb, const Geometry& g) {
    if (qos.num_sites() != g.qos_size() || qtb.num_sites() != g.bath_size()) {
        throw ParameterError("factor states do not match the geometry (" +
                             std::to_string(qos.num_sites()) + " + " + std::to_string(qtb.num_sites()) +
                             " sites vs " + std::to_string(g.qos_size()) + " + " +
                             std::to_string(g.bath_size()) + ")");
    }
    const Eigen::VectorXcd a = qos.to_dense();
    const Eigen::VectorXcd b = qtb.to_dense();
    Eigen::VectorXcd full = Eigen::VectorXcd::Zero(Eigen::Index{1} << g.num_sites());
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        if (a[i] == Complex{}) continue;
        for (Eigen::Index j = 0; j < b.size(); ++j) {
            const auto c = embed({static_cast<std::uint32_t>(i)}, {static_cast<std::uint32_t>(j)}, g);
            full[c.bits] = a[i] * b[j];
        }
    }
    return PureState::from_dense(g.num_sites(), full);
}

std::vector<double> sector_occupations(const PureState& psi) {
    std::vector<double> p(static_cast<std::size_t>(psi.basis().sector_count()));
    for (int n = 0; n < psi.basis().sector_count(); ++n) p[n] = psi.block(n).squaredNorm();
    return p;
}

double charge_mean(const PureState& psi) {
    const auto p = sector_occupations(psi);
    const int L = psi.num_sites();
    double mean = 0.0;
    for (std::size_t n = 0; n < p.size(); ++n) mean += p[n] * (2.0 * static_cast<double>(n) - L);
    return mean;
}

double charge_variance(const PureState& psi) {
    const auto p = sector_occupations(psi);
    const int L = psi.num_sites();
    double mean = 0.0;
    double second = 0.0;
    for (std::size_t n = 0; n < p.size(); ++n) {
        const double q = 2.0 * static_cast<double>(n) - L;
        mean += p[n] * q;
        second += p[n] * q * q;
    }
    return second - mean * mean;
}

double state_asymmetry(const PureState& psi) { return occupation_entropy(sector_occupations(psi)); }

}  // namespace qme
