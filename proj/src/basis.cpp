#include "qme/basis.hpp"

#include <array>
#include <bit>
#include <string>

#include "qme/errors.hpp"

namespace qme {

namespace {

using BinomialTable = std::array<std::array<std::size_t, kMaxSites + 1>, kMaxSites + 1>;

constexpr BinomialTable make_binomials() {
    BinomialTable t{};
    for (int n = 0; n <= kMaxSites; ++n) {
        t[n][0] = 1;
        for (int k = 1; k <= n; ++k) {
            t[n][k] = t[n - 1][k - 1] + (k <= n - 1 ? t[n - 1][k] : 0);
        }
    }
    return t;
}

constexpr BinomialTable kBinomials = make_binomials();

std::uint32_t low_mask(int n) {
    return n >= 32 ? ~std::uint32_t{0} : ((std::uint32_t{1} << n) - 1);
}

void check_sites(int num_sites) {
    if (num_sites < 0 || num_sites > kMaxSites) {
        throw ParameterError("site count " + std::to_string(num_sites) + " outside [0, " +
                             std::to_string(kMaxSites) + "]");
    }
}

}  // namespace

int up_count(SpinConfiguration c) { return std::popcount(c.bits); }

int charge_of(SpinConfiguration c, int num_sites) { return 2 * up_count(c) - num_sites; }

std::size_t binomial(int n, int k) {
    if (n < 0 || n > kMaxSites || k < 0 || k > n) return 0;
    return kBinomials[n][k];
}

ChargeSector::ChargeSector(int num_sites, int n_up) : num_sites_(num_sites), n_up_(n_up) {
    check_sites(num_sites);
    if (n_up < 0 || n_up > num_sites) {
        throw ParameterError("n_up " + std::to_string(n_up) + " outside [0, " +
                             std::to_string(num_sites) + "]");
    }
    const std::size_t dim = binomial(num_sites, n_up);
    states_.reserve(dim);
    if (n_up == 0) {
        states_.push_back({0});
        return;
    }
    // Gosper's hack walks k-subsets in ascending integer order.
    std::uint64_t v = (std::uint64_t{1} << n_up) - 1;
    const std::uint64_t end = std::uint64_t{1} << num_sites;
    while (v < end) {
        states_.push_back({static_cast<std::uint32_t>(v)});
        const std::uint64_t t = v | (v - 1);
        v = (t + 1) | (((~t & (t + 1)) - 1) >> (std::countr_zero(v) + 1));
    }
}

std::size_t ChargeSector::rank(SpinConfiguration c) const {
    std::size_t r = 0;
    int j = 0;
    std::uint32_t bits = c.bits;
    while (bits != 0) {
        const int pos = std::countr_zero(bits);
        ++j;
        r += binomial(pos, j);
        bits &= bits - 1;
    }
    return r;
}

bool ChargeSector::contains(SpinConfiguration c) const {
    return (c.bits & ~low_mask(num_sites_)) == 0 && up_count(c) == n_up_;
}

ChargeSector enumerate_sector(int num_sites, int n_up) { return ChargeSector(num_sites, n_up); }

SectorBasis::SectorBasis(int num_sites) : num_sites_(num_sites) {
    check_sites(num_sites);
    sectors_.reserve(static_cast<std::size_t>(num_sites) + 1);
    for (int n = 0; n <= num_sites; ++n) sectors_.emplace_back(num_sites, n);
}

SectorBasis::Location SectorBasis::locate(SpinConfiguration c) const {
    const int n = up_count(c);
    return {n, sectors_[static_cast<std::size_t>(n)].rank(c)};
}

Geometry::Geometry(int num_sites, int qos_first, int qos_last)
    : num_sites_(num_sites), qos_first_(qos_first), qos_last_(qos_last) {
    check_sites(num_sites);
    if (qos_first < 1 || qos_last > num_sites || qos_first > qos_last) {
        throw ParameterError("QOS interval [" + std::to_string(qos_first) + ", " +
                             std::to_string(qos_last) + "] is not a nonempty subinterval of [1, " +
                             std::to_string(num_sites) + "]");
    }
    for (int s = 1; s <= num_sites; ++s) {
        (s >= qos_first && s <= qos_last ? qos_sites_ : bath_sites_).push_back(s);
    }
}

Geometry Geometry::centered(int num_sites, int qos_size) {
    const int first = (num_sites - qos_size) / 2 + 1;
    return Geometry(num_sites, first, first + qos_size - 1);
}

SpinConfiguration embed(SpinConfiguration qos, SpinConfiguration bath, const Geometry& g) {
    const int left = g.qos_first() - 1;
    const std::uint32_t left_bits = bath.bits & low_mask(left);
    const std::uint32_t right_bits = bath.bits >> left;
    return {left_bits | (qos.bits << left) | (right_bits << g.qos_last())};
}

std::pair<SpinConfiguration, SpinConfiguration> split(SpinConfiguration full, const Geometry& g) {
    const int left = g.qos_first() - 1;
    const std::uint32_t qos = (full.bits >> left) & low_mask(g.qos_size());
    const std::uint32_t bath =
        (full.bits & low_mask(left)) | ((full.bits >> g.qos_last()) << left);
    return {{qos}, {bath}};
}

}  // namespace qme
