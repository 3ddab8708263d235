#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace qme {

inline constexpr int kMaxSites = 24;

// Computational-basis configuration of a spin-1/2 chain. Bit (i-1) set means
// site i (1-indexed) is up, i.e. sigma^z eigenvalue +1.
struct SpinConfiguration {
    std::uint32_t bits = 0;

    friend constexpr auto operator<=>(SpinConfiguration, SpinConfiguration) = default;
};

int up_count(SpinConfiguration c);

// Eigenvalue of Q = sum_i sigma^z_i, i.e. 2 * n_up - L.
int charge_of(SpinConfiguration c, int num_sites);

// Binomial coefficient C(n, k) for 0 <= n <= kMaxSites; zero outside [0, n].
std::size_t binomial(int n, int k);

// All configurations of `num_sites` spins with exactly `n_up` up spins, in
// ascending order of the bit word.
class ChargeSector {
public:
    ChargeSector(int num_sites, int n_up);

    int num_sites() const { return num_sites_; }
    int n_up() const { return n_up_; }
    int charge() const { return 2 * n_up_ - num_sites_; }
    std::size_t dimension() const { return states_.size(); }

    std::span<const SpinConfiguration> states() const { return states_; }
    SpinConfiguration state(std::size_t k) const { return states_[k]; }

    // Intra-sector index of `c`. `c` must have n_up() set bits among the low
    // num_sites() bits; the combinatorial number system gives the index
    // without a lookup table.
    std::size_t rank(SpinConfiguration c) const;
    bool contains(SpinConfiguration c) const;

private:
    int num_sites_;
    int n_up_;
    std::vector<SpinConfiguration> states_;
};

ChargeSector enumerate_sector(int num_sites, int n_up);

// Every charge sector of an L-site chain, indexed by n_up = 0..L.
class SectorBasis {
public:
    struct Location {
        int n_up;
        std::size_t index;
    };

    explicit SectorBasis(int num_sites);

    int num_sites() const { return num_sites_; }
    int sector_count() const { return num_sites_ + 1; }
    const ChargeSector& sector(int n_up) const { return sectors_.at(static_cast<std::size_t>(n_up)); }
    std::size_t full_dimension() const { return std::size_t{1} << num_sites_; }

    Location locate(SpinConfiguration c) const;

private:
    int num_sites_;
    std::vector<ChargeSector> sectors_;
};

// Partition of the chain into a contiguous open-system block (QOS) and the
// bath (QTB) made of the remaining sites. Sites are 1-indexed and the QOS
// interval is inclusive.
class Geometry {
public:
    Geometry(int num_sites, int qos_first, int qos_last);

    // QOS block of `qos_size` sites placed as close to the chain centre as
    // possible; for L = 15 and size 3 this gives sites {7, 8, 9}.
    static Geometry centered(int num_sites, int qos_size = 3);

    int num_sites() const { return num_sites_; }
    int qos_first() const { return qos_first_; }
    int qos_last() const { return qos_last_; }
    int qos_size() const { return qos_last_ - qos_first_ + 1; }
    int bath_size() const { return num_sites_ - qos_size(); }

    std::span<const int> qos_sites() const { return qos_sites_; }
    std::span<const int> bath_sites() const { return bath_sites_; }

    friend bool operator==(const Geometry& a, const Geometry& b) {
        return a.num_sites_ == b.num_sites_ && a.qos_first_ == b.qos_first_ &&
               a.qos_last_ == b.qos_last_;
    }

private:
    int num_sites_;
    int qos_first_;
    int qos_last_;
    std::vector<int> qos_sites_;
    std::vector<int> bath_sites_;
};

// Full-chain configuration whose QOS sites carry `qos` (bit k -> k-th QOS
// site) and whose bath sites carry `bath` (bit k -> k-th bath site in
// ascending site order).
SpinConfiguration embed(SpinConfiguration qos, SpinConfiguration bath, const Geometry& g);

// Inverse of embed: (qos factor, bath factor).
std::pair<SpinConfiguration, SpinConfiguration> split(SpinConfiguration full, const Geometry& g);

}  // namespace qme
