#include "qme/model.hpp"

#include <cmath>
#include <cstdlib>
#include <string>
#include <vector>

#include "qme/errors.hpp"

namespace qme {

void ModelParams::validate() const {
    if (L < 2 || L > kMaxSites) {
        throw ParameterError("model L = " + std::to_string(L) + " outside [2, " +
                             std::to_string(kMaxSites) + "]");
    }
    if (!std::isfinite(J) || !std::isfinite(h)) throw ParameterError("model J and h must be finite");
}

SectorHamiltonian build_hamiltonian_on_sites(const ModelParams& p, std::span<const int> positions,
                                             const ChargeSector& s) {
    p.validate();
    const int n = static_cast<int>(positions.size());
    if (s.num_sites() != n) {
        throw ParameterError("sector over " + std::to_string(s.num_sites()) + " sites, expected " +
                             std::to_string(n));
    }
    for (int pos : positions) {
        if (pos < 1 || pos > p.L) throw ParameterError("site position outside the chain");
    }

    const auto dim = static_cast<Eigen::Index>(s.dimension());
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(dim, dim);
    const double half_length = 0.5 * p.L;

    // X_i X_j + Y_i Y_j = 2 (S+_i S-_j + S-_i S+_j): amplitude 2 between
    // configurations that differ by swapping an antiparallel pair.
    std::vector<double> hop(static_cast<std::size_t>(n * n), 0.0);
    for (int a = 0; a < n; ++a) {
        for (int b = a + 1; b < n; ++b) {
            const double amp = 2.0 * p.J / std::abs(positions[a] - positions[b]);
            hop[a * n + b] = amp;
            hop[b * n + a] = amp;
        }
    }

    for (Eigen::Index col = 0; col < dim; ++col) {
        const std::uint32_t bits = s.state(static_cast<std::size_t>(col)).bits;
        double diag = 0.0;
        for (int a = 0; a < n; ++a) {
            const double z = ((bits >> a) & 1U) ? 1.0 : -1.0;
            diag += (positions[a] - half_length) * z;
        }
        m(col, col) = p.h * diag;

        for (int a = 0; a < n; ++a) {
            if (!((bits >> a) & 1U)) continue;
            for (int b = 0; b < n; ++b) {
                if ((bits >> b) & 1U) continue;
                const SpinConfiguration flipped{bits ^ (1U << a) ^ (1U << b)};
                m(static_cast<Eigen::Index>(s.rank(flipped)), col) = hop[a * n + b];
            }
        }
    }
    return {s, std::move(m)};
}

SectorHamiltonian build_sector_hamiltonian(const ModelParams& p, const ChargeSector& s) {
    if (s.num_sites() != p.L) {
        throw ParameterError("sector is over " + std::to_string(s.num_sites()) +
                             " sites but the model has L = " + std::to_string(p.L));
    }
    std::vector<int> positions(static_cast<std::size_t>(p.L));
    for (int i = 0; i < p.L; ++i) positions[i] = i + 1;
    return build_hamiltonian_on_sites(p, positions, s);
}

SectorHamiltonian build_bath_hamiltonian(const ModelParams& p, const Geometry& g,
                                         const ChargeSector& s) {
    if (g.num_sites() != p.L) throw ParameterError("geometry and model disagree on L");
    return build_hamiltonian_on_sites(p, g.bath_sites(), s);
}

Eigen::MatrixXd assemble_full_hamiltonian(const ModelParams& p) {
    p.validate();
    const SectorBasis basis(p.L);
    const auto full = static_cast<Eigen::Index>(basis.full_dimension());
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(full, full);
    for (int n = 0; n <= p.L; ++n) {
        const auto block = build_sector_hamiltonian(p, basis.sector(n));
        const auto states = block.sector.states();
        for (std::size_t c = 0; c < states.size(); ++c) {
            for (std::size_t r = 0; r < states.size(); ++r) {
                h(states[r].bits, states[c].bits) = block.matrix(static_cast<Eigen::Index>(r),
                                                                 static_cast<Eigen::Index>(c));
            }
        }
    }
    return h;
}

}  // namespace qme
