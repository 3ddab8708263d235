#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "qme/model.hpp"
#include "qme/spectra.hpp"

using namespace qme;

namespace {

SectorSpectrum synthetic(const Eigen::VectorXd& e) {
    return {ChargeSector(1, 0), e, Eigen::MatrixXd::Identity(e.size(), e.size())};
}

}  // namespace

TEST_SUITE("spectra") {

TEST_CASE("eigendecomposition reconstructs the block") {
    const ModelParams p{1.0, 0.2, 8};
    for (int n = 0; n <= 8; ++n) {
        const auto h = build_sector_hamiltonian(p, ChargeSector(8, n));
        const auto sp = diagonalize_sector(h);
        CHECK(std::is_sorted(sp.eigenvalues.begin(), sp.eigenvalues.end()));
        const Eigen::MatrixXd rebuilt = sp.eigenvectors * sp.eigenvalues.asDiagonal() * sp.eigenvectors.transpose();
        CHECK((rebuilt - h.matrix).cwiseAbs().maxCoeff() <= 1e-11);
        const auto d = static_cast<Eigen::Index>(sp.dimension());
        CHECK((sp.eigenvectors.transpose() * sp.eigenvectors - Eigen::MatrixXd::Identity(d, d)).norm() <= 1e-11);
    }
}

TEST_CASE("variance helpers") {
    Eigen::VectorXd v(4);
    v << 1, 2, 3, 4;
    CHECK(population_variance(v) == doctest::Approx(1.25));
    CHECK(sector_energy_variance(synthetic(v)) == doctest::Approx(1.25));
}

TEST_CASE("gap variance equals Var(a) + Var(b)") {
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<int> dim(1, 50);
    std::normal_distribution<double> n(0.0, 3.0);
    for (int trial = 0; trial < 20; ++trial) {
        Eigen::VectorXd a(dim(rng)), b(dim(rng));
        for (auto& x : a) x = n(rng);
        for (auto& x : b) x = n(rng) + 5.0;
        CHECK(std::abs(gap_variance(synthetic(a), synthetic(b)) - oracle::all_pairs_gap_variance(a, b)) <= 1e-10);
    }
}

TEST_CASE("gap histogram bookkeeping") {
    Eigen::VectorXd a(3), b(2);
    a << 0.0, 1.0, 2.0;
    b << 0.5, 1.5;
    Eigen::MatrixXd w(3, 2);
    w << 1, 2, 3, 4, 5, 6;
    const auto h = gap_histogram(synthetic(a), synthetic(b), 0.5, &w);
    CHECK(h.total_count() == 6);
    double nm = 0, per_pair = 0, per_level = 0;
    for (std::size_t k = 0; k < h.centers.size(); ++k) {
        nm += (*h.nm_product)[k];
        per_pair += h.n_per_pair[k];
        per_level += h.n_per_level[k];
        // centres sit on multiples of the bin width
        CHECK(std::abs(std::remainder(h.centers[k], 0.5)) <= 1e-12);
        if (h.count[k] == 0) CHECK((*h.m_avg)[k] == 0.0);
    }
    CHECK(nm == doctest::Approx(21.0));
    CHECK(per_pair == doctest::Approx(1.0));
    CHECK(per_level == doctest::Approx(2.0));

    const auto plain = gap_histogram(synthetic(a), synthetic(b), 0.5);
    CHECK_FALSE(plain.m_avg.has_value());
    CHECK(default_bin_width(synthetic(a), synthetic(b), 4) == doctest::Approx((1.5 - -1.5) / 4));
}

TEST_CASE("density-of-states entropy") {
    Eigen::VectorXd e(5);
    e << -2, -1, 0, 1, 2;
    CHECK(*dos_entropy(synthetic(e), {-10, 10}) == doctest::Approx(std::log(5.0)));
    CHECK(*dos_entropy(synthetic(e), {-1, 1}) == doctest::Approx(std::log(3.0)));
    CHECK_FALSE(dos_entropy(synthetic(e), {0.2, 0.8}).has_value());
}

}
