#include <doctest.h>

#include "oracles.hpp"
#include "qme/dynamics.hpp"
#include "qme/krylov.hpp"
#include "qme/model.hpp"

using namespace qme;

namespace {

Operator random_operator(Eigen::Index dim, std::mt19937_64& rng) {
    std::normal_distribution<double> n;
    Operator op(dim, dim);
    for (Eigen::Index i = 0; i < dim; ++i)
        for (Eigen::Index j = 0; j < dim; ++j) op(i, j) = Complex(n(rng), n(rng));
    return op;
}

}  // namespace

TEST_SUITE("krylov") {

TEST_CASE("Hilbert-Schmidt inner product") {
    const Operator id = Operator::Identity(8, 8);
    CHECK(hs_norm(id) == doctest::Approx(1.0));
    std::mt19937_64 rng(4);
    const Operator a = random_operator(8, rng), b = random_operator(8, rng);
    CHECK(std::abs(hs_inner(a, b) - (a.adjoint() * b).trace() / 8.0) <= 1e-12);
    CHECK(std::abs(hs_inner(a, b) - std::conj(hs_inner(b, a))) <= 1e-12);
}

TEST_CASE("matrix units") {
    const Geometry g(6, 2, 4);
    const auto u = qos_matrix_unit(g, {0b001}, {0b000});
    CHECK(u.cwiseAbs().sum() == doctest::Approx(8.0));
    CHECK(u(0b000010, 0b000000) == Complex(1.0));
    const auto pair0 = mismatch_pair(g, 0);
    CHECK(std::abs(hs_inner(pair0.s1.adjoint(), pair0.s2) - 1.0 / 8) <= 1e-15);
    const auto pair1 = mismatch_pair(g, 1);
    CHECK(std::abs(hs_inner(pair1.s1.adjoint(), pair1.s2)) == 0.0);
}

TEST_CASE("Lanczos basis is orthonormal and tridiagonalises the Liouvillian") {
    const ModelParams p{1.0, 0.2, 4};
    const Operator h = assemble_full_hamiltonian(p).cast<Complex>();
    std::mt19937_64 rng(8);
    const Operator seed = random_operator(16, rng);
    const auto chain = lanczos_chain(h, seed, seed, {300, 1e-10, true});
    const auto d = chain.basis.size();
    REQUIRE(d == chain.depth());
    CHECK(chain.terminated);
    for (std::size_t m = 0; m < d; ++m) {
        for (std::size_t n = 0; n < d; ++n) {
            CHECK(std::abs(hs_inner(chain.basis[m], chain.basis[n]) - (m == n ? 1.0 : 0.0)) <= 1e-10);
        }
    }
    for (std::size_t n = 0; n < d; ++n) {
        Operator r = h * chain.basis[n] - chain.basis[n] * h - chain.a[n] * chain.basis[n];
        if (n > 0) r -= chain.b[n] * chain.basis[n - 1];
        if (n + 1 < d) r -= chain.b[n + 1] * chain.basis[n + 1];
        CHECK(hs_norm(r) <= 1e-8);
    }
    CHECK(std::abs(chain.overlaps[0] - hs_inner(seed, seed) / chain.seed_norm) <= 1e-12);

    const auto two_term = lanczos_chain(h, seed, seed, {20, 1e-10, false});
    for (double a : two_term.a) CHECK(a == 0.0);
}

TEST_CASE("chain amplitudes stay normalised and rebuild the correlator") {
    const ModelParams p{1.0, 0.2, 4};
    const Operator h = assemble_full_hamiltonian(p).cast<Complex>();
    std::mt19937_64 rng(12);
    const Operator s1 = random_operator(16, rng), s2 = random_operator(16, rng);
    const auto chain = lanczos_chain(h, s1.adjoint(), s2, {300, 1e-12, true});
    const auto times = std::vector<double>{0.0, 0.5, 1.0, 2.0, 3.5, 5.0};
    const auto phi = phi_evolve(chain, times);
    CHECK(phi.max_norm_error <= kPhiNormTolerance);
    for (std::size_t j = 0; j < times.size(); ++j) CHECK(std::abs(phi.phi.col(static_cast<Eigen::Index>(j)).squaredNorm() - 1) <= 1e-8);

    const auto eig = eigensystem_of(h);
    const auto direct = correlation_direct(eig, s1, s2, times);
    const auto krylov = correlation_krylov(chain, phi);
    const Operator hc = oracle::hamiltonian(4, 1.0, 0.2);
    for (std::size_t j = 0; j < times.size(); ++j) {
        const Operator u = oracle::propagator(hc, times[j]);
        const Complex ref = (u.adjoint() * s1 * u * s2).trace() / 16.0;
        CHECK(std::abs(direct[j] - ref) <= 1e-10);
        CHECK(std::abs(krylov[j] - ref) <= 1e-7);
    }
}

TEST_CASE("sector eigensystem matches the dense one") {
    const ModelParams p{1.0, 0.2, 5};
    std::vector<SectorSpectrum> spectra;
    for (int n = 0; n <= 5; ++n) spectra.push_back(diagonalize_sector(build_sector_hamiltonian(p, ChargeSector(5, n))));
    const auto a = eigensystem_of(spectra);
    const auto b = eigensystem_of(assemble_full_hamiltonian(p).cast<Complex>());
    const Geometry g(5, 2, 4);
    const auto pair = mismatch_pair(g, 0);
    const std::vector<double> times{0.3, 1.9};
    const auto ca = correlation_direct(a, pair.s1, pair.s2, times);
    const auto cb = correlation_direct(b, pair.s1, pair.s2, times);
    for (std::size_t j = 0; j < times.size(); ++j) CHECK(std::abs(ca[j] - cb[j]) <= 1e-12);
}

TEST_CASE("suppression study bookkeeping") {
    const ModelParams p{1.0, 0.2, 6};
    const Geometry g = Geometry::centered(6, 3);
    const std::vector<int> qprimes{0, 1, 2};
    const auto times = make_time_grid(2.0, 5);
    const auto report = suppression_study(p, g, qprimes, times, {40, 1e-10, true}, 2);
    REQUIRE(report.entries.size() == 3);
    CHECK(report.entries[0].minimal_depth == 0);
    CHECK(std::abs(report.entries[0].correlation[0] - 0.125) <= 1e-12);
    for (const auto& e : report.entries) {
        CHECK(e.chain.basis.empty());
        CHECK(e.chain.depth() > 0);
    }
    CHECK_THROWS(suppression_study({1.0, 0.2, 11}, Geometry::centered(11, 3), qprimes, times));
}

}
