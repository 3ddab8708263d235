#include <doctest.h>

#include <numbers>

#include "oracles.hpp"
#include "qme/theory.hpp"

using namespace qme;
using std::numbers::pi;

namespace {

// Exact Tr_B[U (|s><s| (x) rho_B) U^dagger] with the QOS on sites 1..ls.
Eigen::MatrixXcd exact_reduced(const ModelParams& p, int ls, const Eigen::VectorXcd& s, const Eigen::MatrixXd& rho_b,
                               double t) {
    const Eigen::MatrixXcd rho_s = s * s.adjoint();
    const Eigen::MatrixXcd rho0 = Eigen::kroneckerProduct(rho_b.cast<Complex>(), rho_s).eval();
    const Eigen::MatrixXcd u = oracle::propagator(oracle::hamiltonian(p.L, p.J, p.h), t);
    const Eigen::MatrixXcd rho = u * rho0 * u.adjoint();
    const auto dim_s = Eigen::Index{1} << ls;
    const auto dim_b = rho.rows() / dim_s;
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(dim_s, dim_s);
    for (Eigen::Index b = 0; b < dim_b; ++b) out += rho.block(b * dim_s, b * dim_s, dim_s, dim_s);
    return out;
}

}  // namespace

TEST_SUITE("theory") {

TEST_CASE("dephased bath") {
    const auto d = dephased_bath(qtb_initial_state(pi, 4));
    CHECK(d.dimensions == std::vector<std::size_t>{1, 4, 6, 4, 1});
    CHECK(d.occupations[0] == doctest::Approx(0.25));
    CHECK(d.occupations[1] == doctest::Approx(0.0));
    CHECK(d.occupations[2] == doctest::Approx(0.5));
    CHECK(d.occupations[4] == doctest::Approx(0.25));
    CHECK(d.trace() == doctest::Approx(1.0));
    CHECK(d.dense().trace() == doctest::Approx(1.0));

    const auto eig = dephased_bath(PureState::basis_state(4, {0b0101}));
    CHECK(eig.occupations[2] == doctest::Approx(1.0));
    CHECK(eig.dense()(0b0011, 0b0011) == doctest::Approx(1.0 / 6));
}

TEST_CASE("prediction equals exact evolution when only the element's sectors are populated") {
    const ModelParams p{1.0, 0.2, 6};
    const Geometry g(6, 1, 3);
    const EvolutionEngine engine(p, g);
    const auto bath = dephased_bath(bath_initial_state(1.7, 3));
    const QosElement el{{0b001}, {0b000}};
    // amplitudes only in QOS sectors n_up = 1 and 0
    Eigen::VectorXcd s = Eigen::VectorXcd::Zero(8);
    s[0] = 0.6;
    s[1] = Complex(0.3, 0.4);
    s[2] = 0.5;
    s[4] = Complex(0.0, -0.3);
    s /= s.norm();
    const std::vector<double> times{0.0, 0.5, 1.7, 4.0};
    const auto pred = predict_offdiagonal(engine, s, bath, el, times);
    for (std::size_t j = 0; j < times.size(); ++j) {
        const auto ref = exact_reduced(p, 3, s, bath.dense(), times[j]);
        CHECK(std::abs(pred.total[j] - ref(el.row.bits, el.col.bits)) <= 1e-10);
        Complex sum{};
        for (const auto& m : pred.per_m) sum += m[j];
        CHECK(sum == pred.total[j]);
    }
    CHECK(std::abs(pred.total[0] - s[1] * std::conj(s[0])) <= 1e-12);
}

TEST_CASE("t = 0 reproduces the product-state element for the rotated QOS") {
    const ModelParams p{1.0, 0.2, 8};
    const Geometry g = Geometry::centered(8, 3);
    const EvolutionEngine engine(p, g);
    const Eigen::VectorXcd s = qos_initial_state(1.2, 3).to_dense();
    const auto bath = dephased_bath(bath_initial_state(2.0, 5));
    for (std::uint32_t r = 0; r < 8; ++r) {
        for (std::uint32_t c = 0; c < 8; ++c) {
            const std::vector<double> t0{0.0};
            const auto pred = predict_offdiagonal(engine, s, bath, {{r}, {c}}, t0);
            CHECK(std::abs(pred.total[0] - s[r] * std::conj(s[c])) <= 1e-12);
        }
    }
}

TEST_CASE("diagonal elements are real and phases transform covariantly") {
    const ModelParams p{1.0, 0.2, 7};
    const Geometry g(7, 3, 5);
    const EvolutionEngine engine(p, g);
    const auto bath = dephased_bath(qtb_initial_state(1.0, 4));
    const Eigen::VectorXcd s = qos_initial_state(1.1, 3).to_dense();
    const auto times = make_time_grid(5.0, 11);

    const auto diag = predict_offdiagonal(engine, s, bath, {{0b011}, {0b011}}, times);
    for (const auto& z : diag.total) CHECK(std::abs(z.imag()) <= 1e-12);

    const QosElement el{{0b010}, {0b011}};
    const auto base = predict_offdiagonal(engine, s, bath, el, times);
    const double phi1 = 0.7, phi2 = -1.3;
    Eigen::VectorXcd rotated = s;
    for (std::uint32_t a = 0; a < 8; ++a) {
        const int n = std::popcount(a);
        if (n == 1) rotated[a] *= std::polar(1.0, phi1);
        if (n == 2) rotated[a] *= std::polar(1.0, phi2);
    }
    const auto moved = predict_offdiagonal(engine, rotated, bath, el, times);
    const auto global = predict_offdiagonal(engine, s * std::polar(1.0, 0.4), bath, el, times);
    for (std::size_t j = 0; j < times.size(); ++j) {
        CHECK(std::abs(moved.total[j] - std::polar(1.0, phi1 - phi2) * base.total[j]) <= 1e-12);
        CHECK(std::abs(global.total[j] - base.total[j]) <= 1e-12);
    }
}

TEST_CASE("transition weights sum to the bath sector dimension") {
    const ModelParams p{1.0, 0.2, 8};
    const EvolutionEngine engine(p, Geometry::centered(8, 3));
    const QosElement el{{0b110}, {0b100}};
    for (int m = 0; m <= 5; ++m) {
        const auto w = transition_weights(engine, el, m);
        CHECK(w.rows() == static_cast<Eigen::Index>(binomial(8, 2 + m)));
        CHECK(w.sum() == doctest::Approx(static_cast<double>(binomial(5, m))));
    }
}

TEST_CASE("per-m timescales skip empty sectors and truncation stays close") {
    const ModelParams p{1.0, 0.2, 8};
    const EvolutionEngine engine(p, Geometry::centered(8, 3));
    const Eigen::VectorXcd s = qos_initial_state(pi / 2, 3).to_dense();
    // theta_b = 0 bath: every pair in (|ud> + |du>)/sqrt2, a single charge sector
    const auto bath = dephased_bath(bath_initial_state(0.0, 5));
    const auto times = make_time_grid(10.0, 101);
    const QosElement el{{0b001}, {0b000}};
    const auto pred = predict_offdiagonal(engine, s, bath, el, times);
    const auto scales = per_m_timescale(pred);
    int present = 0;
    for (const auto& sc : scales) present += sc.fit.has_value() ? 1 : 0;
    CHECK(present == 1);

    PredictionOptions opt;
    opt.truncation = 1e-6;
    const auto approx = predict_offdiagonal(engine, s, bath, el, times, opt);
    for (std::size_t j = 0; j < times.size(); ++j) CHECK(std::abs(approx.total[j] - pred.total[j]) <= 1e-5);
}

}
