#include <doctest.h>

#include <numbers>

#include "oracles.hpp"
#include "qme/dynamics.hpp"
#include "qme/errors.hpp"

using namespace qme;

TEST_SUITE("dynamics") {

TEST_CASE("evolution matches the dense matrix exponential") {
    const ModelParams p{1.0, 0.2, 6};
    const Geometry g(6, 2, 4);
    const EvolutionEngine engine(p, g);
    const auto H = oracle::hamiltonian(6, p.J, p.h);
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 3; ++trial) {
        std::vector<Eigen::Vector2cd> sites;
        for (int i = 0; i < 6; ++i) sites.push_back(oracle::random_qubit(rng));
        const Eigen::VectorXcd psi0 = oracle::product_state(sites);
        const auto psi = PureState::from_dense(6, psi0);
        for (double t : {0.0, 0.37, 2.5, 9.0}) {
            const Eigen::VectorXcd ref = oracle::propagator(H, t) * psi0;
            const auto out = evolve(engine, psi, t);
            CHECK((out.to_dense() - ref).norm() <= 1e-10);
            const auto rho = reduced_density_matrix(out, g);
            CHECK((rho.entries - oracle::partial_trace(ref, 6, 2, 4)).cwiseAbs().maxCoeff() <= 1e-10);
        }
    }
}

TEST_CASE("bath evolution uses the bath-only Hamiltonian") {
    const ModelParams p{1.0, 0.2, 6};
    const Geometry g(6, 1, 2);
    const EvolutionEngine engine(p, g);
    // bath sites 3..6 relabelled 1..4: same couplings up to the field offset
    const int lb = 4;
    const auto dim = Eigen::Index{1} << lb;
    Eigen::MatrixXcd hb = Eigen::MatrixXcd::Zero(dim, dim);
    for (int a = 1; a <= lb; ++a) {
        for (int b = a + 1; b <= lb; ++b) {
            hb += p.J / (b - a) *
                  (oracle::site_operator(oracle::pauli_x(), a, lb) * oracle::site_operator(oracle::pauli_x(), b, lb) +
                   oracle::site_operator(oracle::pauli_y(), a, lb) * oracle::site_operator(oracle::pauli_y(), b, lb));
        }
        hb += p.h * (a + 2 - 3.0) * oracle::site_operator(oracle::pauli_z(), a, lb);
    }
    const auto bath = qtb_initial_state(1.3, lb);
    const Eigen::VectorXcd ref = oracle::propagator(hb, 4.0) * bath.to_dense();
    CHECK((evolve_bath(engine, bath, 4.0).to_dense() - ref).norm() <= 1e-10);
}

TEST_CASE("conservation along an evolution") {
    const ModelParams p{1.0, 0.2, 8};
    const Geometry g = Geometry::centered(8, 3);
    const EvolutionEngine engine(p, g);
    const auto H = oracle::hamiltonian(8, p.J, p.h);
    const auto Q = oracle::total_charge(8);
    const auto psi = compose_full_state(qos_initial_state(1.0, 3), bath_initial_state(2.0, 5), g);
    const Eigen::VectorXcd v0 = psi.to_dense();
    const Complex e0 = v0.dot(H * v0), q0 = v0.dot(Q * v0);
    for (double t = 0; t <= 20; t += 2.5) {
        const Eigen::VectorXcd v = evolve(engine, psi, t).to_dense();
        CHECK(std::abs(v.norm() - 1.0) <= 1e-9);
        CHECK(std::abs(v.dot(H * v) - e0) <= 1e-9);
        CHECK(std::abs(v.dot(Q * v) - q0) <= 1e-9);
    }
}

TEST_CASE("thermalisation times are seeded and uniform on the window") {
    EnsembleSpec e;
    e.seed = 42;
    double lo = 1e9, hi = -1e9;
    for (int k = 0; k < 500; ++k) {
        const double dt = e.sample_dt(k);
        lo = std::min(lo, dt);
        hi = std::max(hi, dt);
        CHECK(dt == e.sample_dt(k));
    }
    CHECK(lo >= 50.0);
    CHECK(hi <= 150.0);
    CHECK(hi - lo > 90.0);
    EnsembleSpec other = e;
    other.seed = 43;
    CHECK(other.sample_dt(0) != e.sample_dt(0));

    EnsembleSpec fixed;
    fixed.dt_min = fixed.dt_max = 100.0;
    CHECK(fixed.sample_dt(3) == 100.0);

    EnsembleSpec bad;
    bad.dt_min = 10;
    bad.dt_max = 5;
    CHECK_THROWS_AS(bad.validate(), ParameterError);
}

TEST_CASE("time grid") {
    const auto t = make_time_grid(20.0, 201);
    CHECK(t.size() == 201);
    CHECK(t.front() == 0.0);
    CHECK(t.back() == 20.0);
    CHECK(t[1] == doctest::Approx(0.1));
}

TEST_CASE("trajectory and ensemble averages") {
    const ModelParams p{1.0, 0.2, 7};
    const Geometry g(7, 3, 5);
    const EvolutionEngine engine(p, g);
    const auto times = make_time_grid(3.0, 13);
    const auto psi = compose_full_state(qos_initial_state(0.8, 3), qtb_initial_state(1.9, 4), g);
    const auto traj = reduced_trajectory(engine, psi, times);
    REQUIRE(traj.size() == times.size());
    for (std::size_t k = 0; k < times.size(); ++k) {
        const auto direct = reduced_density_matrix(evolve(engine, psi, times[k]), g);
        CHECK((traj[k].entries - direct.entries).cwiseAbs().maxCoeff() <= 1e-12);
    }

    EnsembleSpec e;
    e.n_samples = 5;
    const auto one = ensemble_reduced(engine, 0.8, 1.9, e, times, 1);
    const auto three = ensemble_reduced(engine, 0.8, 1.9, e, times, 3);
    // the same samples, averaged by hand
    std::vector<Eigen::MatrixXcd> manual(times.size(), Eigen::MatrixXcd::Zero(8, 8));
    for (int k = 0; k < e.n_samples; ++k) {
        const auto bath = evolve_bath(engine, qtb_initial_state(1.9, 4), e.sample_dt(k));
        const auto full = compose_full_state(qos_initial_state(0.8, 3), bath, g);
        for (std::size_t j = 0; j < times.size(); ++j)
            manual[j] += reduced_density_matrix(evolve(engine, full, times[j]), g).entries / e.n_samples;
    }
    for (std::size_t j = 0; j < times.size(); ++j) {
        CHECK((one[j].entries - three[j].entries).cwiseAbs().maxCoeff() <= 1e-12);
        CHECK((one[j].entries - manual[j]).cwiseAbs().maxCoeff() <= 1e-12);
        const auto d = diagnose(one[j]);
        CHECK(d.hermiticity <= 1e-12);
        CHECK(d.trace_error <= 1e-12);
        CHECK(d.min_eigenvalue >= -1e-12);
    }
}

}
