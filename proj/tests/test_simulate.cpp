#include <doctest.h>

#include <cmath>

#include "lif/simulate.hpp"
#include "oracles.hpp"

using namespace lif;

TEST_SUITE("simulate") {

TEST_CASE("dense covariance entries and symmetry") {
    Lattice lat;
    lat.dim = 1;
    lat.side = 1.0;
    lat.points = {0.1, 0.4, 0.9};
    MaternParams p;
    p.phi = 2.0;
    p.rho = Eigen::VectorXd::Constant(1, 0.5);
    p.nu = 0.5;
    const Eigen::MatrixXd s = dense_cov(lat, p);
    REQUIRE(s.rows() == 3);
    CHECK(s(0, 0) == 2.0);
    CHECK(s(0, 1) == doctest::Approx(2.0 * std::exp(-0.3 / 0.5)).epsilon(1e-14));
    CHECK(s(0, 2) == doctest::Approx(2.0 * std::exp(-0.8 / 0.5)).epsilon(1e-14));
    CHECK((s - s.transpose()).cwiseAbs().maxCoeff() == 0.0);

    Lattice one;
    one.dim = 1;
    one.side = 1.0;
    one.points = {0.5};
    CHECK(dense_cov(one, p)(0, 0) == 2.0);

    CHECK_THROWS_AS(dense_cov(lat, p, 2), std::invalid_argument);
}

TEST_CASE("factorization reconstructs the jittered covariance") {
    const Lattice lat = build_perturbed_lattice(5, 2, 1.0, 0.8, 3);
    MaternParams p;
    p.phi = 1.5;
    p.rho = Eigen::VectorXd::Constant(1, 0.4);
    p.nu = 0.5;
    const GpFactor f = factor_cov(lat, p);
    Eigen::MatrixXd target = dense_cov(lat, p);
    target.diagonal().array() += f.jitter_used * target.diagonal().mean();
    const double err = (f.l * f.l.transpose() - target).norm() / target.norm();
    CHECK(err <= 1e-8);
}

TEST_CASE("same seed gives the identical sample") {
    const auto lat = std::make_shared<Lattice>(build_perturbed_lattice(4, 2, 1.0, 0.5, 9));
    MaternParams p;
    p.phi = 1.0;
    p.rho = Eigen::VectorXd::Constant(1, 0.7);
    p.nu = 0.5;
    SimulationSpec spec{lat, p, 555, 1e-10, 20000};
    const Eigen::VectorXd a = sample_gp(spec);
    const Eigen::VectorXd b = sample_gp(spec);
    CHECK(a == b);
    spec.seed = 556;
    CHECK(sample_gp(spec) != a);
}

TEST_CASE("monte carlo mean and covariance at n=4") {
    Lattice lat;
    lat.dim = 1;
    lat.side = 1.0;
    lat.points = {0.2, 0.45, 0.7, 0.95};
    MaternParams p;
    p.phi = 1.3;
    p.rho = Eigen::VectorXd::Constant(1, 0.6);
    p.nu = 0.5;
    const GpFactor f = factor_cov(lat, p);
    const Eigen::MatrixXd sigma = dense_cov(lat, p);

    const int reps = 10000;
    Eigen::MatrixXd draws(reps, 4);
    for (int r = 0; r < reps; ++r)
        draws.row(r) = sample_with_factor(f, 777, static_cast<std::uint64_t>(r)).transpose();

    const Eigen::VectorXd mean = draws.colwise().mean();
    for (int i = 0; i < 4; ++i) CHECK(std::abs(mean[i]) <= 4.0 / std::sqrt(static_cast<double>(reps)) * std::sqrt(p.phi));

    const Eigen::MatrixXd cov = oracle::sample_cov(draws);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            const double se = std::sqrt((sigma(i, i) * sigma(j, j) + sigma(i, j) * sigma(i, j)) / reps);
            CHECK(std::abs(cov(i, j) - sigma(i, j)) <= 5.0 * se);
        }
}

TEST_CASE("near-singular covariance falls back without failing") {
    // three nearly coincident points with a long range: numerically rank-deficient
    Lattice lat;
    lat.dim = 1;
    lat.side = 1.0;
    lat.points = {0.5, 0.5 + 1e-9, 0.5 + 2e-9};
    MaternParams p;
    p.phi = 1.0;
    p.rho = Eigen::VectorXd::Constant(1, 10.0);
    p.nu = 0.5;
    const GpFactor f = factor_cov(lat, p);
    CHECK(std::isfinite(f.l.norm()));
    const Eigen::VectorXd z = sample_with_factor(f, 1, 0);
    CHECK(std::isfinite(z.norm()));
}

}  // TEST_SUITE
