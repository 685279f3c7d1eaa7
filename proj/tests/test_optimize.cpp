#include <doctest.h>

#include <cmath>

#include "lif/optimize.hpp"
#include "lif/simulate.hpp"

using namespace lif;

namespace {

OptimizerConfig box1(double lo, double hi) {
    OptimizerConfig cfg;
    cfg.lo = Eigen::VectorXd::Constant(1, lo);
    cfg.hi = Eigen::VectorXd::Constant(1, hi);
    return cfg;
}

OptimizerConfig box2(double lo, double hi) {
    OptimizerConfig cfg;
    cfg.lo = Eigen::VectorXd::Constant(2, lo);
    cfg.hi = Eigen::VectorXd::Constant(2, hi);
    return cfg;
}

Eigen::VectorXd vec1(double x) { return Eigen::VectorXd::Constant(1, x); }

}  // namespace

TEST_SUITE("optimize") {

TEST_CASE("finite differences on simple functions") {
    const OptimizerConfig cfg = box1(-10, 10);
    const Objective sq = [](const Eigen::VectorXd& x) { return x[0] * x[0]; };
    CHECK(fd_gradient(sq, vec1(1.0), cfg)[0] == doctest::Approx(2.0).epsilon(1e-6));

    const Objective c = [](const Eigen::VectorXd&) { return 4.2; };
    CHECK(fd_gradient(c, vec1(0.3), cfg)[0] == 0.0);

    const OptimizerConfig cfg2 = box2(-10, 10);
    const Objective bilinear = [](const Eigen::VectorXd& x) { return x[0] * x[1]; };
    Eigen::VectorXd x(2);
    x << 2.0, 3.0;
    const Eigen::VectorXd g = fd_gradient(bilinear, x, cfg2);
    CHECK(g[0] == doctest::Approx(3.0).epsilon(1e-6));
    CHECK(g[1] == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("finite differences switch to one-sided at bounds") {
    const OptimizerConfig cfg = box1(0, 1);
    const Objective lin = [](const Eigen::VectorXd& x) { return 3.0 * x[0]; };
    CHECK(fd_gradient(lin, vec1(1.0), cfg)[0] == doctest::Approx(3.0).epsilon(1e-9));
    CHECK(fd_gradient(lin, vec1(0.0), cfg)[0] == doctest::Approx(3.0).epsilon(1e-9));
}

TEST_CASE("maximize a 1-d parabola") {
    const Objective f = [](const Eigen::VectorXd& x) { return -(x[0] - 3.0) * (x[0] - 3.0); };
    const MaximizeResult r = maximize(f, vec1(0.0), box1(0, 10));
    CHECK(std::abs(r.x[0] - 3.0) <= 1e-4);
    CHECK(r.converged);
    CHECK(!r.bound_active[0]);
    for (std::size_t i = 1; i < r.trace.size(); ++i) CHECK(r.trace[i] >= r.trace[i - 1]);
}

TEST_CASE("maximize a linear objective ends on the bound") {
    const Objective f = [](const Eigen::VectorXd& x) { return x[0]; };
    const MaximizeResult r = maximize(f, vec1(0.5), box1(0, 1));
    CHECK(r.x[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r.bound_active[0]);
}

TEST_CASE("maximize an anisotropic 2-d quadratic") {
    const Objective f = [](const Eigen::VectorXd& x) {
        return -(x[0] - 1.0) * (x[0] - 1.0) - 10.0 * (x[1] - 2.0) * (x[1] - 2.0);
    };
    Eigen::VectorXd x0(2);
    x0 << 4.0, 4.0;
    const MaximizeResult r = maximize(f, x0, box2(0, 5));
    CHECK(std::abs(r.x[0] - 1.0) <= 1e-3);
    CHECK(std::abs(r.x[1] - 2.0) <= 1e-3);
    CHECK(r.converged);
}

TEST_CASE("interior optimum has a small projected gradient") {
    const Objective f = [](const Eigen::VectorXd& x) {
        return -(x[0] - 2.0) * (x[0] - 2.0) - 0.5 * (x[1] - 1.0) * (x[1] - 1.0);
    };
    Eigen::VectorXd x0(2);
    x0 << 0.5, 4.5;
    const OptimizerConfig cfg = box2(0, 5);
    const MaximizeResult r = maximize(f, x0, cfg);
    const Eigen::VectorXd g = fd_gradient(f, r.x, cfg);
    CHECK(g.norm() <= 1e-2 * (1.0 + std::abs(r.fx)));
}

TEST_CASE("x0 outside the box and bad configs are rejected") {
    const Objective f = [](const Eigen::VectorXd& x) { return -x.squaredNorm(); };
    CHECK_THROWS_AS(maximize(f, vec1(2.0), box1(0, 1)), std::invalid_argument);
    OptimizerConfig bad = box1(1, 0);
    CHECK_THROWS_AS(maximize(f, vec1(0.5), bad), std::invalid_argument);
}

TEST_CASE("estimate: fixed-rho on simulated data") {
    const auto lat = std::make_shared<Lattice>(build_perturbed_lattice(16, 2, 1.0, 1.0, 61));
    const PreconditionerCoeffs pc = precondition_all(*lat, 2, 0.5, 2);
    MaternParams truth;
    truth.phi = 1.0;
    truth.rho = Eigen::VectorXd::Constant(1, 1.0);  // rho0 = side/5-ish for a real signal
    truth.nu = 0.5;
    SimulationSpec spec{lat, truth, 333, 1e-10, 20000};
    const PreconditionedSample y = apply_preconditioner(pc, sample_gp(spec));
    const Partition part = partition_uniform(lat->n(), 1, 1);

    EstimateSpec es;
    es.mode = EstimateSpec::Mode::FixedRho;
    es.rho_fixed = Eigen::VectorXd::Constant(1, 2.0);
    const EstimationResult r = estimate(y, pc, part, es, truth);
    CHECK(r.converged);
    CHECK(r.iterations == 0);
    REQUIRE(r.xi_hat.has_value());
    CHECK(std::isfinite((*r.xi_hat)[0]));
    CHECK((*r.xi_hat)[0] > 0.0);
    CHECK(r.rho_hat[0] == 2.0);

    const EstimationResult no_truth = estimate(y, pc, part, es);
    CHECK(!no_truth.xi_hat.has_value());
    CHECK(no_truth.phi_hat == r.phi_hat);
}

TEST_CASE("estimate: profile mode recovers a usable range on simulated data") {
    const auto lat = std::make_shared<Lattice>(build_perturbed_lattice(14, 2, 1.0, 0.0, 71));
    const PreconditionerCoeffs pc = precondition_all(*lat, 2, 0.5, 2);
    MaternParams truth;
    truth.phi = 1.0;
    truth.rho = Eigen::VectorXd(2);
    truth.rho << 0.5, 1.0;
    truth.nu = 0.5;
    SimulationSpec spec{lat, truth, 991, 1e-10, 20000};
    const PreconditionedSample y = apply_preconditioner(pc, sample_gp(spec));
    const Partition part = partition_uniform(lat->n(), 1, 1);

    EstimateSpec es;
    es.mode = EstimateSpec::Mode::Profile;
    es.x0 = Eigen::VectorXd(2);
    es.x0 << 0.8, 0.8;
    es.opt.lo = Eigen::VectorXd::Constant(2, 0.01);
    es.opt.hi = Eigen::VectorXd::Constant(2, 5.0);
    const EstimationResult r = estimate(y, pc, part, es, truth);
    REQUIRE(r.xi_hat.has_value());
    CHECK(r.xi_hat->size() == 2);
    CHECK(std::isfinite((*r.xi_hat)[0]));
    CHECK(std::isfinite((*r.xi_hat)[1]));
    for (std::size_t i = 1; i < r.trace.size(); ++i) CHECK(r.trace[i] >= r.trace[i - 1]);
}

}  // TEST_SUITE
