#pragma once

#include <Eigen/Core>
#include <functional>
#include <optional>
#include <vector>

#include "lif/lif_loss.hpp"

namespace lif {

// Box-constrained quasi-Newton maximization with finite-difference gradients:
// step 1e-3, stop on relative objective change below 1e-5 or 50 iterations.
struct OptimizerConfig {
    Eigen::VectorXd lo, hi;
    double fd_step = 1e-3;
    double rel_tol = 1e-5;
    int max_iter = 50;
    int memory = 10;
};

using Objective = std::function<double(const Eigen::VectorXd&)>;

// Central differences (f(x+h e_i) - f(x-h e_i)) / 2h, one-sided at active
// bounds, zero where the box is thinner than the step.
Eigen::VectorXd fd_gradient(const Objective& f, const Eigen::VectorXd& x,
                            const OptimizerConfig& cfg);

struct MaximizeResult {
    Eigen::VectorXd x;
    double fx = 0.0;
    std::vector<double> trace;  // accepted objective values, nondecreasing
    int iterations = 0;
    bool converged = false;
    std::vector<bool> bound_active;
};

// Limited-memory BFGS with gradient projection onto the box and a
// backtracking line search along the projected path. Line-search failure
// returns the best iterate with converged = false.
MaximizeResult maximize(const Objective& f, const Eigen::VectorXd& x0, const OptimizerConfig& cfg);

struct EstimationResult {
    double phi_hat = 0.0;
    Eigen::VectorXd rho_hat;
    std::optional<Eigen::VectorXd> xi_hat;  // present when the truth is supplied
    int iterations = 0;
    bool converged = false;
    std::vector<bool> bound_active;
    std::vector<double> trace;
    bool a_nonpositive = false;
    double profile_loss = 0.0;  // a/sqrt(b) at rho_hat
};

struct EstimateSpec {
    enum class Mode { FixedRho, Profile } mode = Mode::FixedRho;
    Eigen::VectorXd rho_fixed;  // FixedRho: evaluate phi_hat at this rho
    Eigen::VectorXd x0;         // Profile: optimizer start
    OptimizerConfig opt;
};

// FixedRho: phi_hat = a/b at the given rho, no iteration. Profile: maximize
// a/sqrt(b) over rho, then phi_hat = a/b at the maximizer. With the truth
// supplied, xi_hat_i = phi_hat rho_hat_i^(-2nu) / (phi0 rho0_i^(-2nu)).
EstimationResult estimate(const PreconditionedSample& y, const PreconditionerCoeffs& pc,
                          const Partition& part, const EstimateSpec& spec,
                          const std::optional<MaternParams>& truth = std::nullopt,
                          const EvalOptions& opts = {});

}  // namespace lif
