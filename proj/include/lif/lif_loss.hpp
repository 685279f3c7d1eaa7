#pragma once

#include <Eigen/Core>
#include <vector>

#include "lif/covariance.hpp"
#include "lif/partition.hpp"
#include "lif/precondition.hpp"

namespace lif {

// Evaluation knobs. Strategy::Filtered precomputes the raw kernel matrix
// F(u,v) = f_nu(d(u,v)/rho) once and assembles K_m entries by coefficient
// gathers; Direct evaluates the kernel inside the double stencil sum. Auto
// picks Filtered when the pair count justifies the n^2/2 kernel evaluations.
// Both strategies reduce per-site partials in a fixed order, so results are
// independent of the thread count.
struct EvalOptions {
    enum class Strategy { Auto, Direct, Filtered };
    int threads = 1;
    Strategy strategy = Strategy::Auto;
};

// Accumulated quadratic forms of the block-diagonal loss at one rho:
//   a = sum_t Y_t' K_t(rho) Y_t,   b = sum_t ||K_t(rho)||_F^2.
// Profile loss = a/sqrt(b), closed-form variance estimate phi_hat = a/b.
struct ProfileStats {
    double a = 0.0;
    double b = 0.0;
    Eigen::VectorXd rho;
    bool a_nonpositive = false;
};

struct LifEvaluation {
    double loss = 0.0;
    std::vector<double> per_bin;
};

ProfileStats profile_stats(const PreconditionedSample& y, const PreconditionerCoeffs& pc,
                           const Partition& part, const Eigen::VectorXd& rho,
                           const EvalOptions& opts = {});

// phi * a - phi^2/2 * b, with the per-bin decomposition.
LifEvaluation lif_loss(const PreconditionedSample& y, const PreconditionerCoeffs& pc,
                       const Partition& part, double phi, const Eigen::VectorXd& rho,
                       const EvalOptions& opts = {});

// a/b. Negative values are reported as-is (a_nonpositive flags them).
double phi_hat(const ProfileStats& ps);

// phi * rho_i^(-2 nu), componentwise over the range vector.
Eigen::VectorXd microergodic(double phi, const Eigen::VectorXd& rho, double nu);

// Singleton-bin special case: phi_hat(rho) * rho^(-2 nu) at an arbitrary rho.
// Identical to the generic pipeline with partition_singleton.
double anderes_estimate(const PreconditionedSample& y, const PreconditionerCoeffs& pc,
                        double rho, const EvalOptions& opts = {});

// Effective-rank diagnostic Psi = ||K^B||_op * sqrt(n) / ||K^B||_F, where the
// operator norm of the block-diagonal matrix is the max over blocks.
double effective_rank_psi(const PreconditionerCoeffs& pc, const Partition& part,
                          const Eigen::VectorXd& rho, std::size_t max_n = 4000,
                          const EvalOptions& opts = {});

// Psi from explicit blocks (the identity-blocks minimum is exactly 1).
double psi_from_blocks(const std::vector<Eigen::MatrixXd>& blocks);

}  // namespace lif
