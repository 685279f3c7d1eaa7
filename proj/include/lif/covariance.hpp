#pragma once

#include <Eigen/Core>
#include <memory>
#include <vector>

#include "lif/lattice.hpp"
#include "lif/precondition.hpp"

namespace lif {

// Covariance parameters of a stationary Matern field. rho has length 1
// (isotropic) or length dim (geometric anisotropic, per-axis scaling).
struct MaternParams {
    double phi = 1.0;
    Eigen::VectorXd rho;
    double nu = 0.5;
};

// Modified Bessel function of the second kind, K_nu(x), for nu >= 0, x > 0.
// Accurate to >= 10 significant digits for nu in (0, 5], x in (1e-6, 50].
// Half-integer orders short-circuit to closed forms; otherwise an ascending
// series (x <= 2, with upward order recurrence), an integral representation
// (2 < x <= 30), and the large-x asymptotic expansion (x > 30).
double bessel_k(double nu, double x);

// Standard Matern correlation f_nu(r) = 2^(1-nu)/Gamma(nu) * r^nu K_nu(r),
// with f_nu(0) = 1. Strictly decreasing; values below 1e-300 flush to 0.
double matern_correlation(double r, double nu);

// phi * f_nu(r) with r the (an)isotropically scaled distance between s and t.
double matern_cov(const double* s, const double* t, int dim, const MaternParams& p);

// Isotropic Matern spectral density
//   phi * Gamma(nu+d/2) / (Gamma(nu) pi^(d/2)) * rho^(-2nu) (rho^-2 + |w|^2)^-(nu+d/2),
// normalized so that its Fourier transform is phi * f_nu(|h|/rho).
double matern_spectral_density(const Eigen::VectorXd& omega, const MaternParams& p, int d);

// Scaled distance between two points under an isotropic or per-axis rho.
double scaled_distance(const double* s, const double* t, int dim, const Eigen::VectorXd& rho);

// K_m(s,t;rho): covariance of the preconditioned process at sites s,t,
// normalized by phi. Computed once per unordered pair (exactly symmetric).
double preconditioned_cov_entry(const PreconditionerCoeffs& pc, std::size_t s, std::size_t t,
                                const Eigen::VectorXd& rho, double nu);

struct BinCovMatrix {
    int bin_id = 0;
    Eigen::MatrixXd k;
    Eigen::VectorXd rho;
};

// Dense symmetric matrix [K_m(s,t;rho)] over the sites of one bin.
BinCovMatrix bin_cov_matrix(const PreconditionerCoeffs& pc, const std::vector<std::int32_t>& bin,
                            const Eigen::VectorXd& rho, int bin_id = 0);

}  // namespace lif
