#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <memory>

#include "lif/covariance.hpp"
#include "lif/lattice.hpp"

namespace lif {

struct SimulationSpec {
    std::shared_ptr<const Lattice> lattice;
    MaternParams params;
    std::uint64_t seed = 0;
    double jitter = 1e-10;      // scaled by mean diagonal, escalates x10 up to 1e-6
    std::size_t cap = 20000;    // dense-matrix site cap
};

// Dense n x n Matern covariance; each entry computed once and mirrored.
Eigen::MatrixXd dense_cov(const Lattice& lat, const MaternParams& p, std::size_t cap = 20000);

// Factor L with L L' = Sigma + jitter * mean(diag) * I. Cholesky with jitter
// escalation, then an eigenvalue-clipping fallback for numerically
// rank-deficient covariances.
struct GpFactor {
    Eigen::MatrixXd l;
    double jitter_used = 0.0;
    bool eigen_fallback = false;
};

GpFactor factor_cov(const Lattice& lat, const MaternParams& p, double jitter = 1e-10,
                    std::size_t cap = 20000);

// L z with z standard normal from the (seed, stream) counter stream;
// deterministic per seed and reusable across replicates via the stream id.
Eigen::VectorXd sample_with_factor(const GpFactor& f, std::uint64_t seed, std::uint64_t stream = 0);

// One-shot: factor the spec's covariance and draw a sample.
Eigen::VectorXd sample_gp(const SimulationSpec& spec);

}  // namespace lif
