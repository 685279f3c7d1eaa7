#include "lif/simulate.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>
#include <string>

#include "lif/rng.hpp"

namespace lif {

Eigen::MatrixXd dense_cov(const Lattice& lat, const MaternParams& p, std::size_t cap) {
    const std::size_t n = lat.n();
    if (n > cap)
        throw std::invalid_argument("dense_cov: " + std::to_string(n) +
                                    " sites exceed the dense cap of " + std::to_string(cap));
    Eigen::MatrixXd s(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        s(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = p.phi;
        for (std::size_t j = i + 1; j < n; ++j) {
            const double v = matern_cov(lat.point(i), lat.point(j), lat.dim, p);
            s(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
            s(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = v;
        }
    }
    return s;
}

GpFactor factor_cov(const Lattice& lat, const MaternParams& p, double jitter, std::size_t cap) {
    Eigen::MatrixXd sigma = dense_cov(lat, p, cap);
    const Eigen::Index n = sigma.rows();
    const double diag_mean = sigma.diagonal().mean();

    GpFactor out;
    double j = jitter > 0.0 ? jitter : 1e-10;
    for (; j <= 1e-6 + 1e-18; j *= 10.0) {
        Eigen::MatrixXd work = sigma;
        work.diagonal().array() += j * diag_mean;
        Eigen::LLT<Eigen::MatrixXd> llt(work);
        if (llt.info() == Eigen::Success) {
            out.l = llt.matrixL();
            out.jitter_used = j;
            return out;
        }
    }

    // numerically rank-deficient: clip negative eigenvalues at zero
    Eigen::MatrixXd work = sigma;
    work.diagonal().array() += 1e-6 * diag_mean;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(work);
    if (es.info() != Eigen::Success)
        throw std::runtime_error(
            "factor_cov: factorization failed after jitter escalation (n=" + std::to_string(n) +
            ", diag mean=" + std::to_string(diag_mean) +
            ", min eig unavailable); covariance is numerically singular");
    const Eigen::VectorXd clipped = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    out.l = es.eigenvectors() * clipped.asDiagonal();
    out.jitter_used = 1e-6;
    out.eigen_fallback = true;
    return out;
}

Eigen::VectorXd sample_with_factor(const GpFactor& f, std::uint64_t seed, std::uint64_t stream) {
    const Eigen::Index n = f.l.rows();
    Eigen::VectorXd z(n);
    for (Eigen::Index i = 0; i < n; ++i)
        z[i] = rng::normal(seed, stream, static_cast<std::uint64_t>(i));
    return f.l * z;
}

Eigen::VectorXd sample_gp(const SimulationSpec& spec) {
    const GpFactor f = factor_cov(*spec.lattice, spec.params, spec.jitter, spec.cap);
    return sample_with_factor(f, spec.seed, 0);
}

}  // namespace lif
