#include "lif/covariance.hpp"

#include <cmath>
#include <stdexcept>

namespace lif {

namespace {

constexpr double kPi = 3.141592653589793238462643383279503;

bool half_integer(double nu) {
    const double two_nu = 2.0 * nu;
    return two_nu == std::floor(two_nu) && std::fmod(std::floor(two_nu), 2.0) == 1.0 && nu < 64.0;
}

// f_{n+1/2}(r) = e^-r * n!/(2n)! * sum_{i=0}^{n} (n+i)!/(i!(n-i)!) (2r)^{n-i}
double matern_half_integer(double r, double nu) {
    const int n = static_cast<int>(std::floor(nu));
    const double e = std::exp(-r);
    if (e == 0.0) return 0.0;
    double coef = 1.0;  // (n+i)!/(i!(n-i)!) at i=0 is 1
    double sum = std::pow(2.0 * r, n);
    double pw = sum;
    for (int i = 1; i <= n; ++i) {
        coef *= static_cast<double>((n + i) * (n - i + 1)) / i;
        pw = std::pow(2.0 * r, n - i);
        sum += coef * pw;
    }
    double nfact = 1.0, n2fact = 1.0;
    for (int i = 2; i <= n; ++i) nfact *= i;
    for (int i = 2; i <= 2 * n; ++i) n2fact *= i;
    return e * nfact / n2fact * sum;
}

}  // namespace

double matern_correlation(double r, double nu) {
    if (!(nu > 0.0)) throw std::invalid_argument("matern_correlation: nu must be positive");
    if (r < 0.0) throw std::invalid_argument("matern_correlation: distance must be >= 0");
    if (r == 0.0) return 1.0;
    if (r > 745.0) return 0.0;  // e^-r underflows
    if (nu == 0.5) return std::exp(-r);
    if (nu == 1.5) {
        const double v = (1.0 + r) * std::exp(-r);
        return v > 1e-300 ? v : 0.0;
    }
    if (nu == 2.5) {
        const double v = (1.0 + r + r * r / 3.0) * std::exp(-r);
        return v > 1e-300 ? v : 0.0;
    }
    double v;
    if (half_integer(nu)) {
        v = matern_half_integer(r, nu);
    } else {
        if (r < 1e-30) return 1.0;
        v = std::pow(2.0, 1.0 - nu) / std::tgamma(nu) * std::pow(r, nu) * bessel_k(nu, r);
    }
    if (!(v > 1e-300)) return 0.0;
    return v < 1.0 ? v : 1.0;
}

double scaled_distance(const double* s, const double* t, int dim, const Eigen::VectorXd& rho) {
    double acc = 0.0;
    if (rho.size() == 1) {
        for (int a = 0; a < dim; ++a) {
            const double d = t[a] - s[a];
            acc += d * d;
        }
        return std::sqrt(acc) / rho[0];
    }
    if (rho.size() != dim) throw std::invalid_argument("scaled_distance: rho length must be 1 or dim");
    for (int a = 0; a < dim; ++a) {
        const double d = (t[a] - s[a]) / rho[a];
        acc += d * d;
    }
    return std::sqrt(acc);
}

double matern_cov(const double* s, const double* t, int dim, const MaternParams& p) {
    return p.phi * matern_correlation(scaled_distance(s, t, dim, p.rho), p.nu);
}

double matern_spectral_density(const Eigen::VectorXd& omega, const MaternParams& p, int d) {
    if (p.rho.size() != 1)
        throw std::invalid_argument("matern_spectral_density: anisotropic params unsupported");
    const double rho = p.rho[0];
    const double norm = p.phi * std::tgamma(p.nu + 0.5 * d) /
                        (std::tgamma(p.nu) * std::pow(kPi, 0.5 * d));
    return norm * std::pow(rho, -2.0 * p.nu) *
           std::pow(1.0 / (rho * rho) + omega.squaredNorm(), -(p.nu + 0.5 * d));
}

double preconditioned_cov_entry(const PreconditionerCoeffs& pc, std::size_t s, std::size_t t,
                                const Eigen::VectorXd& rho, double nu) {
    if (t < s) std::swap(s, t);  // canonical order keeps K(s,t) == K(t,s) exact
    const Lattice& lat = *pc.lattice;
    const SiteStencil& a = pc.sites[s];
    const SiteStencil& b = pc.sites[t];
    const double scale = std::pow(static_cast<double>(pc.n_scale), 2.0 * nu);
    double acc = 0.0;
    for (std::size_t i = 0; i < a.neighbors.size(); ++i) {
        const double* ps = lat.point(static_cast<std::size_t>(a.neighbors[i]));
        double row = 0.0;
        for (std::size_t j = 0; j < b.neighbors.size(); ++j) {
            const double* pt = lat.point(static_cast<std::size_t>(b.neighbors[j]));
            row += b.coeffs[j] * matern_correlation(scaled_distance(ps, pt, lat.dim, rho), nu);
        }
        acc += a.coeffs[i] * row;
    }
    return scale * acc;
}

BinCovMatrix bin_cov_matrix(const PreconditionerCoeffs& pc, const std::vector<std::int32_t>& bin,
                            const Eigen::VectorXd& rho, int bin_id) {
    if (bin.empty()) throw std::invalid_argument("bin_cov_matrix: empty bin");
    const Eigen::Index b = static_cast<Eigen::Index>(bin.size());
    BinCovMatrix out;
    out.bin_id = bin_id;
    out.rho = rho;
    out.k.resize(b, b);
    for (Eigen::Index i = 0; i < b; ++i) {
        for (Eigen::Index j = i; j < b; ++j) {
            const double v = preconditioned_cov_entry(pc, static_cast<std::size_t>(bin[i]),
                                                      static_cast<std::size_t>(bin[j]), rho, pc.nu);
            out.k(i, j) = v;
            out.k(j, i) = v;
        }
    }
    return out;
}

}  // namespace lif
