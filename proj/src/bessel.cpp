#include <cmath>
#include <stdexcept>

#include "lif/covariance.hpp"

namespace lif {

namespace {

constexpr double kPi = 3.141592653589793238462643383279503;

bool is_half_integer(double nu) {
    const double two_nu = 2.0 * nu;
    return two_nu == std::floor(two_nu) && std::fmod(std::floor(two_nu), 2.0) == 1.0 && nu < 64.0;
}

// K_{n+1/2}(x) = sqrt(pi/(2x)) e^-x sum_{i=0}^{n} (n+i)!/(i!(n-i)!) (2x)^-i
double bessel_k_half_integer(double nu, double x) {
    const int n = static_cast<int>(std::floor(nu));
    double term = 1.0;
    double sum = 1.0;
    for (int i = 1; i <= n; ++i) {
        // ratio of consecutive coefficients: (n+i)(n-i+1)/(i * 2x)
        term *= static_cast<double>((n + i) * (n - i + 1)) / (2.0 * x * i);
        sum += term;
    }
    return std::sqrt(kPi / (2.0 * x)) * std::exp(-x) * sum;
}

// Coefficient pair of the ascending series,
//   gam1 = [1/Gamma(1-mu) - 1/Gamma(1+mu)]/(2 mu),  gam2 = [1/Gamma(1-mu) + 1/Gamma(1+mu)]/2,
// with a Taylor branch keeping full accuracy through mu = 0.
void gamma_pair(double mu, double& gam1, double& gam2) {
    if (std::abs(mu) < 1e-4) {
        const double mu2 = mu * mu;
        gam1 = -(0.57721566490153286061 - 0.042002635034095235529 * mu2 -
                 0.042197734555544336748 * mu2 * mu2);
        gam2 = 1.0 - 0.65587807152025388108 * mu2 + 0.1665386113822914895 * mu2 * mu2;
        return;
    }
    const double a = 1.0 / std::tgamma(1.0 - mu);
    const double b = 1.0 / std::tgamma(1.0 + mu);
    gam1 = (a - b) / (2.0 * mu);
    gam2 = (a + b) / 2.0;
}

// Ascending series for K_mu and K_{mu+1} with |mu| <= 1/2 and x <= 2, then
// upward recurrence K_{v+1} = K_{v-1} + (2v/x) K_v to the requested order.
double bessel_k_series(double nu, double x) {
    const int n = static_cast<int>(std::floor(nu + 0.5));
    const double mu = nu - n;
    const double xi = 0.25 * x * x;
    const double ln_half_x = std::log(0.5 * x);
    const double sigma = -mu * ln_half_x;

    double gam1, gam2;
    gamma_pair(mu, gam1, gam2);
    const double sh = std::abs(sigma) > 1e-8 ? std::sinh(sigma) / sigma : 1.0 + sigma * sigma / 6.0;
    const double fac = std::abs(mu) > 1e-8 ? (kPi * mu) / std::sin(kPi * mu)
                                           : 1.0 + (kPi * mu) * (kPi * mu) / 6.0;

    double f = fac * (gam1 * std::cosh(sigma) + gam2 * (-ln_half_x) * sh);
    double p = 0.5 * std::pow(0.5 * x, -mu) * std::tgamma(1.0 + mu);
    double q = 0.5 * std::pow(0.5 * x, mu) * std::tgamma(1.0 - mu);
    double c = 1.0;
    double sum0 = f;
    double sum1 = p;
    for (int k = 1; k < 700; ++k) {
        f = (k * f + p + q) / (k * k - mu * mu);
        p /= (k - mu);
        q /= (k + mu);
        c *= xi / k;
        sum0 += c * f;
        sum1 += c * (p - k * f);
        if (std::abs(c * f) < 1e-19 * std::abs(sum0)) break;
    }
    double k_lo = sum0;
    double k_hi = (2.0 / x) * sum1;
    for (int j = 0; j < n; ++j) {
        const double next = k_lo + (2.0 * (mu + j + 1) / x) * k_hi;
        k_lo = k_hi;
        k_hi = next;
    }
    return k_lo;
}

// K_nu(x) = int_0^inf exp(-x cosh t) cosh(nu t) dt; the integrand decays
// double-exponentially so a fixed-step trapezoid converges geometrically.
double bessel_k_integral(double nu, double x) {
    constexpr double h = 0.15;
    double sum = 0.5 * std::exp(-x);
    for (double t = h; t < 60.0; t += h) {
        const double c = std::cosh(t);
        if (x * c > 745.0) break;
        sum += std::exp(-x * c) * std::cosh(nu * t);
    }
    return sum * h;
}

// Large-x asymptotic expansion, truncated at the first negligible term.
double bessel_k_asymptotic(double nu, double x) {
    const double mu4 = 4.0 * nu * nu;
    double term = 1.0;
    double sum = 1.0;
    for (int k = 1; k < 40; ++k) {
        term *= (mu4 - (2.0 * k - 1.0) * (2.0 * k - 1.0)) / (8.0 * x * k);
        sum += term;
        if (std::abs(term) < 1e-18 * std::abs(sum)) break;
    }
    return std::sqrt(kPi / (2.0 * x)) * std::exp(-x) * sum;
}

}  // namespace

double bessel_k(double nu, double x) {
    if (!(x > 0.0)) throw std::invalid_argument("bessel_k: argument must be positive");
    if (nu < 0.0) nu = -nu;  // K_{-nu} = K_nu
    if (is_half_integer(nu)) return bessel_k_half_integer(nu, x);
    if (x <= 2.0) return bessel_k_series(nu, x);
    if (x <= 30.0) return bessel_k_integral(nu, x);
    return bessel_k_asymptotic(nu, x);
}

}  // namespace lif
