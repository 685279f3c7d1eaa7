#include "lif/lif_loss.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>

#include "lif/parallel.hpp"

namespace lif {

namespace {

// Per-site (a, b) partials. Each unordered within-bin pair is charged to its
// larger site index, so every K entry is computed once; the caller reduces the
// partials bin-by-bin in member order.
struct RowPartials {
    std::vector<double> a, b;
};

RowPartials direct_rows(const PreconditionedSample& y, const PreconditionerCoeffs& pc,
                        const Partition& part, const Eigen::VectorXd& rho, int threads) {
    const std::size_t n = pc.lattice->n();
    RowPartials rows{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
    parallel_for(n, threads, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t j = lo; j < hi; ++j) {
            const auto& members = part.bins[static_cast<std::size_t>(part.bin_of[j])];
            const double yj = y.values[static_cast<Eigen::Index>(j)];
            double aj = 0.0, bj = 0.0;
            for (std::int32_t i : members) {
                if (static_cast<std::size_t>(i) >= j) break;  // members ascend
                const double k = preconditioned_cov_entry(pc, static_cast<std::size_t>(i), j, rho, pc.nu);
                aj += 2.0 * k * y.values[i] * yj;
                bj += 2.0 * k * k;
            }
            const double kd = preconditioned_cov_entry(pc, j, j, rho, pc.nu);
            aj += kd * yj * yj;
            bj += kd * kd;
            rows.a[j] = aj;
            rows.b[j] = bj;
        }
    });
    return rows;
}

RowPartials filtered_rows(const PreconditionedSample& y, const PreconditionerCoeffs& pc,
                          const Partition& part, const Eigen::VectorXd& rho, int threads) {
    const Lattice& lat = *pc.lattice;
    const std::size_t n = lat.n();
    const double nu = pc.nu;

    Eigen::MatrixXd f(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    parallel_for(n, threads, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) {
            const double* pi = lat.point(i);
            for (std::size_t j = 0; j <= i; ++j) {
                const double v =
                    matern_correlation(scaled_distance(pi, lat.point(j), lat.dim, rho), nu);
                f(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
                f(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = v;
            }
        }
    });

    const double scale = std::pow(static_cast<double>(pc.n_scale), 2.0 * nu);
    auto entry = [&](std::size_t s, std::size_t t) {
        if (t < s) std::swap(s, t);  // same canonical order as the direct path
        const SiteStencil& sa = pc.sites[s];
        const SiteStencil& sb = pc.sites[t];
        double acc = 0.0;
        for (std::size_t p = 0; p < sa.neighbors.size(); ++p) {
            // column of the symmetric F doubles as its row
            const double* frow = f.data() + static_cast<std::size_t>(sa.neighbors[p]) * n;
            double row = 0.0;
            for (std::size_t q = 0; q < sb.neighbors.size(); ++q)
                row += sb.coeffs[q] * frow[static_cast<std::size_t>(sb.neighbors[q])];
            acc += sa.coeffs[p] * row;
        }
        return scale * acc;
    };

    RowPartials rows{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
    parallel_for(n, threads, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t j = lo; j < hi; ++j) {
            const auto& members = part.bins[static_cast<std::size_t>(part.bin_of[j])];
            const double yj = y.values[static_cast<Eigen::Index>(j)];
            double aj = 0.0, bj = 0.0;
            for (std::int32_t i : members) {
                if (static_cast<std::size_t>(i) >= j) break;
                const double k = entry(static_cast<std::size_t>(i), j);
                aj += 2.0 * k * y.values[i] * yj;
                bj += 2.0 * k * k;
            }
            const double kd = entry(j, j);
            aj += kd * yj * yj;
            bj += kd * kd;
            rows.a[j] = aj;
            rows.b[j] = bj;
        }
    });
    return rows;
}

RowPartials compute_rows(const PreconditionedSample& y, const PreconditionerCoeffs& pc,
                         const Partition& part, const Eigen::VectorXd& rho,
                         const EvalOptions& opts) {
    const std::size_t n = pc.lattice->n();
    if (static_cast<std::size_t>(y.values.size()) != n || !y.site_indices.empty())
        throw std::invalid_argument("lif: sample must cover all lattice sites");
    if (part.bin_of.size() != n)
        throw std::invalid_argument("lif: partition does not match lattice size");

    EvalOptions::Strategy s = opts.strategy;
    if (s == EvalOptions::Strategy::Auto) {
        const std::size_t pairs = part.pair_count();
        const bool filtered = n >= 512 && n <= 12000 && pairs >= n * n / 32;
        s = filtered ? EvalOptions::Strategy::Filtered : EvalOptions::Strategy::Direct;
    }
    return s == EvalOptions::Strategy::Filtered ? filtered_rows(y, pc, part, rho, opts.threads)
                                                : direct_rows(y, pc, part, rho, opts.threads);
}

// Fixed reduction order: bins in id order, members in ascending site order.
void reduce_rows(const RowPartials& rows, const Partition& part, std::vector<double>& a_bin,
                 std::vector<double>& b_bin) {
    const std::size_t nb = part.bins.size();
    a_bin.assign(nb, 0.0);
    b_bin.assign(nb, 0.0);
    for (std::size_t t = 0; t < nb; ++t) {
        double a = 0.0, b = 0.0;
        for (std::int32_t j : part.bins[t]) {
            a += rows.a[static_cast<std::size_t>(j)];
            b += rows.b[static_cast<std::size_t>(j)];
        }
        a_bin[t] = a;
        b_bin[t] = b;
    }
}

double largest_eigenvalue(const Eigen::MatrixXd& m) {
    const Eigen::Index n = m.rows();
    if (n == 1) return std::abs(m(0, 0));
    if (n <= 128) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
        return es.eigenvalues().cwiseAbs().maxCoeff();
    }
    // power iteration; blocks are PSD up to roundoff so this converges to the
    // operator norm, and the deterministic start keeps the diagnostic stable
    Eigen::VectorXd v = Eigen::VectorXd::Ones(n) / std::sqrt(static_cast<double>(n));
    double lambda = 0.0;
    for (int it = 0; it < 5000; ++it) {
        const Eigen::VectorXd w = m * v;
        const double next = std::abs(v.dot(w));  // Rayleigh quotient, |v| = 1
        const double norm = w.norm();
        if (norm == 0.0) return 0.0;
        v = w / norm;
        if (it > 3 && std::abs(next - lambda) <= 1e-10 * std::max(1.0, std::abs(next))) {
            lambda = next;
            break;
        }
        lambda = next;
    }
    return lambda;
}

}  // namespace

ProfileStats profile_stats(const PreconditionedSample& y, const PreconditionerCoeffs& pc,
                           const Partition& part, const Eigen::VectorXd& rho,
                           const EvalOptions& opts) {
    const RowPartials rows = compute_rows(y, pc, part, rho, opts);
    std::vector<double> a_bin, b_bin;
    reduce_rows(rows, part, a_bin, b_bin);
    ProfileStats ps;
    ps.rho = rho;
    for (std::size_t t = 0; t < a_bin.size(); ++t) {
        ps.a += a_bin[t];
        ps.b += b_bin[t];
    }
    ps.a_nonpositive = !(ps.a > 0.0);
    if (!(ps.b > 0.0)) throw std::runtime_error("profile_stats: zero Frobenius mass");
    return ps;
}

LifEvaluation lif_loss(const PreconditionedSample& y, const PreconditionerCoeffs& pc,
                       const Partition& part, double phi, const Eigen::VectorXd& rho,
                       const EvalOptions& opts) {
    if (!(phi > 0.0)) throw std::invalid_argument("lif_loss: phi must be positive");
    const RowPartials rows = compute_rows(y, pc, part, rho, opts);
    std::vector<double> a_bin, b_bin;
    reduce_rows(rows, part, a_bin, b_bin);
    LifEvaluation ev;
    ev.per_bin.resize(a_bin.size());
    for (std::size_t t = 0; t < a_bin.size(); ++t) {
        ev.per_bin[t] = phi * a_bin[t] - 0.5 * phi * phi * b_bin[t];
        ev.loss += ev.per_bin[t];
    }
    return ev;
}

double phi_hat(const ProfileStats& ps) {
    if (!(ps.b > 0.0)) throw std::invalid_argument("phi_hat: b must be positive");
    return ps.a / ps.b;
}

Eigen::VectorXd microergodic(double phi, const Eigen::VectorXd& rho, double nu) {
    if ((rho.array() <= 0.0).any()) throw std::invalid_argument("microergodic: rho must be positive");
    Eigen::VectorXd out(rho.size());
    for (Eigen::Index i = 0; i < rho.size(); ++i) out[i] = phi * std::pow(rho[i], -2.0 * nu);
    return out;
}

double anderes_estimate(const PreconditionedSample& y, const PreconditionerCoeffs& pc, double rho,
                        const EvalOptions& opts) {
    const Partition singles = partition_singleton(pc.lattice->n());
    Eigen::VectorXd r(1);
    r[0] = rho;
    const ProfileStats ps = profile_stats(y, pc, singles, r, opts);
    return microergodic(phi_hat(ps), r, pc.nu)[0];
}

double effective_rank_psi(const PreconditionerCoeffs& pc, const Partition& part,
                          const Eigen::VectorXd& rho, std::size_t max_n, const EvalOptions& opts) {
    const std::size_t n = pc.lattice->n();
    if (n > max_n) throw std::invalid_argument("effective_rank_psi: instance larger than max_n");
    std::vector<Eigen::MatrixXd> blocks(part.bins.size());
    parallel_for(part.bins.size(), opts.threads, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t t = lo; t < hi; ++t)
            blocks[t] = bin_cov_matrix(pc, part.bins[t], rho, static_cast<int>(t)).k;
    });
    return psi_from_blocks(blocks);
}

double psi_from_blocks(const std::vector<Eigen::MatrixXd>& blocks) {
    double op = 0.0, frob2 = 0.0;
    std::size_t n = 0;
    for (const auto& b : blocks) {
        op = std::max(op, largest_eigenvalue(b));
        frob2 += b.squaredNorm();
        n += static_cast<std::size_t>(b.rows());
    }
    if (!(frob2 > 0.0)) throw std::invalid_argument("psi_from_blocks: zero matrix");
    return op * std::sqrt(static_cast<double>(n)) / std::sqrt(frob2);
}

}  // namespace lif
