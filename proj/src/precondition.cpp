#include "lif/precondition.hpp"

#include <Eigen/Dense>
#include <array>
#include <atomic>
#include <cmath>
#include <mutex>
#include <stdexcept>
#include <string>

#include "lif/parallel.hpp"

namespace lif {

namespace {

// Multi-indices r with |r|_1 <= m in d dimensions, graded lexicographic.
std::vector<std::array<int, 3>> multi_indices(int m, int d) {
    std::vector<std::array<int, 3>> out;
    for (int total = 0; total <= m; ++total) {
        if (d == 1) {
            out.push_back({total, 0, 0});
        } else if (d == 2) {
            for (int i = total; i >= 0; --i) out.push_back({i, total - i, 0});
        } else {
            for (int i = total; i >= 0; --i)
                for (int j = total - i; j >= 0; --j) out.push_back({i, j, total - i - j});
        }
    }
    return out;
}

double monomial(const double* offset, const std::array<int, 3>& r, int d) {
    double v = 1.0;
    for (int a = 0; a < d; ++a)
        for (int e = 0; e < r[a]; ++e) v *= offset[a];
    return v;
}

struct MomentSystem {
    Eigen::MatrixXd a;   // rows = multi-indices, cols = non-center neighbors
    Eigen::VectorXd rhs; // -1 for r = 0, else 0
};

MomentSystem build_system(const Lattice& lat, std::size_t s, const std::vector<std::int32_t>& nbrs,
                          const std::vector<std::array<int, 3>>& rs, double n_scale) {
    MomentSystem sys;
    const Eigen::Index rows = static_cast<Eigen::Index>(rs.size());
    const Eigen::Index cols = static_cast<Eigen::Index>(nbrs.size());
    sys.a.resize(rows, cols);
    sys.rhs = Eigen::VectorXd::Zero(rows);
    sys.rhs[0] = -1.0;  // center pinned at 1; (s-s)^r is 1 only for r = 0
    const double* ps = lat.point(s);
    for (Eigen::Index j = 0; j < cols; ++j) {
        const double* pt = lat.point(static_cast<std::size_t>(nbrs[j]));
        double off[3] = {0, 0, 0};
        for (int a = 0; a < lat.dim; ++a) off[a] = n_scale * (pt[a] - ps[a]);
        for (Eigen::Index i = 0; i < rows; ++i) sys.a(i, j) = monomial(off, rs[i], lat.dim);
    }
    return sys;
}

double moment_residual(const MomentSystem& sys, const Eigen::VectorXd& x) {
    return (sys.a * x - sys.rhs).cwiseAbs().maxCoeff();
}

constexpr double kResidualTol = 1e-8;

}  // namespace

int neighborhood_size(int m, int d) {
    if (m < 1) throw std::invalid_argument("neighborhood_size: order must be >= 1");
    if (d < 1 || d > 3) throw std::invalid_argument("neighborhood_size: dimension must be 1..3");
    // C(m+d, d) annihilation constraints, plus the pinned center
    long long c = 1;
    for (int i = 1; i <= d; ++i) c = c * (m + i) / i;
    return static_cast<int>(c) + 1;
}

SiteStencil solve_coefficients(const Lattice& lat, int m, std::size_t s, const NeighborIndex* index) {
    const int d = lat.dim;
    const int need = neighborhood_size(m, d);
    if (lat.n() < static_cast<std::size_t>(need))
        throw std::invalid_argument("solve_coefficients: lattice smaller than the stencil (" +
                                    std::to_string(need) + " sites needed)");

    const auto rs = multi_indices(m, d);
    const double n_scale = static_cast<double>(lat.n_scale());
    const std::size_t pool_max = std::min<std::size_t>(2 * (need - 1), lat.n() - 1);
    const std::vector<std::int32_t> pool =
        index ? index->query(s, pool_max) : nearest_neighbors(lat, s, pool_max);

    auto assemble = [&](const std::vector<std::int32_t>& nbrs, const Eigen::VectorXd& x) {
        SiteStencil st;
        st.neighbors.reserve(nbrs.size() + 1);
        st.coeffs.reserve(nbrs.size() + 1);
        st.neighbors.push_back(static_cast<std::int32_t>(s));
        st.coeffs.push_back(1.0);
        for (std::size_t j = 0; j < nbrs.size(); ++j) {
            if (x[static_cast<Eigen::Index>(j)] == 0.0) continue;  // symmetry-forced zeros dropped
            st.neighbors.push_back(nbrs[j]);
            st.coeffs.push_back(x[static_cast<Eigen::Index>(j)]);
        }
        double norm2 = 0.0;
        for (double c : st.coeffs) norm2 += c * c;
        const double inv = 1.0 / std::sqrt(norm2);
        for (double& c : st.coeffs) c *= inv;
        return st;
    };

    // square solve on the nominal neighborhood
    {
        std::vector<std::int32_t> nbrs(pool.begin(), pool.begin() + (need - 1));
        const MomentSystem sys = build_system(lat, s, nbrs, rs, n_scale);
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(sys.a);
        if (qr.rank() == sys.a.rows()) {
            const Eigen::VectorXd x = qr.solve(sys.rhs);
            if (moment_residual(sys, x) <= kResidualTol && !(x.array() == 0.0).any())
                return assemble(nbrs, x);
        }
    }

    // degenerate geometry: enlarge the candidate pool one site at a time and
    // take the minimum-norm least-squares solution (center stays pinned)
    for (std::size_t extra = static_cast<std::size_t>(need); extra <= pool.size(); ++extra) {
        std::vector<std::int32_t> nbrs(pool.begin(), pool.begin() + extra);
        const MomentSystem sys = build_system(lat, s, nbrs, rs, n_scale);
        Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(sys.a);
        const Eigen::VectorXd x = cod.solve(sys.rhs);
        if (moment_residual(sys, x) <= kResidualTol) return assemble(nbrs, x);
    }
    throw std::runtime_error("solve_coefficients: singular annihilation system at site " +
                             std::to_string(s));
}

PreconditionerCoeffs precondition_all(const Lattice& lat, int m, double nu, int threads) {
    const int need = neighborhood_size(m, lat.dim);
    if (lat.n() < static_cast<std::size_t>(need))
        throw std::invalid_argument("precondition_all: lattice smaller than the stencil (" +
                                    std::to_string(need) + " sites needed)");
    auto shared = std::make_shared<Lattice>(lat);

    PreconditionerCoeffs pc;
    pc.m = m;
    pc.nu = nu;
    pc.n_scale = lat.n_scale();
    pc.lattice = shared;
    pc.sites.resize(lat.n());

    std::atomic<bool> failed{false};
    std::string error;
    std::mutex error_mu;
    parallel_for(lat.n(), threads, [&](std::size_t b, std::size_t e) {
        const NeighborIndex index(*shared);
        for (std::size_t s = b; s < e; ++s) {
            if (failed.load(std::memory_order_relaxed)) return;
            try {
                pc.sites[s] = solve_coefficients(*shared, m, s, &index);
            } catch (const std::exception& ex) {
                failed = true;
                std::lock_guard<std::mutex> lock(error_mu);
                if (error.empty()) error = ex.what();
            }
        }
    });
    if (failed) throw std::runtime_error("precondition_all: " + error);
    return pc;
}

PreconditionedSample apply_preconditioner(const PreconditionerCoeffs& pc, const Eigen::VectorXd& raw) {
    const std::size_t n = pc.lattice->n();
    if (static_cast<std::size_t>(raw.size()) != n)
        throw std::invalid_argument("apply_preconditioner: sample length does not match lattice");
    PreconditionedSample out;
    out.m = pc.m;
    out.nu = pc.nu;
    out.values.resize(static_cast<Eigen::Index>(n));
    const double scale = std::pow(static_cast<double>(pc.n_scale), pc.nu);
    for (std::size_t s = 0; s < n; ++s) {
        const SiteStencil& st = pc.sites[s];
        double acc = 0.0;
        for (std::size_t j = 0; j < st.neighbors.size(); ++j)
            acc += st.coeffs[j] * raw[st.neighbors[j]];
        out.values[static_cast<Eigen::Index>(s)] = scale * acc;
    }
    return out;
}

PreconditionedSample laplacian_precondition_regular(const Lattice& grid, const Eigen::VectorXd& raw,
                                                    int m_prime, double nu) {
    if (m_prime < 1) throw std::invalid_argument("laplacian_precondition_regular: m_prime must be >= 1");
    const int d = grid.dim;
    const int N = grid.n_scale();
    std::size_t expected = 1;
    for (int a = 0; a < d; ++a) expected *= static_cast<std::size_t>(N);
    if (grid.n() != expected)
        throw std::invalid_argument("laplacian_precondition_regular: not a complete regular grid");
    if (static_cast<std::size_t>(raw.size()) != grid.n())
        throw std::invalid_argument("laplacian_precondition_regular: sample length mismatch");
    if (N - 2 * m_prime < 1)
        throw std::invalid_argument("laplacian_precondition_regular: grid too small for the interior");

    // strides for row-major (last axis fastest) flattening
    std::size_t stride[3] = {0, 0, 0};
    {
        std::size_t acc = 1;
        for (int a = d - 1; a >= 0; --a) {
            stride[a] = acc;
            acc *= static_cast<std::size_t>(N);
        }
    }

    Eigen::VectorXd cur = raw, next(raw.size());
    for (int k = 1; k <= m_prime; ++k) {
        next.setZero();
        // valid band after k applications: axis index in [k, N-1-k] (0-based)
        auto for_band = [&](auto&& body) {
            int idx[3] = {0, 0, 0};
            const int lo = k, hi = N - 1 - k;
            if (d == 1) {
                for (idx[0] = lo; idx[0] <= hi; ++idx[0]) body(idx);
            } else if (d == 2) {
                for (idx[0] = lo; idx[0] <= hi; ++idx[0])
                    for (idx[1] = lo; idx[1] <= hi; ++idx[1]) body(idx);
            } else {
                for (idx[0] = lo; idx[0] <= hi; ++idx[0])
                    for (idx[1] = lo; idx[1] <= hi; ++idx[1])
                        for (idx[2] = lo; idx[2] <= hi; ++idx[2]) body(idx);
            }
        };
        for_band([&](const int* idx) {
            std::size_t flat = 0;
            for (int a = 0; a < d; ++a) flat += static_cast<std::size_t>(idx[a]) * stride[a];
            double acc = 0.0;
            for (int a = 0; a < d; ++a)
                acc += cur[flat + stride[a]] - 2.0 * cur[flat] + cur[flat - stride[a]];
            next[flat] = acc;
        });
        cur.swap(next);
    }

    // Euclidean norm of the equivalent stencil: m_prime-fold convolution of
    // the +-cross kernel, accumulated on a (2m'+1)^d tensor.
    const int w = 2 * m_prime + 1;
    std::size_t tensor_n = 1;
    for (int a = 0; a < d; ++a) tensor_n *= static_cast<std::size_t>(w);
    std::vector<double> ker(tensor_n, 0.0), tmp(tensor_n, 0.0);
    std::size_t tstride[3] = {0, 0, 0};
    {
        std::size_t acc = 1;
        for (int a = d - 1; a >= 0; --a) {
            tstride[a] = acc;
            acc *= static_cast<std::size_t>(w);
        }
    }
    std::size_t center = 0;
    for (int a = 0; a < d; ++a) center += static_cast<std::size_t>(m_prime) * tstride[a];
    ker[center] = 1.0;
    for (int k = 0; k < m_prime; ++k) {
        std::fill(tmp.begin(), tmp.end(), 0.0);
        for (std::size_t i = 0; i < tensor_n; ++i) {
            if (ker[i] == 0.0) continue;
            int idx[3] = {0, 0, 0};
            std::size_t rem = i;
            for (int a = 0; a < d; ++a) {
                idx[a] = static_cast<int>(rem / tstride[a]);
                rem %= tstride[a];
            }
            for (int a = 0; a < d; ++a) {
                tmp[i] -= 2.0 * ker[i];
                if (idx[a] + 1 < w) tmp[i + tstride[a]] += ker[i];
                if (idx[a] - 1 >= 0) tmp[i - tstride[a]] += ker[i];
            }
        }
        ker.swap(tmp);
    }
    double norm2 = 0.0;
    for (double v : ker) norm2 += v * v;
    const double scale = std::pow(static_cast<double>(N), nu) / std::sqrt(norm2);

    PreconditionedSample out;
    out.m = 2 * m_prime;
    out.nu = nu;
    const int lo = m_prime, hi = N - 1 - m_prime;
    std::vector<std::int32_t> sites;
    int idx[3] = {0, 0, 0};
    auto collect = [&](const int* q) {
        std::size_t flat = 0;
        for (int a = 0; a < d; ++a) flat += static_cast<std::size_t>(q[a]) * stride[a];
        sites.push_back(static_cast<std::int32_t>(flat));
    };
    if (d == 1) {
        for (idx[0] = lo; idx[0] <= hi; ++idx[0]) collect(idx);
    } else if (d == 2) {
        for (idx[0] = lo; idx[0] <= hi; ++idx[0])
            for (idx[1] = lo; idx[1] <= hi; ++idx[1]) collect(idx);
    } else {
        for (idx[0] = lo; idx[0] <= hi; ++idx[0])
            for (idx[1] = lo; idx[1] <= hi; ++idx[1])
                for (idx[2] = lo; idx[2] <= hi; ++idx[2]) collect(idx);
    }
    out.values.resize(static_cast<Eigen::Index>(sites.size()));
    for (std::size_t i = 0; i < sites.size(); ++i)
        out.values[static_cast<Eigen::Index>(i)] = scale * cur[sites[i]];
    out.site_indices = std::move(sites);
    return out;
}

}  // namespace lif
