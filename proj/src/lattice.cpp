#include "lif/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "lif/rng.hpp"

namespace lif {

int Lattice::n_scale() const {
    const std::size_t count = n();
    if (count == 0) return 0;
    int k = static_cast<int>(std::floor(std::pow(static_cast<double>(count), 1.0 / dim)));
    auto ipow = [this](long long base) {
        long long v = 1;
        for (int i = 0; i < dim; ++i) v *= base;
        return v;
    };
    while (ipow(k + 1) <= static_cast<long long>(count)) ++k;
    while (k > 1 && ipow(k) > static_cast<long long>(count)) --k;
    return k;
}

Lattice build_perturbed_lattice(int N, int d, double T, double delta, std::uint64_t seed) {
    if (d < 1 || d > 3) throw std::invalid_argument("build_perturbed_lattice: dimension must be 1..3");
    if (N < 2 || T <= 0.0) throw std::invalid_argument("build_perturbed_lattice: need N >= 2 and T > 0");
    if (delta < 0.0) throw std::invalid_argument("build_perturbed_lattice: delta must be >= 0");

    const double h = T / N;
    std::size_t n = 1;
    for (int i = 0; i < d; ++i) n *= static_cast<std::size_t>(N);

    Lattice lat;
    lat.dim = d;
    lat.side = T;
    lat.points.resize(n * d);

    // row-major over axis indices, last axis fastest
    for (std::size_t s = 0; s < n; ++s) {
        std::size_t rem = s;
        for (int a = d - 1; a >= 0; --a) {
            const std::size_t ia = rem % N;
            rem /= N;
            const double anchor = (static_cast<double>(ia) + 1.0) * h;
            const double u = rng::uniform01(seed, 0, static_cast<std::uint64_t>(s) * d + a);
            const double p = (2.0 * u - 1.0) * h;
            lat.points[s * d + a] = anchor + delta * p;
        }
    }
    return lat;
}

struct NeighborIndex::Impl {
    const Lattice& lat;
    int cells_per_axis;
    double lo[3] = {0, 0, 0};
    double cell[3] = {1, 1, 1};
    std::vector<std::vector<std::int32_t>> buckets;

    explicit Impl(const Lattice& l) : lat(l) {
        const std::size_t n = lat.n();
        cells_per_axis = std::max(1, lat.n_scale());
        double hi[3];
        for (int a = 0; a < lat.dim; ++a) {
            lo[a] = std::numeric_limits<double>::infinity();
            hi[a] = -std::numeric_limits<double>::infinity();
        }
        for (std::size_t i = 0; i < n; ++i) {
            const double* p = lat.point(i);
            for (int a = 0; a < lat.dim; ++a) {
                lo[a] = std::min(lo[a], p[a]);
                hi[a] = std::max(hi[a], p[a]);
            }
        }
        for (int a = 0; a < lat.dim; ++a) {
            const double span = std::max(hi[a] - lo[a], 1e-30);
            cell[a] = span / cells_per_axis * (1.0 + 1e-12);
        }
        std::size_t nb = 1;
        for (int a = 0; a < lat.dim; ++a) nb *= cells_per_axis;
        buckets.resize(nb);
        for (std::size_t i = 0; i < n; ++i)
            buckets[bucket_of(lat.point(i))].push_back(static_cast<std::int32_t>(i));
    }

    int coord_cell(const double* p, int a) const {
        const int c = static_cast<int>((p[a] - lo[a]) / cell[a]);
        return std::clamp(c, 0, cells_per_axis - 1);
    }

    std::size_t bucket_of(const double* p) const {
        std::size_t idx = 0;
        for (int a = 0; a < lat.dim; ++a) idx = idx * cells_per_axis + coord_cell(p, a);
        return idx;
    }

    template <typename F>
    void visit_ring(const int center[3], int ring, F&& f) const {
        const int d = lat.dim;
        auto in_range = [this](int v) { return v >= 0 && v < cells_per_axis; };
        auto emit = [&](int x, int y, int z) {
            const int c[3] = {x, y, z};
            std::size_t idx = 0;
            for (int a = 0; a < d; ++a) idx = idx * cells_per_axis + c[a];
            f(buckets[idx]);
        };
        if (d == 1) {
            if (ring == 0) {
                if (in_range(center[0])) emit(center[0], 0, 0);
            } else {
                if (in_range(center[0] - ring)) emit(center[0] - ring, 0, 0);
                if (in_range(center[0] + ring)) emit(center[0] + ring, 0, 0);
            }
            return;
        }
        for (int x = center[0] - ring; x <= center[0] + ring; ++x) {
            if (!in_range(x)) continue;
            if (d == 2) {
                for (int y = center[1] - ring; y <= center[1] + ring; ++y) {
                    if (!in_range(y)) continue;
                    if (std::max(std::abs(x - center[0]), std::abs(y - center[1])) != ring) continue;
                    emit(x, y, 0);
                }
            } else {
                for (int y = center[1] - ring; y <= center[1] + ring; ++y) {
                    if (!in_range(y)) continue;
                    for (int z = center[2] - ring; z <= center[2] + ring; ++z) {
                        if (!in_range(z)) continue;
                        const int cd = std::max({std::abs(x - center[0]), std::abs(y - center[1]),
                                                 std::abs(z - center[2])});
                        if (cd != ring) continue;
                        emit(x, y, z);
                    }
                }
            }
        }
    }
};

NeighborIndex::NeighborIndex(const Lattice& lat) : impl_(std::make_unique<Impl>(lat)) {}
NeighborIndex::~NeighborIndex() = default;
NeighborIndex::NeighborIndex(NeighborIndex&&) noexcept = default;
NeighborIndex& NeighborIndex::operator=(NeighborIndex&&) noexcept = default;

std::vector<std::int32_t> NeighborIndex::query(std::size_t s, std::size_t k) const {
    const Lattice& lat = impl_->lat;
    const std::size_t n = lat.n();
    if (s >= n) throw std::invalid_argument("nearest_neighbors: site index out of range");
    if (k < 1 || k > n - 1) throw std::invalid_argument("nearest_neighbors: k out of range");

    struct Cand {
        double d2;
        std::int32_t idx;
        bool operator<(const Cand& o) const { return d2 < o.d2 || (d2 == o.d2 && idx < o.idx); }
    };
    std::vector<Cand> cands;
    cands.reserve(8 * k);

    const double* p = lat.point(s);
    int center[3] = {0, 0, 0};
    for (int a = 0; a < lat.dim; ++a) center[a] = impl_->coord_cell(p, a);
    const double min_cell = *std::min_element(impl_->cell, impl_->cell + lat.dim);

    for (int ring = 0; ring < 2 * impl_->cells_per_axis; ++ring) {
        impl_->visit_ring(center, ring, [&](const std::vector<std::int32_t>& bucket) {
            for (std::int32_t j : bucket) {
                if (static_cast<std::size_t>(j) == s) continue;
                cands.push_back({lat.dist2(s, static_cast<std::size_t>(j)), j});
            }
        });
        if (cands.size() >= k) {
            // unvisited cells sit at Chebyshev distance >= ring+1, hence
            // any point there is at least ring * min_cell away
            std::nth_element(cands.begin(), cands.begin() + (k - 1), cands.end());
            const double guaranteed = static_cast<double>(ring) * min_cell;
            if (cands[k - 1].d2 <= guaranteed * guaranteed) break;
        }
    }

    const std::size_t kk = std::min(k, cands.size());
    std::partial_sort(cands.begin(), cands.begin() + kk, cands.end());
    std::vector<std::int32_t> out(kk);
    for (std::size_t i = 0; i < kk; ++i) out[i] = cands[i].idx;
    return out;
}

std::vector<std::int32_t> nearest_neighbors(const Lattice& lat, std::size_t s, std::size_t k) {
    const std::size_t n = lat.n();
    if (s >= n) throw std::invalid_argument("nearest_neighbors: site index out of range");
    if (k < 1 || k > n - 1) throw std::invalid_argument("nearest_neighbors: k out of range");
    if (n <= 512) {
        struct Cand {
            double d2;
            std::int32_t idx;
            bool operator<(const Cand& o) const { return d2 < o.d2 || (d2 == o.d2 && idx < o.idx); }
        };
        std::vector<Cand> cands;
        cands.reserve(n - 1);
        for (std::size_t j = 0; j < n; ++j) {
            if (j == s) continue;
            cands.push_back({lat.dist2(s, j), static_cast<std::int32_t>(j)});
        }
        std::partial_sort(cands.begin(), cands.begin() + k, cands.end());
        std::vector<std::int32_t> out(k);
        for (std::size_t i = 0; i < k; ++i) out[i] = cands[i].idx;
        return out;
    }
    return NeighborIndex(lat).query(s, k);
}

RegularityReport verify_regularity(const Lattice& lat, std::size_t sample_sites) {
    if (sample_sites < 1) throw std::invalid_argument("verify_regularity: sample_sites must be >= 1");
    const std::size_t n = lat.n();
    const std::size_t m = std::min(sample_sites, n);
    const std::size_t stride = n / m;
    const double inv_d = 1.0 / lat.dim;

    RegularityReport rep;
    rep.c_min_hat = std::numeric_limits<double>::infinity();
    rep.c_max_hat = 0.0;

    std::vector<double> d2(n - 1);
    for (std::size_t q = 0; q < m; ++q) {
        const std::size_t s = q * stride;
        std::size_t w = 0;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == s) continue;
            d2[w++] = lat.dist2(s, j);
        }
        std::sort(d2.begin(), d2.end());
        for (std::size_t i = 1; i <= n - 1; ++i) {
            const double r = std::sqrt(d2[i - 1]);
            const double scale = std::pow(static_cast<double>(i) / n, inv_d);
            const double ratio = r / scale;
            rep.c_min_hat = std::min(rep.c_min_hat, ratio);
            rep.c_max_hat = std::max(rep.c_max_hat, ratio);
        }
        rep.sampled_pairs += n - 1;
    }
    rep.max_ratio_violation = rep.c_min_hat > 0.0
                                  ? rep.c_max_hat / rep.c_min_hat
                                  : std::numeric_limits<double>::infinity();
    rep.degenerate = !(rep.c_min_hat > 1e-9 * lat.side);
    return rep;
}

}  // namespace lif
