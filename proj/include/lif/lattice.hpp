#pragma once

#include <cstdint>
#include <memory>
#include <vector>

namespace lif {

// Sampling sites in [0, side]^dim (perturbed sites may exit by at most one
// cell). Points are stored row-major, site index = row. Immutable after
// construction; all queries are const and thread-safe.
struct Lattice {
    int dim = 0;
    double side = 0.0;
    std::vector<double> points;  // n * dim

    std::size_t n() const { return dim == 0 ? 0 : points.size() / dim; }
    const double* point(std::size_t i) const { return points.data() + i * static_cast<std::size_t>(dim); }

    // N = floor(n^(1/d)), the per-axis resolution used in every downstream
    // scale factor. Integer root, immune to pow() rounding.
    int n_scale() const;

    double dist2(std::size_t i, std::size_t j) const {
        const double* a = point(i);
        const double* b = point(j);
        double s = 0.0;
        for (int k = 0; k < dim; ++k) {
            const double d = a[k] - b[k];
            s += d * d;
        }
        return s;
    }
};

struct RegularityReport {
    double c_min_hat = 0.0;
    double c_max_hat = 0.0;
    double max_ratio_violation = 0.0;  // spread c_max_hat / c_min_hat
    std::size_t sampled_pairs = 0;
    bool degenerate = false;  // c_min_hat near zero (duplicate-like clusters)
};

// Perturbed lattice: anchors {i*T/N : i=1..N}^d, site = anchor + delta*p with
// p uniform on [-T/N, T/N]^d. Each coordinate draw comes from a per-(site,axis)
// counter stream, so the result is independent of fill order. delta = 0
// reproduces the regular grid exactly.
Lattice build_perturbed_lattice(int N, int d, double T, double delta, std::uint64_t seed);

// Grid-bucket accelerator for repeated k-NN queries against one lattice.
// An optimization only: query() returns exactly the brute-force order
// (ascending distance, ties by ascending site index).
class NeighborIndex {
public:
    explicit NeighborIndex(const Lattice& lat);
    ~NeighborIndex();
    NeighborIndex(NeighborIndex&&) noexcept;
    NeighborIndex& operator=(NeighborIndex&&) noexcept;

    std::vector<std::int32_t> query(std::size_t s, std::size_t k) const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// Indices of the k sites closest to site s (excluding s). One-shot
// convenience; loops over many sites should hold a NeighborIndex.
std::vector<std::int32_t> nearest_neighbors(const Lattice& lat, std::size_t s, std::size_t k);

// Empirical constants of the lattice-regularity inequality
// c_min (i/n)^(1/d) <= r_{s,i} <= c_max (i/n)^(1/d) over sampled sites.
RegularityReport verify_regularity(const Lattice& lat, std::size_t sample_sites);

}  // namespace lif
