#include "lif/partition.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "lif/rng.hpp"

namespace lif {

namespace {

// Drops empty labels, keeping label order for the effective bin ids.
Partition from_labels(std::vector<std::int32_t> labels, int b_requested) {
    const std::size_t n = labels.size();
    std::vector<std::int32_t> remap(static_cast<std::size_t>(b_requested), -1);
    for (std::size_t i = 0; i < n; ++i) remap[static_cast<std::size_t>(labels[i])] = 0;
    std::int32_t next = 0;
    for (auto& r : remap)
        if (r >= 0) r = next++;
    Partition part;
    part.b_requested = b_requested;
    part.bin_of.resize(n);
    part.bins.resize(static_cast<std::size_t>(next));
    for (std::size_t i = 0; i < n; ++i) {
        const std::int32_t slot = remap[static_cast<std::size_t>(labels[i])];
        part.bin_of[i] = slot;
        part.bins[static_cast<std::size_t>(slot)].push_back(static_cast<std::int32_t>(i));
    }
    return part;
}

}  // namespace

std::size_t Partition::pair_count() const {
    std::size_t c = 0;
    for (const auto& b : bins) c += b.size() * (b.size() + 1) / 2;
    return c;
}

Partition partition_uniform(std::size_t n, int b, std::uint64_t seed) {
    if (b < 1 || static_cast<std::size_t>(b) > n)
        throw std::invalid_argument("partition_uniform: b out of range");
    std::vector<std::int32_t> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double u = rng::uniform01(seed, 0, i);
        labels[i] = std::min<std::int32_t>(static_cast<std::int32_t>(u * b), b - 1);
    }
    return from_labels(std::move(labels), b);
}

Partition partition_nonuniform(std::size_t n, int b, std::uint64_t seed) {
    if (b < 1 || static_cast<std::size_t>(b) > n)
        throw std::invalid_argument("partition_nonuniform: b out of range");
    const int ones = (b + 1) / 2;
    const double total = static_cast<double>(ones) + 2.0 * (b - ones);
    std::vector<double> cdf(static_cast<std::size_t>(b));
    double acc = 0.0;
    for (int t = 0; t < b; ++t) {
        acc += (t < ones ? 1.0 : 2.0) / total;
        cdf[static_cast<std::size_t>(t)] = acc;
    }
    cdf.back() = 1.0;
    std::vector<std::int32_t> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double u = rng::uniform01(seed, 0, i);
        const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
        labels[i] = static_cast<std::int32_t>(std::min<std::ptrdiff_t>(it - cdf.begin(), b - 1));
    }
    return from_labels(std::move(labels), b);
}

Partition partition_rectangular(const Lattice& lat, const std::vector<int>& grid) {
    if (grid.size() != static_cast<std::size_t>(lat.dim))
        throw std::invalid_argument("partition_rectangular: grid length must equal dimension");
    long long total = 1;
    for (int g : grid) {
        if (g < 1) throw std::invalid_argument("partition_rectangular: grid counts must be >= 1");
        total *= g;
    }
    const std::size_t n = lat.n();
    std::vector<std::int32_t> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double* p = lat.point(i);
        std::int32_t box = 0;
        for (int a = 0; a < lat.dim; ++a) {
            // boxes are (lo, hi]: sites live on {iT/N}, so internal edges bind
            // downward and a grid dividing N gives equal-size bins
            int c = static_cast<int>(std::ceil(p[a] * grid[a] / lat.side)) - 1;
            c = std::clamp(c, 0, grid[a] - 1);  // out-of-domain sites clamp
            box = box * grid[a] + c;
        }
        labels[i] = box;
    }
    return from_labels(std::move(labels), static_cast<int>(total));
}

Partition partition_singleton(std::size_t n) {
    if (n < 1) throw std::invalid_argument("partition_singleton: need n >= 1");
    Partition part;
    part.b_requested = static_cast<int>(n);
    part.bin_of.resize(n);
    part.bins.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        part.bin_of[i] = static_cast<std::int32_t>(i);
        part.bins[i] = {static_cast<std::int32_t>(i)};
    }
    return part;
}

}  // namespace lif
