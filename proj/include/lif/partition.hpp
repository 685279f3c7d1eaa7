#pragma once

#include <cstdint>
#include <vector>

#include "lif/lattice.hpp"

namespace lif {

// Disjoint cover of the n sites. Bin ids are 0..b_eff-1; empty bins from the
// random schemes are dropped (b_eff <= b_requested). Member lists ascend.
struct Partition {
    std::vector<std::int32_t> bin_of;            // site -> bin id
    std::vector<std::vector<std::int32_t>> bins; // bin -> ascending site list
    int b_requested = 0;

    int b_eff() const { return static_cast<int>(bins.size()); }
    std::size_t pair_count() const;  // sum over bins of |B|(|B|+1)/2, the loss-evaluation cost
};

// Uniformly chosen bins: each site i.i.d. uniform over b labels.
Partition partition_uniform(std::size_t n, int b, std::uint64_t seed);

// Non-uniformly chosen bins: label distribution proportional to
// (1,...,1,2,...,2), the first ceil(b/2) labels with weight 1.
Partition partition_nonuniform(std::size_t n, int b, std::uint64_t seed);

// Axis-aligned boxes of equal side per axis, half-open (lo, hi] internally so
// a grid dividing N bins a regular lattice evenly; sites perturbed outside the
// domain clamp to the boundary box.
Partition partition_rectangular(const Lattice& lat, const std::vector<int>& grid);

// One bin per site.
Partition partition_singleton(std::size_t n);

}  // namespace lif
