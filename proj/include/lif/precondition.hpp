#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <memory>
#include <vector>

#include "lif/lattice.hpp"

namespace lif {

// Per-site difference filter: neighbor site indices (the site itself first,
// then its nearest neighbors in query order) and unit-norm coefficients that
// annihilate all monomials (t-s)^r with |r|_1 <= m. Dot products accumulate
// in this list order.
struct SiteStencil {
    std::vector<std::int32_t> neighbors;
    std::vector<double> coeffs;
};

struct PreconditionerCoeffs {
    int m = 0;
    double nu = 0.0;
    int n_scale = 0;  // N = floor(n^(1/d))
    std::shared_ptr<const Lattice> lattice;
    std::vector<SiteStencil> sites;
};

// Values of the order-m preconditioned process, aligned with site index
// order. When produced by the regular-grid Laplacian path, `site_indices`
// lists the interior sites the values live on (empty means all sites).
struct PreconditionedSample {
    Eigen::VectorXd values;
    int m = 0;
    double nu = 0.0;
    std::vector<std::int32_t> site_indices;
};

// Total stencil size |N_m(s)|: one coefficient slot per annihilated
// multi-index (C(m+d, d) of them) plus the pinned center.
int neighborhood_size(int m, int d);

// Solves the annihilation system for one site: center coefficient pinned to 1,
// square solve over the nearest neighbors in offsets rescaled by N, then
// normalization to unit Euclidean norm. Falls back to an enlarged-pool
// least-squares solve on singular geometry.
SiteStencil solve_coefficients(const Lattice& lat, int m, std::size_t s,
                               const NeighborIndex* index = nullptr);

// Coefficient records for every site (data-parallel over sites).
PreconditionerCoeffs precondition_all(const Lattice& lat, int m, double nu, int threads = 1);

// Y_m(s) = N^nu * sum_t a_{m,s}(t) raw(t).
PreconditionedSample apply_preconditioner(const PreconditionerCoeffs& pc,
                                          const Eigen::VectorXd& raw);

// Regular-grid fast path: m_prime applications of the discrete Laplacian on a
// complete grid, restricted to the interior, scaled N^nu and normalized so the
// equivalent stencil has unit Euclidean norm. Valid order is 2*m_prime.
PreconditionedSample laplacian_precondition_regular(const Lattice& grid, const Eigen::VectorXd& raw,
                                                    int m_prime, double nu);

}  // namespace lif
