#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <tuple>
#include <vector>

#include "lif/lattice.hpp"
#include "lif/partition.hpp"
#include "lif/precondition.hpp"

namespace lif {

// All floating point fields are written with 17 significant digits, enough
// for exact double round-trips.
std::string format_double(double v);

void write_lattice_csv(const std::string& path, const Lattice& lat);
Lattice read_lattice_csv(const std::string& path, double side);

// JSON sidecar {dim, side, n, delta, seed} next to the lattice CSV.
void write_lattice_meta(const std::string& path, const Lattice& lat, double delta,
                        std::uint64_t seed);

void write_vector_csv(const std::string& path, const std::string& header,
                      const Eigen::VectorXd& values);
Eigen::VectorXd read_vector_csv(const std::string& path);

void write_partition_csv(const std::string& path, const Partition& part);

// (site_index, neighbor_index, coefficient) triples.
void write_coeffs_csv(const std::string& path, const PreconditionerCoeffs& pc);
std::vector<std::tuple<std::int32_t, std::int32_t, double>> read_coeffs_csv(const std::string& path);

}  // namespace lif
