#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lif/optimize.hpp"

namespace lif {

// Configuration errors get their own type so the CLI can map them to the
// config exit code.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
    // lattice
    int N = 0;
    int dim = 2;
    double side = 1.0;
    double delta = 0.0;
    // model
    double nu = 0.5;
    int m = 2;
    std::optional<MaternParams> truth;  // truth.nu mirrors nu
    // partition
    std::string scheme = "uc";  // uc | nuc | rectangular | singleton
    int bins = 1;
    std::vector<int> grid;
    // estimation
    EstimateSpec estimation;
    // run
    int replicates = 1;
    std::uint64_t seed = 0;
    bool fix_lattice = false;
    double jitter = 1e-10;
    std::size_t dense_cap = 20000;
    std::string out_dir = "out";
    // diagnostics
    std::size_t psi_max_n = 4000;
    double decay_min_scaled_dist = 4.0;
    std::size_t regularity_sample_sites = 100;
};

ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);
nlohmann::json config_to_json(const ExperimentConfig& cfg);

struct ReplicateRecord {
    int replicate = 0;
    bool failed = false;
    std::string error;
    double phi_hat = 0.0;
    Eigen::VectorXd rho_hat;
    Eigen::VectorXd xi_hat;
    int iterations = 0;
    bool converged = false;
    double seconds = 0.0;  // wall clock, reported in the summary only
};

struct ExperimentSummary {
    std::vector<ReplicateRecord> records;
    Eigen::VectorXd xi_mean;  // over non-failed replicates
    Eigen::VectorXd xi_sd;    // size 0 when fewer than 2 replicates
    int failures = 0;
    double wall_seconds = 0.0;
};

// Derived per-replicate seeds: component 0 = lattice, 1 = field, 2 = partition.
std::uint64_t replicate_seed(std::uint64_t master, int replicate, int component);

// R independent (lattice, field) replicates, estimated and summarized.
// Replicates run on a worker pool; each replicate's math is single-threaded,
// so results are byte-identical for any thread count.
ExperimentSummary run_experiment(const ExperimentConfig& cfg, int threads);

// Summary statistics recomputed from records (used by tests and the writer).
void summarize(ExperimentSummary& summary);

void write_replicates_csv(const std::string& path, const ExperimentSummary& summary);
void write_summary_json(const std::string& path, const ExperimentSummary& summary,
                        const ExperimentConfig& cfg);

// Least-squares slope of log|K_m(s,t)| against log(1 + N ||t-s||) over pairs
// in the far-field regime (N ||t-s|| >= min_scaled_dist, entries above the
// cancellation floor).
double entry_decay_slope(const PreconditionerCoeffs& pc, const Eigen::VectorXd& rho,
                         double min_scaled_dist, std::size_t max_anchor_sites, int threads);

nlohmann::json diagnose(const ExperimentConfig& cfg, int threads);

}  // namespace lif
