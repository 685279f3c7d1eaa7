// lifgp: simulate Matern fields on (ir)regular lattices, estimate covariance
// parameters with the local inversion-free loss, and run seeded Monte Carlo
// experiments.

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>

#include "lif/experiment.hpp"
#include "lif/io.hpp"
#include "lif/parallel.hpp"
#include "lif/simulate.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct Common {
    std::string config_path;
    std::string out_dir;
    int threads = 0;
    std::optional<std::uint64_t> seed;
};

lif::ExperimentConfig load(const Common& c) {
    lif::ExperimentConfig cfg = lif::load_config(c.config_path);
    if (!c.out_dir.empty()) cfg.out_dir = c.out_dir;
    if (c.seed) cfg.seed = *c.seed;
    return cfg;
}

// Creates the leaf output directory only; a missing parent is an explicit
// config error rather than a silently created tree.
void ensure_out_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directory(dir, ec);
    if (!fs::is_directory(dir))
        throw lif::ConfigError("output directory is missing (parent must exist): " + dir);
}

int threads_of(const Common& c) { return c.threads > 0 ? c.threads : lif::hardware_threads(); }

std::string suffixed(const std::string& stem, int r, int total, const std::string& ext) {
    if (total == 1) return stem + ext;
    char buf[16];
    std::snprintf(buf, sizeof(buf), "_%03d", r);
    return stem + buf + ext;
}

int cmd_simulate(const Common& c) {
    const lif::ExperimentConfig cfg = load(c);
    if (!cfg.truth) throw lif::ConfigError("simulate needs truth parameters");
    ensure_out_dir(cfg.out_dir);
    for (int r = 0; r < cfg.replicates; ++r) {
        const std::uint64_t lat_seed =
            lif::replicate_seed(cfg.seed, cfg.fix_lattice ? 0 : r, 0);
        const auto lat = std::make_shared<lif::Lattice>(
            lif::build_perturbed_lattice(cfg.N, cfg.dim, cfg.side, cfg.delta, lat_seed));
        lif::MaternParams truth = *cfg.truth;
        truth.nu = cfg.nu;
        lif::SimulationSpec spec{lat, truth, lif::replicate_seed(cfg.seed, r, 1), cfg.jitter,
                                 cfg.dense_cap};
        const Eigen::VectorXd sample = lif::sample_gp(spec);

        const std::string latp = cfg.out_dir + "/" + suffixed("lattice", r, cfg.replicates, ".csv");
        lif::write_lattice_csv(latp, *lat);
        lif::write_lattice_meta(cfg.out_dir + "/" + suffixed("lattice", r, cfg.replicates, ".json"),
                                *lat, cfg.delta, lat_seed);
        lif::write_vector_csv(cfg.out_dir + "/" + suffixed("sample", r, cfg.replicates, ".csv"),
                              "value", sample);
    }
    std::printf("simulate: wrote %d sample(s) to %s\n", cfg.replicates, cfg.out_dir.c_str());
    return 0;
}

int cmd_estimate(const Common& c, const std::string& lattice_path, const std::string& sample_path) {
    const lif::ExperimentConfig cfg = load(c);
    ensure_out_dir(cfg.out_dir);
    const auto lat = std::make_shared<lif::Lattice>(lif::read_lattice_csv(lattice_path, cfg.side));
    const Eigen::VectorXd sample = lif::read_vector_csv(sample_path);
    if (static_cast<std::size_t>(sample.size()) != lat->n())
        throw lif::ConfigError("sample length " + std::to_string(sample.size()) +
                               " does not match lattice size " + std::to_string(lat->n()));

    const int threads = threads_of(c);
    const lif::PreconditionerCoeffs pc = lif::precondition_all(*lat, cfg.m, cfg.nu, threads);
    const lif::PreconditionedSample y = lif::apply_preconditioner(pc, sample);
    lif::Partition part;
    if (cfg.scheme == "uc")
        part = lif::partition_uniform(lat->n(), cfg.bins, lif::replicate_seed(cfg.seed, 0, 2));
    else if (cfg.scheme == "nuc")
        part = lif::partition_nonuniform(lat->n(), cfg.bins, lif::replicate_seed(cfg.seed, 0, 2));
    else if (cfg.scheme == "rectangular")
        part = lif::partition_rectangular(*lat, cfg.grid);
    else
        part = lif::partition_singleton(lat->n());

    std::optional<lif::MaternParams> truth = cfg.truth;
    if (truth) truth->nu = cfg.nu;
    lif::EvalOptions opts;
    opts.threads = threads;
    const lif::EstimationResult est = lif::estimate(y, pc, part, cfg.estimation, truth, opts);

    json out;
    out["phi_hat"] = est.phi_hat;
    out["rho_hat"] = json::array();
    for (Eigen::Index i = 0; i < est.rho_hat.size(); ++i) out["rho_hat"].push_back(est.rho_hat[i]);
    if (est.xi_hat) {
        out["xi_hat"] = json::array();
        for (Eigen::Index i = 0; i < est.xi_hat->size(); ++i)
            out["xi_hat"].push_back((*est.xi_hat)[i]);
    }
    out["iterations"] = est.iterations;
    out["converged"] = est.converged;
    out["a_nonpositive"] = est.a_nonpositive;
    out["profile_loss"] = est.profile_loss;
    out["bound_active"] = est.bound_active;
    out["trace"] = est.trace;
    const std::string path = cfg.out_dir + "/estimate.json";
    std::ofstream f(path);
    f << out.dump(2) << "\n";
    std::printf("estimate: phi_hat=%.6g -> %s\n", est.phi_hat, path.c_str());
    return 0;
}

int cmd_experiment(const Common& c) {
    const lif::ExperimentConfig cfg = load(c);
    ensure_out_dir(cfg.out_dir);
    const lif::ExperimentSummary summary = lif::run_experiment(cfg, threads_of(c));
    lif::write_replicates_csv(cfg.out_dir + "/replicates.csv", summary);
    lif::write_summary_json(cfg.out_dir + "/summary.json", summary, cfg);
    if (summary.xi_mean.size()) {
        std::printf("experiment: %d replicate(s), %d failure(s), mean xi =", cfg.replicates,
                    summary.failures);
        for (Eigen::Index i = 0; i < summary.xi_mean.size(); ++i)
            std::printf(" %.6g", summary.xi_mean[i]);
        std::printf(", wall %.1fs\n", summary.wall_seconds);
    } else {
        std::printf("experiment: %d replicate(s), %d failure(s)\n", cfg.replicates,
                    summary.failures);
    }
    if (summary.failures == static_cast<int>(summary.records.size())) return kExitNumerical;
    return 0;
}

int cmd_diagnose(const Common& c) {
    const lif::ExperimentConfig cfg = load(c);
    ensure_out_dir(cfg.out_dir);
    const json j = lif::diagnose(cfg, threads_of(c));
    const std::string path = cfg.out_dir + "/diagnostics.json";
    std::ofstream f(path);
    f << j.dump(2) << "\n";
    std::printf("diagnose: psi=%.4g decay_slope=%.4g -> %s\n", j["psi"].get<double>(),
                j["entry_decay_slope"].get<double>(), path.c_str());
    return 0;
}

int cmd_verify_lattice(const Common& c, const std::string& lattice_path, std::size_t sample_sites) {
    const lif::ExperimentConfig cfg = load(c);
    ensure_out_dir(cfg.out_dir);
    lif::Lattice lat;
    if (!lattice_path.empty()) {
        lat = lif::read_lattice_csv(lattice_path, cfg.side);
    } else {
        lat = lif::build_perturbed_lattice(cfg.N, cfg.dim, cfg.side, cfg.delta,
                                           lif::replicate_seed(cfg.seed, 0, 0));
    }
    const lif::RegularityReport rep =
        lif::verify_regularity(lat, sample_sites ? sample_sites : cfg.regularity_sample_sites);
    json j;
    j["c_min_hat"] = rep.c_min_hat;
    j["c_max_hat"] = rep.c_max_hat;
    j["max_ratio_violation"] = rep.max_ratio_violation;
    j["sampled_pairs"] = rep.sampled_pairs;
    j["degenerate"] = rep.degenerate;
    const std::string path = cfg.out_dir + "/regularity.json";
    std::ofstream f(path);
    f << j.dump(2) << "\n";
    std::printf("verify-lattice: c_min=%.4g c_max=%.4g -> %s\n", rep.c_min_hat, rep.c_max_hat,
                path.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Local inversion-free Matern covariance estimation"};
    app.require_subcommand(1);

    Common common;
    std::string lattice_path, sample_path;
    std::size_t sample_sites = 0;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", common.config_path, "config JSON path")->required();
        sub->add_option("--out", common.out_dir, "output directory (overrides config)");
        sub->add_option("--threads", common.threads, "worker threads (default: hardware)");
        sub->add_option_function<std::uint64_t>(
            "--seed", [&common](const std::uint64_t& s) { common.seed = s; },
            "master seed (overrides config)");
    };

    CLI::App* sim = app.add_subcommand("simulate", "draw exact Matern field samples");
    add_common(sim);
    CLI::App* est = app.add_subcommand("estimate", "estimate from a lattice + sample file");
    add_common(est);
    est->add_option("--lattice", lattice_path, "lattice CSV")->required();
    est->add_option("--sample", sample_path, "sample CSV")->required();
    CLI::App* exp = app.add_subcommand("experiment", "seeded Monte Carlo replication");
    add_common(exp);
    CLI::App* diag = app.add_subcommand("diagnose", "regularity, effective rank, entry decay");
    add_common(diag);
    CLI::App* ver = app.add_subcommand("verify-lattice", "empirical lattice-regularity constants");
    add_common(ver);
    ver->add_option("--lattice", lattice_path, "lattice CSV (default: generate from config)");
    ver->add_option("--sample-sites", sample_sites, "sites to sample");

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed()) return cmd_simulate(common);
        if (est->parsed()) return cmd_estimate(common, lattice_path, sample_path);
        if (exp->parsed()) return cmd_experiment(common);
        if (diag->parsed()) return cmd_diagnose(common);
        if (ver->parsed()) return cmd_verify_lattice(common, lattice_path, sample_sites);
    } catch (const lif::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitNumerical;
    }
    return 0;
}
