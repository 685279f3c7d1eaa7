#include "lif/experiment.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <mutex>
#include <thread>

#include "lif/io.hpp"
#include "lif/parallel.hpp"
#include "lif/rng.hpp"
#include "lif/simulate.hpp"

namespace lif {

namespace {

using nlohmann::json;

Eigen::VectorXd vector_from_json(const json& j, const char* what) {
    if (j.is_number()) {
        Eigen::VectorXd v(1);
        v[0] = j.get<double>();
        return v;
    }
    if (!j.is_array() || j.empty()) throw ConfigError(std::string(what) + " must be a number or array");
    Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
    return v;
}

json vector_to_json(const Eigen::VectorXd& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
}

Partition make_partition(const ExperimentConfig& cfg, const Lattice& lat, std::uint64_t seed) {
    if (cfg.scheme == "uc") return partition_uniform(lat.n(), cfg.bins, seed);
    if (cfg.scheme == "nuc") return partition_nonuniform(lat.n(), cfg.bins, seed);
    if (cfg.scheme == "rectangular") return partition_rectangular(lat, cfg.grid);
    if (cfg.scheme == "singleton") return partition_singleton(lat.n());
    throw ConfigError("unknown partition scheme: " + cfg.scheme);
}

}  // namespace

ExperimentConfig parse_config(const json& j) {
    ExperimentConfig cfg;
    try {
        const json& lat = j.at("lattice");
        cfg.N = lat.at("N").get<int>();
        cfg.dim = lat.value("dim", 2);
        cfg.side = lat.value("side", 1.0);
        cfg.delta = lat.value("delta", 0.0);

        cfg.nu = j.at("nu").get<double>();
        cfg.m = j.at("m").get<int>();
        if (j.contains("truth")) {
            MaternParams t;
            t.phi = j["truth"].at("phi").get<double>();
            t.rho = vector_from_json(j["truth"].at("rho"), "truth.rho");
            t.nu = cfg.nu;
            cfg.truth = t;
        }

        if (j.contains("partition")) {
            const json& p = j["partition"];
            cfg.scheme = p.value("scheme", "uc");
            cfg.bins = p.value("bins", 1);
            if (p.contains("grid")) cfg.grid = p["grid"].get<std::vector<int>>();
        }

        const json& est = j.at("estimation");
        const std::string mode = est.at("mode").get<std::string>();
        if (mode == "fixed-rho") {
            cfg.estimation.mode = EstimateSpec::Mode::FixedRho;
            cfg.estimation.rho_fixed = vector_from_json(est.at("rho"), "estimation.rho");
        } else if (mode == "profile") {
            cfg.estimation.mode = EstimateSpec::Mode::Profile;
            cfg.estimation.x0 = vector_from_json(est.at("x0"), "estimation.x0");
            const json& b = est.at("bounds");
            if (!b.is_array() || b.size() != static_cast<std::size_t>(cfg.estimation.x0.size()))
                throw ConfigError("estimation.bounds must list [lo,hi] per coordinate");
            cfg.estimation.opt.lo.resize(cfg.estimation.x0.size());
            cfg.estimation.opt.hi.resize(cfg.estimation.x0.size());
            for (Eigen::Index i = 0; i < cfg.estimation.x0.size(); ++i) {
                cfg.estimation.opt.lo[i] = b[static_cast<std::size_t>(i)].at(0).get<double>();
                cfg.estimation.opt.hi[i] = b[static_cast<std::size_t>(i)].at(1).get<double>();
            }
            cfg.estimation.opt.fd_step = est.value("fd_step", 1e-3);
            cfg.estimation.opt.rel_tol = est.value("rel_tol", 1e-5);
            cfg.estimation.opt.max_iter = est.value("max_iter", 50);
            cfg.estimation.opt.memory = est.value("memory", 10);
        } else {
            throw ConfigError("estimation.mode must be fixed-rho or profile");
        }

        cfg.replicates = j.value("replicates", 1);
        cfg.seed = j.value("seed", static_cast<std::uint64_t>(0));
        cfg.fix_lattice = j.value("fix_lattice", false);
        cfg.jitter = j.value("jitter", 1e-10);
        cfg.dense_cap = j.value("dense_cap", static_cast<std::size_t>(20000));
        cfg.out_dir = j.value("out_dir", "out");
        cfg.psi_max_n = j.value("psi_max_n", static_cast<std::size_t>(4000));
        cfg.decay_min_scaled_dist = j.value("decay_min_scaled_dist", 4.0);
        cfg.regularity_sample_sites = j.value("regularity_sample_sites", static_cast<std::size_t>(100));
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }

    if (cfg.N < 2) throw ConfigError("lattice.N must be >= 2");
    if (cfg.dim < 1 || cfg.dim > 3) throw ConfigError("lattice.dim must be 1..3");
    if (cfg.side <= 0.0) throw ConfigError("lattice.side must be positive");
    if (cfg.delta < 0.0) throw ConfigError("lattice.delta must be >= 0");
    if (cfg.nu <= 0.0) throw ConfigError("nu must be positive");
    if (cfg.m < 1) throw ConfigError("m must be >= 1");
    if (cfg.replicates < 1) throw ConfigError("replicates must be >= 1");
    if (cfg.scheme == "rectangular" && cfg.grid.size() != static_cast<std::size_t>(cfg.dim))
        throw ConfigError("partition.grid must list one count per axis");
    if (cfg.truth && (cfg.truth->rho.array() <= 0.0).any())
        throw ConfigError("truth.rho must be positive");
    const Eigen::Index rho_len = cfg.estimation.mode == EstimateSpec::Mode::FixedRho
                                     ? cfg.estimation.rho_fixed.size()
                                     : cfg.estimation.x0.size();
    if (rho_len != 1 && rho_len != cfg.dim)
        throw ConfigError("estimation rho length must be 1 or dim");
    if (cfg.truth && cfg.truth->rho.size() != rho_len)
        throw ConfigError("truth.rho length must match the estimation rho length");
    if (cfg.m < cfg.nu + 0.5 * cfg.dim) {
        // order below the consistency threshold is allowed but flagged
        std::fprintf(stderr, "warning: m=%d is below nu + d/2 = %g\n", cfg.m,
                     cfg.nu + 0.5 * cfg.dim);
    }
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config: " + path);
    json j;
    try {
        f >> j;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config parse: ") + e.what());
    }
    return parse_config(j);
}

json config_to_json(const ExperimentConfig& cfg) {
    json j;
    j["lattice"] = {{"N", cfg.N}, {"dim", cfg.dim}, {"side", cfg.side}, {"delta", cfg.delta}};
    j["nu"] = cfg.nu;
    j["m"] = cfg.m;
    if (cfg.truth) j["truth"] = {{"phi", cfg.truth->phi}, {"rho", vector_to_json(cfg.truth->rho)}};
    j["partition"] = {{"scheme", cfg.scheme}, {"bins", cfg.bins}};
    if (!cfg.grid.empty()) j["partition"]["grid"] = cfg.grid;
    if (cfg.estimation.mode == EstimateSpec::Mode::FixedRho) {
        j["estimation"] = {{"mode", "fixed-rho"}, {"rho", vector_to_json(cfg.estimation.rho_fixed)}};
    } else {
        json bounds = json::array();
        for (Eigen::Index i = 0; i < cfg.estimation.x0.size(); ++i)
            bounds.push_back({cfg.estimation.opt.lo[i], cfg.estimation.opt.hi[i]});
        j["estimation"] = {{"mode", "profile"},
                           {"x0", vector_to_json(cfg.estimation.x0)},
                           {"bounds", bounds},
                           {"fd_step", cfg.estimation.opt.fd_step},
                           {"rel_tol", cfg.estimation.opt.rel_tol},
                           {"max_iter", cfg.estimation.opt.max_iter},
                           {"memory", cfg.estimation.opt.memory}};
    }
    j["replicates"] = cfg.replicates;
    j["seed"] = cfg.seed;
    j["fix_lattice"] = cfg.fix_lattice;
    j["jitter"] = cfg.jitter;
    j["dense_cap"] = cfg.dense_cap;
    j["out_dir"] = cfg.out_dir;
    return j;
}

std::uint64_t replicate_seed(std::uint64_t master, int replicate, int component) {
    return rng::derive_seed(master, static_cast<std::uint64_t>(replicate), static_cast<std::uint64_t>(component));
}

ExperimentSummary run_experiment(const ExperimentConfig& cfg, int threads) {
    if (!cfg.truth) throw ConfigError("experiment config needs truth parameters");
    const auto t0 = std::chrono::steady_clock::now();
    ExperimentSummary summary;
    summary.records.resize(static_cast<std::size_t>(cfg.replicates));

    const std::uint64_t fixed_lattice_seed = replicate_seed(cfg.seed, 0, 0);

    std::atomic<int> next{0};
    auto worker = [&]() {
        for (;;) {
            const int r = next.fetch_add(1);
            if (r >= cfg.replicates) return;
            ReplicateRecord rec;
            rec.replicate = r;
            const auto r0 = std::chrono::steady_clock::now();
            try {
                const std::uint64_t lat_seed =
                    cfg.fix_lattice ? fixed_lattice_seed : replicate_seed(cfg.seed, r, 0);
                const auto lat = std::make_shared<Lattice>(
                    build_perturbed_lattice(cfg.N, cfg.dim, cfg.side, cfg.delta, lat_seed));

                PreconditionerCoeffs pc = precondition_all(*lat, cfg.m, cfg.nu, 1);

                if (!cfg.truth) throw std::runtime_error("experiment needs truth parameters");
                MaternParams truth = *cfg.truth;
                truth.nu = cfg.nu;
                GpFactor factor = factor_cov(*lat, truth, cfg.jitter, cfg.dense_cap);
                const Eigen::VectorXd raw =
                    sample_with_factor(factor, replicate_seed(cfg.seed, r, 1), 0);
                factor.l.resize(0, 0);  // free before the loss evaluation

                const PreconditionedSample y = apply_preconditioner(pc, raw);
                const Partition part = make_partition(cfg, *lat, replicate_seed(cfg.seed, r, 2));

                EvalOptions opts;
                opts.threads = 1;  // replicate-level parallelism only
                const EstimationResult est = estimate(y, pc, part, cfg.estimation, truth, opts);

                rec.phi_hat = est.phi_hat;
                rec.rho_hat = est.rho_hat;
                rec.xi_hat = est.xi_hat.value();
                rec.iterations = est.iterations;
                rec.converged = est.converged;
            } catch (const std::exception& e) {
                rec.failed = true;
                rec.error = e.what();
            }
            rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - r0).count();
            summary.records[static_cast<std::size_t>(r)] = std::move(rec);
        }
    };

    const int nw = std::max(1, std::min(threads, cfg.replicates));
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(nw));
    for (int w = 0; w < nw; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();

    summarize(summary);
    summary.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return summary;
}

void summarize(ExperimentSummary& summary) {
    summary.failures = 0;
    Eigen::Index dim = 0;
    int count = 0;
    for (const auto& r : summary.records) {
        if (r.failed) {
            ++summary.failures;
            continue;
        }
        dim = r.xi_hat.size();
        ++count;
    }
    if (count == 0 || dim == 0) {
        summary.xi_mean.resize(0);
        summary.xi_sd.resize(0);
        return;
    }
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(dim);
    for (const auto& r : summary.records)
        if (!r.failed) mean += r.xi_hat;
    mean /= count;
    summary.xi_mean = mean;
    if (count < 2) {
        summary.xi_sd.resize(0);
        return;
    }
    Eigen::VectorXd ss = Eigen::VectorXd::Zero(dim);
    for (const auto& r : summary.records)
        if (!r.failed) ss += (r.xi_hat - mean).cwiseAbs2();
    summary.xi_sd = (ss / (count - 1)).cwiseSqrt();
}

void write_replicates_csv(const std::string& path, const ExperimentSummary& summary) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    Eigen::Index rho_len = 0, xi_len = 0;
    for (const auto& r : summary.records) {
        if (r.failed) continue;
        rho_len = r.rho_hat.size();
        xi_len = r.xi_hat.size();
        break;
    }
    f << "replicate,phi_hat";
    for (Eigen::Index i = 0; i < rho_len; ++i)
        f << ",rho_hat" << (rho_len > 1 ? "_" + std::to_string(i + 1) : "");
    for (Eigen::Index i = 0; i < xi_len; ++i)
        f << ",xi_hat" << (xi_len > 1 ? "_" + std::to_string(i + 1) : "");
    f << ",iterations,converged,failed\n";
    for (const auto& r : summary.records) {
        f << r.replicate << ",";
        if (r.failed) {
            f << "nan";
            for (Eigen::Index i = 0; i < rho_len + xi_len; ++i) f << ",nan";
            f << ",0,0,1\n";
            continue;
        }
        f << format_double(r.phi_hat);
        for (Eigen::Index i = 0; i < rho_len; ++i) f << "," << format_double(r.rho_hat[i]);
        for (Eigen::Index i = 0; i < xi_len; ++i) f << "," << format_double(r.xi_hat[i]);
        f << "," << r.iterations << "," << (r.converged ? 1 : 0) << ",0\n";
    }
}

void write_summary_json(const std::string& path, const ExperimentSummary& summary,
                        const ExperimentConfig& cfg) {
    json j;
    j["replicates"] = summary.records.size();
    j["failures"] = summary.failures;
    j["wall_seconds"] = summary.wall_seconds;
    j["xi_mean"] = summary.xi_mean.size() ? json(vector_to_json(summary.xi_mean)) : json(nullptr);
    j["xi_sd"] = summary.xi_sd.size() ? json(vector_to_json(summary.xi_sd)) : json(nullptr);
    json secs = json::array();
    for (const auto& r : summary.records) secs.push_back(r.seconds);
    j["per_replicate_seconds"] = secs;
    json errors = json::array();
    for (const auto& r : summary.records)
        if (r.failed) errors.push_back({{"replicate", r.replicate}, {"error", r.error}});
    j["errors"] = errors;
    j["config"] = config_to_json(cfg);
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    f << j.dump(2) << "\n";
}

double entry_decay_slope(const PreconditionerCoeffs& pc, const Eigen::VectorXd& rho,
                         double min_scaled_dist, std::size_t max_anchor_sites, int threads) {
    const Lattice& lat = *pc.lattice;
    const std::size_t n = lat.n();
    const std::size_t anchors = std::min(max_anchor_sites, n);
    const std::size_t stride = n / anchors;
    const double big_n = static_cast<double>(pc.n_scale);

    // cancellation floor relative to the diagonal scale
    double max_diag = 0.0;
    for (std::size_t s = 0; s < n; s += std::max<std::size_t>(1, n / 64))
        max_diag = std::max(max_diag, preconditioned_cov_entry(pc, s, s, rho, pc.nu));
    const double floor = 1e-13 * max_diag;

    std::vector<double> sx(anchors, 0.0), sy(anchors, 0.0), sxx(anchors, 0.0), sxy(anchors, 0.0);
    std::vector<std::size_t> cnt(anchors, 0);
    parallel_for(anchors, threads, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t q = lo; q < hi; ++q) {
            const std::size_t s = q * stride;
            for (std::size_t t = 0; t < n; ++t) {
                if (t == s) continue;
                const double d = std::sqrt(lat.dist2(s, t));
                if (big_n * d < min_scaled_dist) continue;
                const double k = std::abs(preconditioned_cov_entry(pc, s, t, rho, pc.nu));
                if (k <= floor) continue;
                const double x = std::log(1.0 + big_n * d);
                const double y = std::log(k);
                sx[q] += x;
                sy[q] += y;
                sxx[q] += x * x;
                sxy[q] += x * y;
                ++cnt[q];
            }
        }
    });
    double tx = 0, ty = 0, txx = 0, txy = 0;
    std::size_t m = 0;
    for (std::size_t q = 0; q < anchors; ++q) {
        tx += sx[q];
        ty += sy[q];
        txx += sxx[q];
        txy += sxy[q];
        m += cnt[q];
    }
    if (m < 8) throw std::runtime_error("entry_decay_slope: too few far-field pairs");
    const double dm = static_cast<double>(m);
    return (dm * txy - tx * ty) / (dm * txx - tx * tx);
}

nlohmann::json diagnose(const ExperimentConfig& cfg, int threads) {
    const auto lat = std::make_shared<Lattice>(build_perturbed_lattice(
        cfg.N, cfg.dim, cfg.side, cfg.delta, replicate_seed(cfg.seed, 0, 0)));
    if (lat->n() > cfg.psi_max_n)
        throw std::invalid_argument("diagnose: lattice exceeds psi_max_n dense cap");
    const PreconditionerCoeffs pc = precondition_all(*lat, cfg.m, cfg.nu, threads);
    const Partition part = make_partition(cfg, *lat, replicate_seed(cfg.seed, 0, 2));
    const RegularityReport reg = verify_regularity(*lat, cfg.regularity_sample_sites);

    Eigen::VectorXd rho;
    if (cfg.estimation.mode == EstimateSpec::Mode::FixedRho) {
        rho = cfg.estimation.rho_fixed;
    } else if (cfg.truth) {
        rho = cfg.truth->rho;
    } else {
        rho = cfg.estimation.x0;
    }

    EvalOptions opts;
    opts.threads = threads;
    const double psi = effective_rank_psi(pc, part, rho, cfg.psi_max_n, opts);
    const double slope = entry_decay_slope(pc, rho, cfg.decay_min_scaled_dist, 64, threads);

    json j;
    j["regularity"] = {{"c_min_hat", reg.c_min_hat},
                       {"c_max_hat", reg.c_max_hat},
                       {"max_ratio_violation", reg.max_ratio_violation},
                       {"sampled_pairs", reg.sampled_pairs},
                       {"degenerate", reg.degenerate}};
    j["psi"] = psi;
    j["entry_decay_slope"] = slope;
    j["rho"] = vector_to_json(rho);
    j["n"] = lat->n();
    j["b_eff"] = part.b_eff();
    return j;
}

}  // namespace lif
