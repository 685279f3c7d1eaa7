#include "lif/optimize.hpp"

#include <cmath>
#include <deque>
#include <stdexcept>

namespace lif {

namespace {

Eigen::VectorXd clamp_to_box(Eigen::VectorXd x, const OptimizerConfig& cfg) {
    for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = std::clamp(x[i], cfg.lo[i], cfg.hi[i]);
    return x;
}

bool inside_box(const Eigen::VectorXd& x, const OptimizerConfig& cfg) {
    return (x.array() >= cfg.lo.array()).all() && (x.array() <= cfg.hi.array()).all();
}

}  // namespace

Eigen::VectorXd fd_gradient(const Objective& f, const Eigen::VectorXd& x,
                            const OptimizerConfig& cfg) {
    const double h = cfg.fd_step;
    Eigen::VectorXd g(x.size());
    double fx = 0.0;
    bool have_fx = false;
    Eigen::VectorXd xp = x;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const bool can_up = x[i] + h <= cfg.hi[i];
        const bool can_down = x[i] - h >= cfg.lo[i];
        if (can_up && can_down) {
            xp[i] = x[i] + h;
            const double fu = f(xp);
            xp[i] = x[i] - h;
            const double fd = f(xp);
            g[i] = (fu - fd) / (2.0 * h);
        } else if (can_up || can_down) {
            if (!have_fx) {
                fx = f(x);
                have_fx = true;
            }
            const double step = can_up ? h : -h;
            xp[i] = x[i] + step;
            g[i] = (f(xp) - fx) / step;
        } else {
            g[i] = 0.0;
        }
        xp[i] = x[i];
    }
    return g;
}

MaximizeResult maximize(const Objective& f, const Eigen::VectorXd& x0, const OptimizerConfig& cfg) {
    if (cfg.lo.size() != x0.size() || cfg.hi.size() != x0.size())
        throw std::invalid_argument("maximize: bounds must match the dimension");
    if ((cfg.lo.array() >= cfg.hi.array()).any())
        throw std::invalid_argument("maximize: need lo < hi per coordinate");
    if (!inside_box(x0, cfg)) throw std::invalid_argument("maximize: x0 outside the bounds");
    if (!(cfg.fd_step > 0.0) || !(cfg.rel_tol > 0.0) || cfg.max_iter < 1)
        throw std::invalid_argument("maximize: invalid optimizer configuration");

    const Eigen::Index p = x0.size();
    Eigen::VectorXd x = x0;
    double fx = f(x);
    Eigen::VectorXd g = fd_gradient(f, x, cfg);

    MaximizeResult res;
    res.trace.push_back(fx);

    std::deque<Eigen::VectorXd> s_hist, y_hist;
    std::deque<double> rho_hist;

    auto projected_ascent = [&](const Eigen::VectorXd& xi, const Eigen::VectorXd& gi) {
        // gradient components pushing outside an active bound contribute no ascent
        Eigen::VectorXd pg = gi;
        for (Eigen::Index i = 0; i < p; ++i) {
            if (xi[i] <= cfg.lo[i] && gi[i] < 0.0) pg[i] = 0.0;
            if (xi[i] >= cfg.hi[i] && gi[i] > 0.0) pg[i] = 0.0;
        }
        return pg;
    };

    bool converged = false;
    int it = 0;
    for (; it < cfg.max_iter; ++it) {
        const Eigen::VectorXd pg = projected_ascent(x, g);
        if (pg.norm() <= 1e-14 * std::max(1.0, std::abs(fx))) {
            converged = true;
            break;
        }

        // two-loop recursion on the ascent direction
        Eigen::VectorXd d = pg;
        std::vector<double> alpha(s_hist.size());
        for (std::size_t k = s_hist.size(); k-- > 0;) {
            alpha[k] = rho_hist[k] * s_hist[k].dot(d);
            d -= alpha[k] * y_hist[k];
        }
        if (!s_hist.empty()) {
            const double gamma = s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
            d *= gamma;
        } else {
            d /= d.norm();  // no curvature yet: unit step in parameter space
        }
        for (std::size_t k = 0; k < s_hist.size(); ++k) {
            const double beta = rho_hist[k] * y_hist[k].dot(d);
            d += (alpha[k] - beta) * s_hist[k];
        }
        if (d.dot(pg) <= 0.0) d = pg / pg.norm();  // not an ascent direction, reset

        // Armijo backtracking along the projected path, with expansion when
        // the unit step already improves (flat valleys need long steps)
        bool accepted = false;
        Eigen::VectorXd x_new;
        double f_new = fx;
        {
            double step = 1.0;
            Eigen::VectorXd x_try;
            double f_try;
            auto armijo = [&](double a) {
                x_try = clamp_to_box(x + a * d, cfg);
                const Eigen::VectorXd dx = x_try - x;
                if (dx.norm() == 0.0) return false;
                f_try = f(x_try);
                return f_try >= fx + 1e-4 * g.dot(dx);
            };
            for (int ls = 0; ls < 40; ++ls) {
                if (armijo(step)) {
                    accepted = true;
                    x_new = x_try;
                    f_new = f_try;
                    break;
                }
                step *= 0.5;
            }
            if (accepted && step == 1.0) {
                for (int grow = 0; grow < 24; ++grow) {
                    step *= 2.0;
                    if (!armijo(step) || f_try <= f_new) break;
                    x_new = x_try;
                    f_new = f_try;
                }
            }
        }
        if (!accepted) {
            converged = false;
            break;  // line-search failure: best-so-far with converged=false
        }

        const Eigen::VectorXd g_new = fd_gradient(f, x_new, cfg);
        const Eigen::VectorXd s = x_new - x;
        const Eigen::VectorXd yv = g - g_new;  // minimization convention on -f
        const double sy = s.dot(yv);
        if (sy > 1e-10 * s.norm() * yv.norm()) {
            s_hist.push_back(s);
            y_hist.push_back(yv);
            rho_hist.push_back(1.0 / sy);
            if (static_cast<int>(s_hist.size()) > cfg.memory) {
                s_hist.pop_front();
                y_hist.pop_front();
                rho_hist.pop_front();
            }
        }

        const double change = std::abs(f_new - fx);
        x = x_new;
        fx = f_new;
        g = g_new;
        res.trace.push_back(fx);
        if (change <= cfg.rel_tol * std::max({std::abs(fx), std::abs(res.trace[res.trace.size() - 2]), 1.0})) {
            converged = true;
            ++it;
            break;
        }
    }

    res.x = x;
    res.fx = fx;
    res.iterations = it;
    res.converged = converged;
    res.bound_active.resize(static_cast<std::size_t>(p));
    for (Eigen::Index i = 0; i < p; ++i) {
        const double span = cfg.hi[i] - cfg.lo[i];
        res.bound_active[static_cast<std::size_t>(i)] =
            x[i] <= cfg.lo[i] + 1e-12 * span || x[i] >= cfg.hi[i] - 1e-12 * span;
    }
    return res;
}

EstimationResult estimate(const PreconditionedSample& y, const PreconditionerCoeffs& pc,
                          const Partition& part, const EstimateSpec& spec,
                          const std::optional<MaternParams>& truth, const EvalOptions& opts) {
    EstimationResult res;
    if (spec.mode == EstimateSpec::Mode::FixedRho) {
        if (spec.rho_fixed.size() == 0)
            throw std::invalid_argument("estimate: fixed-rho mode needs a rho value");
        const ProfileStats ps = profile_stats(y, pc, part, spec.rho_fixed, opts);
        res.phi_hat = phi_hat(ps);
        res.rho_hat = spec.rho_fixed;
        res.a_nonpositive = ps.a_nonpositive;
        res.converged = true;
        res.iterations = 0;
        res.profile_loss = ps.a / std::sqrt(ps.b);
        res.trace = {res.profile_loss};
    } else {
        if (spec.x0.size() == 0) throw std::invalid_argument("estimate: profile mode needs x0");
        const Objective profile = [&](const Eigen::VectorXd& rho) {
            const ProfileStats ps = profile_stats(y, pc, part, rho, opts);
            return ps.a / std::sqrt(ps.b);
        };
        const MaximizeResult opt = maximize(profile, spec.x0, spec.opt);
        const ProfileStats ps = profile_stats(y, pc, part, opt.x, opts);
        res.phi_hat = phi_hat(ps);
        res.rho_hat = opt.x;
        res.a_nonpositive = ps.a_nonpositive;
        res.converged = opt.converged;
        res.iterations = opt.iterations;
        res.bound_active = opt.bound_active;
        res.trace = opt.trace;
        res.profile_loss = opt.fx;
    }
    if (truth) {
        const double nu = pc.nu;
        const Eigen::VectorXd num = microergodic(res.phi_hat, res.rho_hat, nu);
        const Eigen::VectorXd den = microergodic(truth->phi, truth->rho, nu);
        if (num.size() != den.size())
            throw std::invalid_argument("estimate: truth rho length does not match the estimate");
        res.xi_hat = (num.array() / den.array()).matrix();
    }
    return res;
}

}  // namespace lif
