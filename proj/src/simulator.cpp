#include "firesale/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Dense>

#include "firesale/errors.hpp"

namespace firesale {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<double> prices_at(const PathState& s, const Scenario& scn) {
    return eval_demand(s.t, s.pi, scn).q;
}

double min_inactive_margin(const PathState& s, const Scenario& scn, int* argmin = nullptr) {
    const std::vector<double> q = prices_at(s, scn);
    double best = kInf;
    for (int i = 0; i < scn.n_banks(); ++i) {
        if (s.active[i]) continue;
        const double g = activation_margin(scn.banks[i], scn.assets, scn.regulation, q);
        if (g < best) {
            best = g;
            if (argmin) *argmin = i;
        }
    }
    return best;
}

// Projects the active banks' liquidation fractions back onto the
// theta = theta_min manifold with one Newton step, holding t and psi fixed.
void newton_project(PathState& s, const Scenario& scn) {
    const int n = scn.n_banks(), m = scn.n_assets();
    const double theta = scn.regulation.theta_min;
    std::vector<int> act;
    for (int i = 0; i < n; ++i) {
        if (s.active[i]) act.push_back(i);
    }
    const int na = static_cast<int>(act.size());
    if (na == 0) return;

    const DemandEval ev = eval_demand(s.t, s.pi, scn);
    Eigen::VectorXd r(na);
    Eigen::MatrixXd J(na, na);
    for (int ri = 0; ri < na; ++ri) {
        const int i = act[ri];
        const auto& book = scn.banks[i];
        double marked = 0.0, rwa_tradable = 0.0, holdings_value = 0.0, rwa_hold = 0.0;
        for (int k = 0; k < m; ++k) {
            const double remaining = book.holdings[k] * (1.0 - s.pi[i]);
            marked += remaining * ev.q[k];
            rwa_tradable += scn.assets[k].alpha * remaining * ev.q[k];
            holdings_value += book.holdings[k] * ev.q[k];
            rwa_hold += scn.assets[k].alpha * book.holdings[k] * ev.q[k];
        }
        const double num = book.liquid + s.psi[i] + marked + book.nontradable - book.liabilities;
        const double den = rwa_tradable + book.nontradable_weight * book.nontradable;
        r[ri] = num / den - theta;
        for (int rj = 0; rj < na; ++rj) {
            const int j = act[rj];
            double dnum = 0.0, dden = 0.0;
            for (int k = 0; k < m; ++k) {
                const double dq = ev.ft[k] * ev.fg_prime[k] * scn.banks[j].holdings[k];
                const double remaining = book.holdings[k] * (1.0 - s.pi[i]);
                dnum += remaining * dq;
                dden += scn.assets[k].alpha * remaining * dq;
            }
            if (i == j) {
                dnum -= holdings_value;
                dden -= rwa_hold;
            }
            J(ri, rj) = (dnum * den - num * dden) / (den * den);
        }
    }
    const Eigen::VectorXd delta = J.partialPivLu().solve(r);
    for (int ri = 0; ri < na; ++ri) s.pi[act[ri]] -= delta[ri];
}

// Residual check + optional projection; throws ConstraintDrift past 10x tol.
void enforce_constraint(PathState& s, const Scenario& scn, const IntegratorConfig& cfg) {
    const int n = scn.n_banks();
    const std::vector<double> q = prices_at(s, scn);
    double worst = 0.0;
    for (int i = 0; i < n; ++i) {
        if (!s.active[i]) continue;
        const double theta_i =
            capital_ratio(scn.banks[i], s.pi[i], q, s.psi[i], scn.assets, scn.regulation);
        worst = std::max(worst, std::fabs(theta_i - scn.regulation.theta_min));
    }
    if (worst <= cfg.constraint_tol) return;
    if (worst > 10.0 * cfg.constraint_tol) {
        std::ostringstream msg;
        msg << "active bank drifted " << worst << " from theta_min at t = " << s.t;
        throw ConstraintDrift(msg.str());
    }
    newton_project(s, scn);
    const std::vector<double> q2 = prices_at(s, scn);
    for (int i = 0; i < n; ++i) {
        if (!s.active[i]) continue;
        const double theta_i =
            capital_ratio(scn.banks[i], s.pi[i], q2, s.psi[i], scn.assets, scn.regulation);
        if (std::fabs(theta_i - scn.regulation.theta_min) > cfg.constraint_tol) {
            throw ConstraintDrift("Newton projection failed to restore the constraint");
        }
    }
}

void push_sample(Trajectory& traj, const PathState& s, const Scenario& scn) {
    SystemState snap = materialize(s, scn);
    if (!traj.samples.empty() && traj.samples.back().t >= snap.t) {
        traj.samples.back() = std::move(snap);  // same instant: keep the post-event view
    } else {
        traj.samples.push_back(std::move(snap));
    }
}

Trajectory simulate_once(const Scenario& scn, const IntegratorConfig& cfg, double step) {
    const int n = scn.n_banks();
    const double horizon = scn.horizon;

    PathState state;
    state.t = 0.0;
    state.pi.assign(n, 0.0);
    state.psi.assign(n, 0.0);
    state.active.assign(n, 0);

    Trajectory traj;
    traj.hitting_times.assign(n, std::nullopt);

    // Banks already on the boundary at t = 0 (theta(0) = theta_min exactly).
    {
        const std::vector<double> q0 = prices_at(state, scn);
        for (int i = 0; i < n; ++i) {
            if (activation_margin(scn.banks[i], scn.assets, scn.regulation, q0) <= 0.0) {
                state.active[i] = 1;
                traj.hitting_times[i] = 0.0;
            }
        }
    }

    std::vector<double> grid(cfg.output_grid);
    for (int j = 0; j < cfg.output_grid; ++j) {
        grid[j] = horizon * static_cast<double>(j) / (cfg.output_grid - 1);
    }
    grid.back() = horizon;

    push_sample(traj, state, scn);

    std::size_t next_grid = 1;
    std::vector<double> q_prev = prices_at(state, scn);
    std::vector<double> pi_prev = state.pi;

    while (state.t < horizon) {
        double target = std::min(state.t + step, horizon);
        bool lands_on_grid = false;
        if (next_grid < grid.size() && grid[next_grid] <= target + 1e-15 * horizon) {
            target = grid[next_grid];
            lands_on_grid = true;
        }

        PathState trial = rk4_step(state, target - state.t, scn, cfg.lambda_floor);
        trial.t = target;

        if (min_inactive_margin(trial, scn) <= 0.0) {
            const ActivationEvent event = locate_activation(state, target, scn, cfg);
            PathState at_event = rk4_step(state, event.tau - state.t, scn, cfg.lambda_floor);
            at_event.t = event.tau;
            for (int i : event.banks) {
                at_event.active[i] = 1;
                traj.hitting_times[i] = event.tau;
            }
            enforce_constraint(at_event, scn, cfg);
            state = std::move(at_event);
            push_sample(traj, state, scn);
            q_prev = prices_at(state, scn);
            pi_prev = state.pi;
            continue;  // fresh initial-value problem from tau
        }

        enforce_constraint(trial, scn, cfg);

        // Monotonicity and no-sellout guards (Pi up, q down, Gamma < s).
        const std::vector<double> q_now = prices_at(trial, scn);
        for (std::size_t k = 0; k < q_now.size(); ++k) {
            if (q_now[k] > q_prev[k] + 1e-12) {
                throw ConstraintDrift("price increased along the trajectory");
            }
        }
        for (int i = 0; i < n; ++i) {
            if (trial.pi[i] < pi_prev[i] - 1e-12) {
                throw ConstraintDrift("liquidation fraction decreased along the trajectory");
            }
            if (trial.pi[i] >= 1.0) {
                throw ConstraintDrift("bank liquidated its entire tradable book");
            }
        }
        q_prev = q_now;
        pi_prev = trial.pi;
        state = std::move(trial);

        if (lands_on_grid) {
            push_sample(traj, state, scn);
            ++next_grid;
        }
    }

    if (traj.samples.back().t < horizon) push_sample(traj, state, scn);
    return traj;
}

}  // namespace

PathState rk4_step(const PathState& state, double h, const Scenario& scn, double lambda_floor) {
    const int n = scn.n_banks();
    auto deriv = [&](double t, const std::vector<double>& pi) {
        return rhs(t, pi, state.active, scn, lambda_floor);
    };
    auto shifted = [&](const std::vector<double>& base, const std::vector<double>& d, double w) {
        std::vector<double> out(base);
        for (int i = 0; i < n; ++i) out[i] += w * d[i];
        return out;
    };

    const Derivatives k1 = deriv(state.t, state.pi);
    const Derivatives k2 = deriv(state.t + 0.5 * h, shifted(state.pi, k1.pi_dot, 0.5 * h));
    const Derivatives k3 = deriv(state.t + 0.5 * h, shifted(state.pi, k2.pi_dot, 0.5 * h));
    const Derivatives k4 = deriv(state.t + h, shifted(state.pi, k3.pi_dot, h));

    PathState next = state;
    next.t = state.t + h;
    for (int i = 0; i < n; ++i) {
        next.pi[i] += h / 6.0 *
                      (k1.pi_dot[i] + 2.0 * k2.pi_dot[i] + 2.0 * k3.pi_dot[i] + k4.pi_dot[i]);
        next.psi[i] += h / 6.0 * (k1.psi_dot[i] + 2.0 * k2.psi_dot[i] + 2.0 * k3.psi_dot[i] +
                                  k4.psi_dot[i]);
    }
    return next;
}

SystemState materialize(const PathState& state, const Scenario& scn) {
    const int n = scn.n_banks(), m = scn.n_assets();
    SystemState snap;
    snap.t = state.t;
    snap.pi = state.pi;
    snap.psi = state.psi;
    snap.active = state.active;
    snap.q = eval_demand(state.t, state.pi, scn).q;
    snap.gamma.resize(static_cast<std::size_t>(n) * m);
    for (int i = 0; i < n; ++i) {
        for (int k = 0; k < m; ++k) {
            snap.gamma[static_cast<std::size_t>(i) * m + k] =
                scn.banks[i].holdings[k] * state.pi[i];
        }
    }
    return snap;
}

ActivationEvent locate_activation(const PathState& at_lo, double t_hi, const Scenario& scn,
                                  const IntegratorConfig& cfg) {
    double lo = at_lo.t, hi = t_hi;
    while (hi - lo > cfg.event_tol) {
        const double mid = 0.5 * (lo + hi);
        PathState probe = rk4_step(at_lo, mid - at_lo.t, scn, cfg.lambda_floor);
        probe.t = mid;
        (min_inactive_margin(probe, scn) <= 0.0 ? hi : lo) = mid;
    }
    ActivationEvent event;
    event.tau = hi;
    PathState at_tau = rk4_step(at_lo, hi - at_lo.t, scn, cfg.lambda_floor);
    at_tau.t = hi;
    const std::vector<double> q = prices_at(at_tau, scn);
    for (int i = 0; i < scn.n_banks(); ++i) {
        if (at_tau.active[i]) continue;
        if (activation_margin(scn.banks[i], scn.assets, scn.regulation, q) <= 0.0) {
            event.banks.push_back(i);
        }
    }
    return event;
}

SystemState renormalize_active(const SystemState& state, const Scenario& scn,
                               const IntegratorConfig& cfg) {
    PathState s;
    s.t = state.t;
    s.pi = state.pi;
    s.psi = state.psi;
    s.active = state.active;
    enforce_constraint(s, scn, cfg);
    return materialize(s, scn);
}

Trajectory simulate(const Scenario& scn, const IntegratorConfig& config) {
    require_valid(scn);
    IntegratorConfig cfg = config;
    if (cfg.output_grid < 2) cfg.output_grid = 2;
    double step = cfg.base_step > 0.0 ? cfg.base_step : scn.horizon / 2000.0;
    if (cfg.event_tol >= step) cfg.event_tol = step * 1e-6;

    for (int attempt = 0;; ++attempt) {
        try {
            return simulate_once(scn, cfg, step);
        } catch (const ConstraintDrift&) {
            if (attempt >= cfg.max_retries) throw;
            step *= 0.5;  // integration failure: refine and retry
        }
    }
}

}  // namespace firesale
