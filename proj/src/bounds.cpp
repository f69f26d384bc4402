#include "firesale/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "firesale/errors.hpp"
#include "firesale/lambert.hpp"

namespace firesale {

double exp_hitting_level(const BoundSchedule& sched, const Scenario& scn, int rank, int asset);

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kLambdaFloor = 1e-12;

double alpha_ratio(const AssetSpec& asset, double theta) {
    const double at = asset.alpha * theta;
    return (1.0 - at) / at;
}

BoundSchedule init_schedule(const Scenario& scn) {
    BoundSchedule sched;
    const ThresholdLadder ladder = make_threshold_ladder(scn.banks, scn.assets, scn.regulation);
    sched.order = ladder.order;
    sched.qbar = ladder.qbar;
    sched.n_banks = scn.n_banks();
    sched.n_assets = scn.n_assets();
    sched.horizon = scn.horizon;
    sched.assets = scn.assets;

    const int K = sched.n_ranked(), m = sched.n_assets;
    sched.holdings.resize(static_cast<std::size_t>(K) * m);
    sched.weights.resize(static_cast<std::size_t>(K) * m);
    for (int r = 0; r < K; ++r) {
        const BankBook& book = scn.banks[sched.order[r]];
        const std::vector<double> c = decomposition_weights(book, scn.assets, scn.regulation);
        for (int l = 0; l < m; ++l) {
            sched.holdings[static_cast<std::size_t>(r) * m + l] = book.holdings[l];
            sched.weights[static_cast<std::size_t>(r) * m + l] = c[l];
        }
    }
    const std::size_t cells = static_cast<std::size_t>(K) * m;
    sched.tau.assign(cells, kInf);
    sched.f_level.assign(cells, kNaN);
    sched.lambda.assign(cells, kNaN);
    sched.nu.assign(cells, kNaN);
    sched.exponent.assign(cells, kNaN);
    return sched;
}

void store(BoundSchedule& s, int rank, int asset, double tau, double level, double lambda,
           double nu, double expo) {
    const std::size_t idx = static_cast<std::size_t>(rank) * s.n_assets + asset;
    s.tau[idx] = tau;
    s.f_level[idx] = level;
    s.lambda[idx] = lambda;
    s.nu[idx] = nu;
    s.exponent[idx] = expo;
}

// Level-space recursion of the closed forms: every quantity is a function of
// the decay levels f_t(tau) only, so it exists for all ranks regardless of
// the horizon (the time decay enters only through the final inversion).
void build_exponential_asset(BoundSchedule& sched, const Scenario& scn, int l) {
    const int K = sched.n_ranked();
    const double theta = scn.regulation.theta_min;
    const AssetSpec& asset = scn.assets[l];
    const double ratio = alpha_ratio(asset, theta);
    const double b = asset.demand.impact_part.b();

    double y_prev = 1.0;
    double weighted_remaining = 0.0;  // sum_{j<=k} s_jl * remaining fraction at tau_k

    for (int k = 0; k < K; ++k) {
        const double s_kl = sched.holding_at(k, l);
        double y;
        if (k == 0) {
            y = std::min(sched.qbar[0], 1.0);
        } else {
            y = exp_hitting_level(sched, scn, k, l);
            y = std::min(y, y_prev);
        }
        weighted_remaining =
            (k == 0 ? 0.0
                    : weighted_remaining *
                          std::pow(y / y_prev, sched.exponent_at(k - 1, l))) +
            s_kl;
        const double lambda = 1.0 - b * ratio * weighted_remaining;
        if (lambda < kLambdaFloor) {
            throw NearSingularRegime("bound schedule: Lambda~ vanished for asset " +
                                     std::to_string(l + 1));
        }
        const double expo = ratio / lambda;
        const double nu = (1.0 - lambda) * std::exp(-expo * std::log(y));
        store(sched, k, l, asset.demand.time_part.inverse(y), y, lambda, nu, expo);
        y_prev = y;
    }
}

void build_generic_asset(BoundSchedule& sched, const Scenario& scn, int l) {
    const int K = sched.n_ranked();
    const double theta = scn.regulation.theta_min;
    const AssetSpec& asset = scn.assets[l];
    const double ratio = alpha_ratio(asset, theta);
    const TimeDecay& ft = asset.demand.time_part;
    const ImpactCurve& fg = asset.demand.impact_part;
    const double T = scn.horizon;
    const bool exp_family = fg.is_exponential_family();

    double t_prev = 0.0;
    for (int k = 0; k < K; ++k) {
        auto liquidated_before = [&](double t) {
            double total = 0.0;
            for (int j = 0; j < k; ++j) {
                total += sched.holding_at(j, l) * (1.0 - sched.remaining_fraction(j, l, t, k));
            }
            return total;
        };
        auto price_gap = [&](double t) {
            return ft.value(t) * fg.value(liquidated_before(t)) - sched.qbar[k];
        };

        double tau;
        if (price_gap(t_prev) <= 0.0) {
            tau = t_prev;
        } else if (price_gap(T) > 0.0) {
            break;  // unreachable before the horizon; so are all later ranks
        } else {
            double lo = t_prev, hi = T;
            while (hi - lo > 1e-12) {
                const double mid = 0.5 * (lo + hi);
                (price_gap(mid) <= 0.0 ? hi : lo) = mid;
            }
            tau = hi;
        }

        const double gamma_sum = liquidated_before(tau);
        double weighted_remaining = sched.holding_at(k, l);
        for (int j = 0; j < k; ++j) {
            weighted_remaining +=
                sched.holding_at(j, l) * sched.remaining_fraction(j, l, tau, k);
        }
        const double lambda =
            1.0 + ratio * weighted_remaining * fg.derivative(gamma_sum) / fg.value(gamma_sum);
        if (lambda < kLambdaFloor) {
            throw NearSingularRegime("bound schedule: Lambda~ vanished for asset " +
                                     std::to_string(l + 1));
        }
        const double level = ft.value(tau);
        const double expo = ratio / lambda;
        const double nu =
            exp_family ? (1.0 - lambda) * std::exp(-expo * std::log(level)) : kNaN;
        store(sched, k, l, tau, level, lambda, nu, expo);
        t_prev = tau;
    }
}

}  // namespace

double BoundSchedule::remaining_fraction(int rank, int asset, double t, int stages) const {
    double prod = 1.0;
    for (int j = rank; j < stages; ++j) {
        const double tau_j = tau_at(j, asset);
        if (!(tau_j < t)) break;  // stage j has not started by t; later ones neither
        double t_hi = t;
        if (j + 1 < stages) {
            const double tau_next = tau_at(j + 1, asset);
            if (tau_next < t) t_hi = tau_next;
        }
        const double f_hi =
            t_hi == t ? assets[asset].demand.time_part.value(t) : level_at(j + 1, asset);
        prod *= std::pow(f_hi / level_at(j, asset), exponent_at(j, asset));
    }
    return prod;
}

// Level solved by the Lambert-W inversion of the stage-(rank-1) bound price.
// Exposed through exp_hitting_time; ranks are 0-based.
double exp_hitting_level(const BoundSchedule& sched, const Scenario& scn, int rank, int asset) {
    if (rank == 0) return std::min(sched.qbar[0], 1.0);
    const double b = scn.assets[asset].demand.impact_part.b();
    double prefix_s = 0.0;
    for (int j = 0; j < rank; ++j) prefix_s += sched.holding_at(j, asset);

    const double nu_prev = sched.nu_at(rank - 1, asset);
    const double lam_prev = sched.lambda_at(rank - 1, asset);
    const double e_prev = sched.exponent_at(rank - 1, asset);
    const double target = std::log(sched.qbar[rank]) + b * prefix_s;

    if (nu_prev == 0.0) {
        // No impact accumulated yet: plain inversion of the decay.
        return sched.qbar[rank] * std::exp(b * prefix_s);
    }
    if (nu_prev < 0.0) {
        throw BranchDomainError("exp_hitting_time: W argument below -1/e");
    }
    const double log_z = std::log(nu_prev / lam_prev) + e_prev * target;
    const double w = lambert_w_from_log(log_z);
    return std::exp((std::log(lam_prev) + std::log(w) - std::log(nu_prev)) / e_prev);
}

double exp_hitting_time(const BoundSchedule& sched, const Scenario& scn, int rank, int asset) {
    if (!scn.assets[asset].demand.impact_part.is_exponential_family()) {
        throw NotExponentialImpact("exp_hitting_time requires an exponential impact curve");
    }
    const double level = exp_hitting_level(sched, scn, rank, asset);
    return scn.assets[asset].demand.time_part.inverse(level);
}

BoundSchedule build_bound_schedule(const Scenario& scn) {
    require_valid(scn);
    BoundSchedule sched = init_schedule(scn);
    for (int l = 0; l < sched.n_assets; ++l) {
        if (scn.assets[l].demand.impact_part.is_exponential_family()) {
            build_exponential_asset(sched, scn, l);
        } else {
            build_generic_asset(sched, scn, l);
        }
    }
    return sched;
}

BoundSchedule build_bound_schedule_generic(const Scenario& scn) {
    require_valid(scn);
    BoundSchedule sched = init_schedule(scn);
    for (int l = 0; l < sched.n_assets; ++l) build_generic_asset(sched, scn, l);
    return sched;
}

BoundedState bounded_liquidations(const BoundSchedule& sched, double t) {
    const int K = sched.n_ranked(), m = sched.n_assets;
    BoundedState out;
    out.pi_tilde.assign(sched.n_banks, 0.0);
    out.gamma_tilde.assign(static_cast<std::size_t>(sched.n_banks) * m, 0.0);
    for (int r = 0; r < K; ++r) {
        double best = 0.0;
        for (int l = 0; l < m; ++l) {
            if (sched.holding_at(r, l) <= 0.0) continue;
            best = std::max(best, 1.0 - sched.remaining_fraction(r, l, t, K));
        }
        const int bank = sched.order[r];
        out.pi_tilde[bank] = best;
        for (int l = 0; l < m; ++l) {
            out.gamma_tilde[static_cast<std::size_t>(bank) * m + l] =
                sched.holding_at(r, l) * best;
        }
    }
    return out;
}

double bounded_price(const BoundSchedule& sched, double t, int asset) {
    const BoundedState bounded = bounded_liquidations(sched, t);
    double total = 0.0;
    for (int i = 0; i < sched.n_banks; ++i) {
        total += bounded.gamma_tilde[static_cast<std::size_t>(i) * sched.n_assets + asset];
    }
    const DemandCurve& curve = sched.assets[asset].demand;
    return curve.time_part.value(t) * curve.impact_part.value(total);
}

std::vector<double> decomposition_weights(const BankBook& book,
                                          const std::vector<AssetSpec>& assets,
                                          const Regulation& reg) {
    const double theta = reg.theta_min;
    const double shortfall = book.liabilities - book.liquid -
                             (1.0 - book.nontradable_weight * theta) * book.nontradable;
    if (shortfall <= 0.0) {
        throw NeverActivates("bank can never be forced to liquidate; weights undefined");
    }
    double denom = 0.0;
    for (std::size_t k = 0; k < assets.size(); ++k) {
        denom += (1.0 - assets[k].alpha * theta) * book.holdings[k];
    }
    if (denom <= 0.0) {
        throw NoTradableAssets("decomposition weights undefined without tradable holdings");
    }
    std::vector<double> c(assets.size());
    for (std::size_t k = 0; k < assets.size(); ++k) {
        c[k] = (1.0 - assets[k].alpha * theta) * book.holdings[k] / denom;
    }
    return c;
}

}  // namespace firesale
