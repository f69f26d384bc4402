#include "firesale/stochastic.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include "firesale/errors.hpp"
#include "firesale/lambert.hpp"

namespace firesale {

namespace {

inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

double sorted_cdf(const std::vector<double>& sorted, double x) {
    const auto it = std::upper_bound(sorted.begin(), sorted.end(), x);
    return static_cast<double>(it - sorted.begin()) / static_cast<double>(sorted.size());
}

}  // namespace

double counter_uniform(std::uint64_t seed, std::uint64_t draw, std::uint64_t dim) {
    const std::uint64_t z = mix64(mix64(mix64(seed) ^ (draw + 1)) ^ (dim + 1));
    return static_cast<double>(z >> 11) * 0x1.0p-53;
}

StressDistribution StressDistribution::exponential_rate(double mu) {
    if (mu <= 0.0) throw ValidationError("stress distribution: rate must be positive");
    StressDistribution d;
    d.kind = Kind::ExponentialRate;
    d.rate = mu;
    return d;
}

StressDistribution StressDistribution::tabulated_quantile(std::vector<double> probs,
                                                          std::vector<double> values) {
    if (probs.size() != values.size() || probs.size() < 2) {
        throw ValidationError("stress distribution: quantile table needs >= 2 matching rows");
    }
    if (probs.front() != 0.0 || probs.back() != 1.0) {
        throw ValidationError("stress distribution: quantile probs must span [0, 1]");
    }
    for (std::size_t i = 0; i + 1 < probs.size(); ++i) {
        if (probs[i + 1] <= probs[i]) {
            throw ValidationError("stress distribution: quantile probs must increase");
        }
        if (values[i + 1] < values[i]) {
            throw ValidationError("stress distribution: quantile values must be nondecreasing");
        }
    }
    for (double v : values) {
        if (!(v > 0.0 && v <= 1.0)) {
            throw ValidationError("stress distribution: decay values must lie in (0, 1]");
        }
    }
    StressDistribution d;
    d.kind = Kind::TabulatedQuantile;
    d.probs = std::move(probs);
    d.values = std::move(values);
    return d;
}

double StressDistribution::cdf_rate(double x) const {
    if (kind != Kind::ExponentialRate) {
        throw UnsupportedJoint("rate CDF only defined for exponential-rate stress");
    }
    return x <= 0.0 ? 0.0 : 1.0 - std::exp(-rate * x);
}

double StressDistribution::prob_value_at_least(double y, double t) const {
    if (kind == Kind::ExponentialRate) {
        if (y <= 0.0) return 1.0;
        return cdf_rate(-std::log(y) / t);
    }
    // P(V >= y) with V the tabulated f_t(t) value.
    if (y <= values.front()) return 1.0;
    if (y > values.back()) return 0.0;
    const auto it = std::lower_bound(values.begin(), values.end(), y);
    const std::size_t i = static_cast<std::size_t>(it - values.begin());
    if (values[i] == values[i - 1]) return 1.0 - probs[i - 1];
    const double p =
        probs[i - 1] + (probs[i] - probs[i - 1]) * (y - values[i - 1]) / (values[i] - values[i - 1]);
    return 1.0 - p;
}

double StressDistribution::sample_rate(double u, double t) const {
    if (kind == Kind::ExponentialRate) {
        return -std::log1p(-u) / rate;
    }
    // Piecewise-linear quantile, then the rate reproducing that level at t.
    const auto it = std::lower_bound(probs.begin(), probs.end(), u);
    std::size_t i = static_cast<std::size_t>(it - probs.begin());
    double v;
    if (i == 0) {
        v = values.front();
    } else {
        if (i >= probs.size()) i = probs.size() - 1;
        v = values[i - 1] +
            (values[i] - values[i - 1]) * (u - probs[i - 1]) / (probs[i] - probs[i - 1]);
    }
    return v >= 1.0 ? 0.0 : -std::log(v) / t;
}

double phi_inverse(const BoundSchedule& sched, int rank, int asset, double x) {
    if (rank <= 0) return -x;
    const double lambda = sched.lambda_at(rank - 1, asset);
    const double nu = sched.nu_at(rank - 1, asset);
    const double expo = sched.exponent_at(rank - 1, asset);
    if (nu == 0.0) return -x;
    const double log_z = std::log(nu / lambda) + expo * x;
    const double w = lambert_w_from_log(log_z);
    return w / expo - x;
}

namespace {

int locate_segment(const BoundSchedule& sched, double q_star) {
    // Number of ranked banks with threshold strictly above q_star.
    int k = 0;
    while (k < sched.n_ranked() && sched.qbar[k] > q_star) ++k;
    return k;
}

void check_stress_arity(const Scenario& scn, const std::vector<StressDistribution>& stress) {
    if (static_cast<int>(stress.size()) != scn.n_assets()) {
        throw ValidationError("need one stress distribution per asset");
    }
}

}  // namespace

double price_cdf_lower_bound(const BoundSchedule& sched, const Scenario& scn, double t,
                             const std::vector<double>& q_star,
                             const std::vector<StressDistribution>& stress) {
    check_stress_arity(scn, stress);
    if (t <= 0.0) return 1.0;  // q(0) = 1 >= any admissible q*
    double prob = 1.0;
    for (int l = 0; l < scn.n_assets(); ++l) {
        if (stress[l].kind != StressDistribution::Kind::ExponentialRate) {
            throw UnsupportedJoint(
                "price_cdf_lower_bound needs independent exponential rates; "
                "use random_ft_bound or monte_carlo instead");
        }
        if (!(q_star[l] > 0.0 && q_star[l] <= 1.0)) {
            throw ValidationError("q* must lie in (0, 1]");
        }
        const int k = locate_segment(sched, q_star[l]);
        const double b = scn.assets[l].demand.impact_part.b();
        double prefix_s = 0.0;
        for (int j = 0; j < k; ++j) prefix_s += sched.holding_at(j, l);
        const double threshold =
            phi_inverse(sched, k, l, std::log(q_star[l]) + b * prefix_s) / t;
        prob *= threshold <= 0.0 ? 0.0 : stress[l].cdf_rate(threshold);
    }
    return prob;
}

double random_ft_bound(const BoundSchedule& sched, const Scenario& scn, double t,
                       const std::vector<double>& q_star,
                       const std::vector<StressDistribution>& stress) {
    check_stress_arity(scn, stress);
    if (t <= 0.0) return 1.0;
    double prob = 1.0;
    for (int l = 0; l < scn.n_assets(); ++l) {
        if (!(q_star[l] > 0.0 && q_star[l] <= 1.0)) {
            throw ValidationError("q* must lie in (0, 1]");
        }
        const int k = locate_segment(sched, q_star[l]);
        const double b = scn.assets[l].demand.impact_part.b();
        double prefix_s = 0.0;
        for (int j = 0; j < k; ++j) prefix_s += sched.holding_at(j, l);
        const double x = std::log(q_star[l]) + b * prefix_s;

        double level;  // f_t(t) must stay at or above this level
        if (k == 0) {
            level = q_star[l];
        } else {
            const double nu = sched.nu_at(k - 1, l);
            const double lambda = sched.lambda_at(k - 1, l);
            const double expo = sched.exponent_at(k - 1, l);
            if (nu == 0.0) {
                level = std::exp(x);
            } else {
                const double w = lambert_w_from_log(std::log(nu / lambda) + expo * x);
                level = std::exp((std::log(lambda) + std::log(w) - std::log(nu)) / expo);
            }
        }
        prob *= stress[l].prob_value_at_least(level, t);
    }
    return prob;
}

double dkw_radius(int n_samples, double delta) {
    return std::sqrt(std::log(2.0 / delta) / (2.0 * n_samples));
}

double MonteCarloResult::prob_price_at_most(int asset, double x) const {
    return sorted_cdf(q_sorted[asset], x);
}
double MonteCarloResult::prob_price_at_least(int asset, double x) const {
    const auto& v = q_sorted[asset];
    const auto it = std::lower_bound(v.begin(), v.end(), x);
    return static_cast<double>(v.end() - it) / static_cast<double>(v.size());
}
double MonteCarloResult::prob_ft_at_most(int asset, double x) const {
    return sorted_cdf(ft_sorted[asset], x);
}

MonteCarloResult monte_carlo(const Scenario& scn, const std::vector<StressDistribution>& stress,
                             double t, int n_samples, std::uint64_t seed,
                             const IntegratorConfig& config, int n_threads) {
    check_stress_arity(scn, stress);
    if (n_samples < 1) throw ValidationError("monte_carlo needs n_samples >= 1");
    if (!(t > 0.0 && t <= scn.horizon)) {
        throw ValidationError("monte_carlo evaluation time must lie in (0, horizon]");
    }
    const int m = scn.n_assets();

    MonteCarloResult result;
    result.t = t;
    result.n_samples = n_samples;
    result.seed = seed;
    result.dkw_radius = dkw_radius(n_samples);
    result.q_sorted.assign(m, std::vector<double>(n_samples));
    result.ft_sorted.assign(m, std::vector<double>(n_samples));

    IntegratorConfig cfg = config;
    cfg.output_grid = 2;  // terminal state only; events are still resolved

    std::atomic<int> next_draw{0};
    std::atomic<bool> failed{false};
    std::string failure_message;
    std::mutex failure_mutex;

    auto worker = [&]() {
        for (;;) {
            const int d = next_draw.fetch_add(1);
            if (d >= n_samples || failed.load()) return;
            std::vector<double> rates(m);
            for (int l = 0; l < m; ++l) {
                rates[l] = stress[l].sample_rate(counter_uniform(seed, d, l), t);
            }
            Scenario drawn = scn;
            drawn.horizon = t;
            for (int l = 0; l < m; ++l) {
                drawn.assets[l].demand.time_part = TimeDecay::exponential(rates[l], scn.horizon);
            }
            try {
                const Trajectory traj = simulate(drawn, cfg);
                for (int l = 0; l < m; ++l) {
                    result.q_sorted[l][d] = traj.terminal().q[l];
                    result.ft_sorted[l][d] =
                        drawn.assets[l].demand.time_part.value(t);
                }
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failed.exchange(true)) {
                    std::ostringstream msg;
                    msg << "monte_carlo draw " << d << " failed (rates:";
                    for (double r : rates) msg << ' ' << r;
                    msg << "): " << e.what();
                    failure_message = msg.str();
                }
                return;
            }
        }
    };

    int threads = n_threads > 0 ? n_threads
                                : static_cast<int>(std::thread::hardware_concurrency());
    if (threads < 1) threads = 1;
    threads = std::min(threads, n_samples);
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(threads);
        for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (failed.load()) throw NumericalError(failure_message);

    for (int l = 0; l < m; ++l) {
        std::sort(result.q_sorted[l].begin(), result.q_sorted[l].end());
        std::sort(result.ft_sorted[l].begin(), result.ft_sorted[l].end());
    }
    return result;
}

}  // namespace firesale
