#pragma once

#include <cstdint>
#include <vector>

#include "firesale/bounds.hpp"
#include "firesale/scenario.hpp"
#include "firesale/simulator.hpp"

namespace firesale {

// Marginal law of one asset's exogenous stress. Either the decay rate is
// exponentially distributed, or the decay value f_t(t) at the evaluation
// time is given directly through a tabulated quantile function (probs
// increasing on [0,1], values the corresponding f_t levels).
struct StressDistribution {
    enum class Kind { ExponentialRate, TabulatedQuantile };
    Kind kind = Kind::ExponentialRate;
    double rate = 1.0;
    std::vector<double> probs, values;

    static StressDistribution exponential_rate(double mu);
    static StressDistribution tabulated_quantile(std::vector<double> probs,
                                                 std::vector<double> values);

    double cdf_rate(double x) const;                      // P(a <= x)
    double prob_value_at_least(double y, double t) const; // P(f_t(t) >= y)
    // Decay rate for one uniform draw; tabulated values are mapped to the
    // rate that reproduces the drawn level at time t.
    double sample_rate(double u, double t) const;
};

// Phi^{-1} of the analytic price-distribution bound for segment `rank`
// (0 means "no bank activated"; the schedule supplies Lambda~ and nu for
// rank >= 1).
double phi_inverse(const BoundSchedule& schedule, int rank, int asset, double x);

// Lower bound on P(q_l(t) >= q*_l for every asset l) under independent
// exponentially distributed decay rates. Exact closed form; requires
// exponential decay and exponential (or absent) impact.
double price_cdf_lower_bound(const BoundSchedule& schedule, const Scenario& scn, double t,
                             const std::vector<double>& q_star,
                             const std::vector<StressDistribution>& stress);

// Same bound expressed on the decay values f_t(t) directly, valid for any
// marginal law of f_t(t) (the thresholds come from the same Lambert-W
// expression). With exponential-rate marginals this reproduces
// price_cdf_lower_bound exactly.
double random_ft_bound(const BoundSchedule& schedule, const Scenario& scn, double t,
                       const std::vector<double>& q_star,
                       const std::vector<StressDistribution>& stress);

struct MonteCarloResult {
    double t = 0.0;
    int n_samples = 0;
    std::uint64_t seed = 0;
    double dkw_radius = 0.0;                      // level-0.99 DKW half width
    std::vector<std::vector<double>> q_sorted;    // per asset, sorted prices at t
    std::vector<std::vector<double>> ft_sorted;   // per asset, sorted decay values (no impact)

    double prob_price_at_most(int asset, double x) const;
    double prob_price_at_least(int asset, double x) const;
    double prob_ft_at_most(int asset, double x) const;
};

// Empirical distribution of q(t): draws stress parameters (counter-based
// generator, so results are identical for any thread count), reruns the
// simulation per draw, and returns sorted terminal prices with the DKW
// confidence radius. Simulation failures are rethrown with the offending
// draw's parameters attached.
MonteCarloResult monte_carlo(const Scenario& scn, const std::vector<StressDistribution>& stress,
                             double t, int n_samples, std::uint64_t seed,
                             const IntegratorConfig& config = {}, int n_threads = 0);

// DKW band half-width at confidence 1 - delta.
double dkw_radius(int n_samples, double delta = 0.01);

// Deterministic uniform draw for (seed, draw, dimension); splittable, so
// Monte Carlo results do not depend on the parallel schedule.
double counter_uniform(std::uint64_t seed, std::uint64_t draw, std::uint64_t dim);

}  // namespace firesale
