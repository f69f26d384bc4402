#pragma once

#include <vector>

#include "firesale/core.hpp"
#include "firesale/scenario.hpp"

namespace firesale {

// Worst-case liquidation schedule: banks ranked by decreasing threshold
// price, and per (rank, asset) the approximate hitting time, the decay level
// f_t(tau) at which it occurs, the frozen regime multiplier, and the
// derived quantities entering the closed forms. Levels are built for every
// rank even when the hitting time lies beyond the horizon (tau = +inf),
// which is what the probabilistic bounds consume.
struct BoundSchedule {
    std::vector<int> order;    // ranked bank indices (input numbering)
    std::vector<double> qbar;  // threshold price per rank, nonincreasing

    int n_banks = 0;
    int n_assets = 0;
    double horizon = 0.0;

    std::vector<AssetSpec> assets;   // copies, for evaluation
    std::vector<double> holdings;    // ranked banks x assets, row-major
    std::vector<double> weights;     // ranked banks x assets, c_ik decomposition

    // All row-major [rank * n_assets + asset].
    std::vector<double> tau;       // +inf when unreachable before the horizon
    std::vector<double> f_level;   // f_t at activation (a-independent for exp decay)
    std::vector<double> lambda;    // Lambda~
    std::vector<double> nu;        // (1 - Lambda~) / f_level^exponent (exp impact; else NaN)
    std::vector<double> exponent;  // (1 - alpha theta) / (alpha theta Lambda~)

    int n_ranked() const { return static_cast<int>(order.size()); }
    double tau_at(int rank, int asset) const { return tau[rank * n_assets + asset]; }
    double level_at(int rank, int asset) const { return f_level[rank * n_assets + asset]; }
    double lambda_at(int rank, int asset) const { return lambda[rank * n_assets + asset]; }
    double nu_at(int rank, int asset) const { return nu[rank * n_assets + asset]; }
    double exponent_at(int rank, int asset) const { return exponent[rank * n_assets + asset]; }
    double holding_at(int rank, int asset) const { return holdings[rank * n_assets + asset]; }

    // Fraction of the ranked bank's holdings of `asset` still unsold at time
    // t under the bound, using the first `stages` ranks of the schedule.
    double remaining_fraction(int rank, int asset, double t, int stages) const;
};

// Builds the schedule for an admissible scenario. Assets with exponential
// (or absent) price impact use the Lambert-W closed forms; linear impact
// falls back to the generic root-finding recursion.
BoundSchedule build_bound_schedule(const Scenario& scn);

// Generic construction by monotone bisection only; agrees with the closed
// forms to tight tolerance and exists to cross-check them.
BoundSchedule build_bound_schedule_generic(const Scenario& scn);

// Closed-form hitting time for `rank' (0-based) on `asset', using the
// already-built entries of lower ranks. Ranks whose level lies below the
// curve's reachable range return +inf.
double exp_hitting_time(const BoundSchedule& schedule, const Scenario& scn, int rank, int asset);

struct BoundedState {
    std::vector<double> pi_tilde;     // n, input order; >= simulated Pi_i(t)
    std::vector<double> gamma_tilde;  // n x m, s_ik * pi_tilde_i
};

// Worst-case liquidations at time t (product form; valid for any inverse
// demand family).
BoundedState bounded_liquidations(const BoundSchedule& schedule, double t);

// Worst-case price of one asset at time t; lies below the simulated price.
double bounded_price(const BoundSchedule& schedule, double t, int asset);

// Decomposition weights c_ik splitting a bank's book into independent
// single-asset subproblems; weights sum to 1 across held assets. Throws
// NeverActivates when the bank can never be forced to sell.
std::vector<double> decomposition_weights(const BankBook& book,
                                          const std::vector<AssetSpec>& assets,
                                          const Regulation& reg);

}  // namespace firesale
