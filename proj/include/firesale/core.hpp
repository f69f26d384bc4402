#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "firesale/demand.hpp"
#include "firesale/regulation.hpp"

namespace firesale {

// One bank's balance sheet at time 0. All entries are nonnegative; holdings
// are in units of each tradable asset (initial prices are 1, so units and
// mark-to-market value coincide at t = 0).
struct BankBook {
    double liquid = 0.0;              // x
    std::vector<double> holdings;     // s, one entry per tradable asset
    double nontradable = 0.0;         // ell
    double liabilities = 0.0;         // p_bar
    double nontradable_weight = 0.0;  // alpha_ell

    bool operator==(const BankBook&) const = default;
};

// One tradable asset: risk-weight, pre-crisis market cap, inverse demand.
struct AssetSpec {
    double alpha = 1.0;
    double market_cap = 0.0;
    DemandCurve demand;

    bool operator==(const AssetSpec&) const = default;
};

// Snapshot of the coupled system. gamma is stored row-major (n x m) and is
// always s_ik * pi_i: liquidation is proportional to holdings.
struct SystemState {
    double t = 0.0;
    std::vector<double> pi;            // n, fraction of book liquidated
    std::vector<double> gamma;         // n*m, units liquidated
    std::vector<double> q;             // m, prices
    std::vector<double> psi;           // n, cumulative liquidation proceeds
    std::vector<std::uint8_t> active;  // n, 1 once a bank sits on the boundary
};

struct Trajectory {
    std::vector<SystemState> samples;                 // grid times merged with events
    std::vector<std::optional<double>> hitting_times; // tau_i, absent if never activated
    const SystemState& terminal() const { return samples.back(); }
};

// Risk-weighted capital ratio theta_i of one bank given its liquidation
// fraction, current prices, and accumulated proceeds. Throws
// ZeroRiskWeightedAssets when the bank holds nothing risky.
double capital_ratio(const BankBook& book, double pi, const std::vector<double>& q, double psi,
                     const std::vector<AssetSpec>& assets, const Regulation& reg);

// Uniform price level at which the bank's initial portfolio sits exactly at
// theta_min. Values <= 0 mean the bank can never be forced to liquidate.
// Throws NoTradableAssets when the bank has no tradable holdings.
double threshold_price(const BankBook& book, const std::vector<AssetSpec>& assets,
                       const Regulation& reg);

// Distance from the regulatory boundary for a not-yet-active bank:
//   g_i(q) = sum_k (1 - alpha_k theta_min) s_ik q_k
//            - (p_bar - x - (1 - alpha_ell theta_min) ell).
// The bank activates when g_i <= 0; g_i is nonincreasing along admissible
// paths because prices never rise.
double activation_margin(const BankBook& book, const std::vector<AssetSpec>& assets,
                         const Regulation& reg, const std::vector<double>& q);

// Bank indices ordered by decreasing threshold price (ties keep input
// order); banks that can never activate (no tradables or q_bar <= 0) are
// excluded. Computed once and reused by the bound recursion.
struct ThresholdLadder {
    std::vector<int> order;    // ranked bank indices
    std::vector<double> qbar;  // threshold per rank, nonincreasing
};
ThresholdLadder make_threshold_ladder(const std::vector<BankBook>& banks,
                                      const std::vector<AssetSpec>& assets,
                                      const Regulation& reg);

}  // namespace firesale
