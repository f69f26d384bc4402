#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "firesale/regulation.hpp"

namespace firesale {

// Exogenous price decay f_t: nonincreasing, C1, f_t(0) = 1.
//
// Three families:
//   constant     f_t(t) = 1
//   exponential  f_t(t) = exp(-rate * min(t, horizon)); frozen past the
//                horizon so terminal-time evaluations stay well defined
//   tabulated    monotone cubic through user samples (C1, shape preserving),
//                frozen at the last node
class TimeDecay {
  public:
    enum class Kind { Constant, Exponential, Tabulated };

    TimeDecay() = default;
    static TimeDecay constant();
    static TimeDecay exponential(double rate, double horizon);
    static TimeDecay tabulated(std::vector<double> times, std::vector<double> values);

    double value(double t) const;
    double derivative(double t) const;

    // Earliest t >= 0 with value(t) <= level; +inf when the level is never
    // reached before the curve freezes.
    double inverse(double level) const;

    Kind kind() const { return kind_; }
    double rate() const { return rate_; }
    double horizon() const { return horizon_; }
    const std::vector<double>& node_times() const { return times_; }
    const std::vector<double>& node_values() const { return values_; }

    bool operator==(const TimeDecay&) const = default;

  private:
    Kind kind_ = Kind::Constant;
    double rate_ = 0.0;
    double horizon_ = 0.0;
    std::vector<double> times_, values_, slopes_;
};

// Endogenous price impact f_Gamma: nonincreasing, f_Gamma(0) = 1.
//
//   none         f(G) = 1
//   linear       f(G) = 1 - b*G, valid for G < 1/b
//   exponential  f(G) = exp(-b*G)
class ImpactCurve {
  public:
    enum class Kind { None, Linear, Exponential };

    ImpactCurve() = default;
    static ImpactCurve none();
    static ImpactCurve linear(double b);
    static ImpactCurve exponential(double b);

    double value(double gamma) const;       // throws DomainExceeded for linear at gamma >= 1/b
    double derivative(double gamma) const;

    Kind kind() const { return kind_; }
    double b() const { return b_; }
    bool is_exponential_family() const {
        return kind_ == Kind::Exponential || kind_ == Kind::None || b_ == 0.0;
    }

    bool operator==(const ImpactCurve&) const = default;

  private:
    Kind kind_ = Kind::None;
    double b_ = 0.0;
};

// Inverse demand F(t, Gamma) = f_t(t) * f_Gamma(Gamma).
struct DemandCurve {
    TimeDecay time_part;
    ImpactCurve impact_part;

    double price(double t, double gamma) const {
        return time_part.value(t) * impact_part.value(gamma);
    }

    bool operator==(const DemandCurve&) const = default;
};

// Open interval of risk-weights for which liquidation dynamics are monotone
// and unique: ( -M f'(0) / ((1 - M f'(0)) theta_min), 1 / theta_min ).
struct AlphaInterval {
    double lo = 0.0;
    double hi = 0.0;
    bool contains(double alpha) const { return alpha > lo && alpha < hi; }
};

AlphaInterval admissible_alpha_interval(const ImpactCurve& curve, double market_cap,
                                        const Regulation& reg);

// The largest impact slope b compatible with risk-weight alpha, i.e. the
// b-form of the same admissibility condition.
double max_admissible_impact(double alpha, double market_cap, const Regulation& reg);

struct MonotonicityCheck {
    bool ok = true;
    std::optional<double> first_violation;  // Gamma where the condition first fails
};

// Checks that Gamma -> (M - Gamma) f'(Gamma) / f(Gamma) is nondecreasing on
// [0, M). Analytic for the three built-in families; the grid overload serves
// custom curves.
MonotonicityCheck check_monotonicity_condition(const ImpactCurve& curve, double market_cap);
MonotonicityCheck check_monotonicity_condition(const std::function<double(double)>& f,
                                               const std::function<double(double)>& f_prime,
                                               double market_cap, int grid_points = 10000,
                                               double tol = 1e-10);

// Converts an exogenous liquidation schedule eta into the equivalent time
// decay f_t(t) = exp(-b * eta(t)). Only meaningful for exponential impact;
// other curves would make eta depend on the banks' own liquidations.
TimeDecay exogenous_to_ft(const std::vector<double>& times, const std::vector<double>& eta,
                          const ImpactCurve& impact);

}  // namespace firesale
