#include "firesale/demand.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "firesale/errors.hpp"

namespace firesale {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Fritsch-Carlson slopes: the resulting Hermite spline is C1, hits every
// node, and preserves monotonicity of the data.
std::vector<double> pchip_slopes(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    std::vector<double> h(n - 1), d(n - 1), m(n);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        h[i] = x[i + 1] - x[i];
        d[i] = (y[i + 1] - y[i]) / h[i];
    }
    if (n == 2) {
        m[0] = m[1] = d[0];
        return m;
    }
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (d[i - 1] * d[i] <= 0.0) {
            m[i] = 0.0;
        } else {
            const double w1 = 2.0 * h[i] + h[i - 1];
            const double w2 = h[i] + 2.0 * h[i - 1];
            m[i] = (w1 + w2) / (w1 / d[i - 1] + w2 / d[i]);
        }
    }
    auto endpoint = [](double h0, double h1, double d0, double d1) {
        double s = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
        if (s * d0 <= 0.0) return 0.0;
        if (d0 * d1 < 0.0 && std::fabs(s) > 3.0 * std::fabs(d0)) return 3.0 * d0;
        return s;
    };
    m[0] = endpoint(h[0], h[1], d[0], d[1]);
    m[n - 1] = endpoint(h[n - 2], h[n - 3], d[n - 2], d[n - 3]);
    return m;
}

struct HermiteEval {
    double value;
    double slope;
};

HermiteEval hermite(double x0, double x1, double y0, double y1, double m0, double m1, double x) {
    const double h = x1 - x0;
    const double s = (x - x0) / h;
    const double s2 = s * s, s3 = s2 * s;
    const double h00 = 2 * s3 - 3 * s2 + 1;
    const double h10 = s3 - 2 * s2 + s;
    const double h01 = -2 * s3 + 3 * s2;
    const double h11 = s3 - s2;
    const double v = h00 * y0 + h10 * h * m0 + h01 * y1 + h11 * h * m1;
    const double dp = (6 * s2 - 6 * s) * (y0 - y1) / h + (3 * s2 - 4 * s + 1) * m0 + (3 * s2 - 2 * s) * m1;
    return {v, dp};
}

}  // namespace

TimeDecay TimeDecay::constant() {
    TimeDecay td;
    td.kind_ = Kind::Constant;
    return td;
}

TimeDecay TimeDecay::exponential(double rate, double horizon) {
    if (rate < 0.0) throw ValidationError("time decay: rate must be >= 0");
    if (horizon <= 0.0) throw ValidationError("time decay: horizon must be > 0");
    TimeDecay td;
    td.kind_ = Kind::Exponential;
    td.rate_ = rate;
    td.horizon_ = horizon;
    return td;
}

TimeDecay TimeDecay::tabulated(std::vector<double> times, std::vector<double> values) {
    if (times.size() != values.size() || times.size() < 2) {
        throw ValidationError("time decay: need matching node arrays with >= 2 entries");
    }
    if (times.front() != 0.0) throw ValidationError("time decay: first node must be t = 0");
    if (std::fabs(values.front() - 1.0) > 1e-12) {
        throw ValidationError("time decay: f_t(0) must equal 1");
    }
    for (std::size_t i = 0; i + 1 < times.size(); ++i) {
        if (!(times[i + 1] > times[i])) throw ValidationError("time decay: node times must increase");
        if (values[i + 1] > values[i]) throw ValidationError("time decay: values must be nonincreasing");
    }
    for (double v : values) {
        if (!(v > 0.0)) throw ValidationError("time decay: values must stay positive");
    }
    TimeDecay td;
    td.kind_ = Kind::Tabulated;
    td.horizon_ = times.back();
    td.slopes_ = pchip_slopes(times, values);
    td.times_ = std::move(times);
    td.values_ = std::move(values);
    return td;
}

double TimeDecay::value(double t) const {
    switch (kind_) {
        case Kind::Constant:
            return 1.0;
        case Kind::Exponential:
            return std::exp(-rate_ * std::min(t, horizon_));
        case Kind::Tabulated: {
            if (t <= times_.front()) return values_.front();
            if (t >= times_.back()) return values_.back();
            const auto it = std::upper_bound(times_.begin(), times_.end(), t);
            const std::size_t i = static_cast<std::size_t>(it - times_.begin()) - 1;
            return hermite(times_[i], times_[i + 1], values_[i], values_[i + 1], slopes_[i],
                           slopes_[i + 1], t)
                .value;
        }
    }
    return 1.0;
}

double TimeDecay::derivative(double t) const {
    switch (kind_) {
        case Kind::Constant:
            return 0.0;
        case Kind::Exponential:
            return t > horizon_ ? 0.0 : -rate_ * std::exp(-rate_ * t);
        case Kind::Tabulated: {
            if (t < times_.front()) return 0.0;
            if (t >= times_.back()) return 0.0;
            const auto it = std::upper_bound(times_.begin(), times_.end(), t);
            const std::size_t i = static_cast<std::size_t>(it - times_.begin()) - 1;
            return hermite(times_[i], times_[i + 1], values_[i], values_[i + 1], slopes_[i],
                           slopes_[i + 1], t)
                .slope;
        }
    }
    return 0.0;
}

double TimeDecay::inverse(double level) const {
    if (level >= 1.0) return 0.0;
    switch (kind_) {
        case Kind::Constant:
            return kInf;
        case Kind::Exponential: {
            if (rate_ == 0.0) return kInf;
            const double t = -std::log(level) / rate_;
            return t <= horizon_ ? t : kInf;
        }
        case Kind::Tabulated: {
            if (level < values_.back()) return kInf;
            double lo = 0.0, hi = times_.back();
            for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, hi); ++it) {
                const double mid = 0.5 * (lo + hi);
                (value(mid) <= level ? hi : lo) = mid;
            }
            return hi;
        }
    }
    return kInf;
}

ImpactCurve ImpactCurve::none() {
    return ImpactCurve{};
}

ImpactCurve ImpactCurve::linear(double b) {
    if (b < 0.0) throw ValidationError("impact curve: b must be >= 0");
    ImpactCurve c;
    c.kind_ = Kind::Linear;
    c.b_ = b;
    return c;
}

ImpactCurve ImpactCurve::exponential(double b) {
    if (b < 0.0) throw ValidationError("impact curve: b must be >= 0");
    ImpactCurve c;
    c.kind_ = Kind::Exponential;
    c.b_ = b;
    return c;
}

double ImpactCurve::value(double gamma) const {
    switch (kind_) {
        case Kind::None:
            return 1.0;
        case Kind::Linear: {
            const double v = 1.0 - b_ * gamma;
            if (v <= 0.0) throw DomainExceeded("linear impact curve evaluated at gamma >= 1/b");
            return v;
        }
        case Kind::Exponential:
            return std::exp(-b_ * gamma);
    }
    return 1.0;
}

double ImpactCurve::derivative(double gamma) const {
    switch (kind_) {
        case Kind::None:
            return 0.0;
        case Kind::Linear:
            if (1.0 - b_ * gamma <= 0.0) {
                throw DomainExceeded("linear impact curve evaluated at gamma >= 1/b");
            }
            return -b_;
        case Kind::Exponential:
            return -b_ * std::exp(-b_ * gamma);
    }
    return 0.0;
}

AlphaInterval admissible_alpha_interval(const ImpactCurve& curve, double market_cap,
                                        const Regulation& reg) {
    const double fp0 = curve.derivative(0.0);  // <= 0
    const double lo = -market_cap * fp0 / ((1.0 - market_cap * fp0) * reg.theta_min);
    return {lo, 1.0 / reg.theta_min};
}

double max_admissible_impact(double alpha, double market_cap, const Regulation& reg) {
    const double at = alpha * reg.theta_min;
    return at / ((1.0 - at) * market_cap);
}

MonotonicityCheck check_monotonicity_condition(const ImpactCurve& curve, double market_cap) {
    switch (curve.kind()) {
        case ImpactCurve::Kind::None:
        case ImpactCurve::Kind::Exponential:
            return {};  // holds for any b >= 0
        case ImpactCurve::Kind::Linear:
            if (curve.b() * market_cap < 1.0) return {};
            return {false, 0.0};  // slope b(1 - bM)/(1 - bG)^2 < 0 everywhere
    }
    return {};
}

MonotonicityCheck check_monotonicity_condition(const std::function<double(double)>& f,
                                               const std::function<double(double)>& f_prime,
                                               double market_cap, int grid_points, double tol) {
    const double step = market_cap / grid_points;
    double prev = market_cap * f_prime(0.0) / f(0.0);
    for (int i = 1; i < grid_points; ++i) {
        const double g = i * step;
        const double cur = (market_cap - g) * f_prime(g) / f(g);
        if (cur < prev - tol) return {false, g};
        prev = cur;
    }
    return {};
}

TimeDecay exogenous_to_ft(const std::vector<double>& times, const std::vector<double>& eta,
                          const ImpactCurve& impact) {
    if (impact.kind() != ImpactCurve::Kind::Exponential || impact.b() <= 0.0) {
        throw NotExponentialImpact(
            "exogenous_to_ft requires an exponential impact curve with b > 0");
    }
    if (times.size() != eta.size() || times.empty()) {
        throw ValidationError("exogenous_to_ft: schedule arrays must match and be nonempty");
    }
    if (std::fabs(eta.front()) > 1e-15) throw ValidationError("exogenous_to_ft: eta(0) must be 0");
    for (std::size_t i = 0; i + 1 < eta.size(); ++i) {
        if (eta[i + 1] < eta[i]) throw ValidationError("exogenous_to_ft: eta must be nondecreasing");
    }
    std::vector<double> values(eta.size());
    for (std::size_t i = 0; i < eta.size(); ++i) values[i] = std::exp(-impact.b() * eta[i]);
    return TimeDecay::tabulated(times, std::move(values));
}

}  // namespace firesale
