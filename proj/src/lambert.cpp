#include "firesale/lambert.hpp"

#include <cmath>
#include <limits>

#include "firesale/errors.hpp"

namespace firesale {

namespace {

constexpr double kBranch = -0.36787944117144232159;  // -1/e

// One Halley step for f(w) = w e^w - z.
inline double halley_step(double w, double z) {
    const double ew = std::exp(w);
    const double f = w * ew - z;
    const double denom = ew * (w + 1.0) - (w + 2.0) * f / (2.0 * w + 2.0);
    return w - f / denom;
}

}  // namespace

double lambert_w(double z) {
    if (std::isnan(z)) return z;
    if (z < kBranch - 1e-15) {
        throw DomainError("lambert_w: argument below -1/e");
    }
    if (z == 0.0) return 0.0;
    // Within a few ulps of the branch point the root is -1.
    if (z <= kBranch + 4e-17) return -1.0;

    double w;
    if (z < -0.3) {
        // Series about the branch point in p = sqrt(2(e z + 1)).
        const double p = std::sqrt(2.0 * (M_E * z + 1.0));
        w = -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p;
    } else if (z < 1.0) {
        w = z * (1.0 - z);  // crude; Halley does the rest
    } else {
        const double l1 = std::log(z);
        const double l2 = std::log(l1 > 1.0 ? l1 : 1.0);
        w = l1 - l2 + (l1 > 1.0 ? l2 / l1 : 0.0);
    }

    const double tol = 1e-15 * std::max(1.0, std::fabs(z));
    for (int it = 0; it < 50; ++it) {
        const double w_next = halley_step(w, z);
        if (!std::isfinite(w_next)) break;
        const double dw = std::fabs(w_next - w);
        w = w_next;
        const double resid = std::fabs(w * std::exp(w) - z);
        if (resid <= tol || dw <= 4.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::fabs(w))) {
            break;
        }
    }
    return w;
}

double lambert_w_from_log(double log_z) {
    if (log_z <= 700.0) return lambert_w(std::exp(log_z));
    // Asymptotic start, then Newton on w + log(w) = log_z.
    const double l1 = log_z;
    const double l2 = std::log(l1);
    double w = l1 - l2 + l2 / l1 + l2 * (l2 - 2.0) / (2.0 * l1 * l1);
    for (int it = 0; it < 50; ++it) {
        const double f = w + std::log(w) - log_z;
        const double dw = -f / (1.0 + 1.0 / w);
        w += dw;
        if (std::fabs(dw) <= 4.0 * std::numeric_limits<double>::epsilon() * std::fabs(w)) break;
    }
    return w;
}

}  // namespace firesale
