#include <cmath>
#include <doctest.h>

#include "firesale/errors.hpp"
#include "firesale/lambert.hpp"

using namespace firesale;

namespace {

// Independent oracle: plain Newton on w e^w = z from a bracket-safe start.
double newton_w(double z) {
    double w = z > 1.0 ? std::log(z) : 0.5;
    for (int i = 0; i < 200; ++i) {
        const double f = w * std::exp(w) - z;
        w -= f / (std::exp(w) * (1.0 + w));
    }
    return w;
}

}  // namespace

TEST_CASE("lambert_w fixed points") {
    CHECK(lambert_w(0.0) == 0.0);
    CHECK(lambert_w(-std::exp(-1.0)) == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(lambert_w(1.0) == doctest::Approx(newton_w(1.0)).epsilon(1e-15));
    CHECK(lambert_w(1.0) == doctest::Approx(0.5671432904097838).epsilon(1e-14));
    CHECK(lambert_w(M_E) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("lambert_w residual over the domain") {
    // Log-spaced sweep of [-1/e + 1e-12, 1e8]; the acceptance suite runs the
    // full 1e4-point version.
    const double lo = -std::exp(-1.0) + 1e-12;
    for (int i = 0; i <= 1000; ++i) {
        const double u = static_cast<double>(i) / 1000.0;
        // Map [0,1] onto the domain with log spacing above zero.
        double z;
        if (u < 0.25) {
            z = lo + (0.0 - lo) * (u / 0.25);
        } else {
            z = std::exp(std::log(1e-6) + (std::log(1e8) - std::log(1e-6)) * (u - 0.25) / 0.75);
        }
        const double w = lambert_w(z);
        const double resid = std::fabs(w * std::exp(w) - z);
        CHECK(resid <= 1e-13 * std::max(1.0, std::fabs(z)));
    }
}

TEST_CASE("lambert_w domain error below the branch point") {
    CHECK_THROWS_AS(lambert_w(-0.5), DomainError);
    CHECK_THROWS_AS(lambert_w(-std::exp(-1.0) - 1e-9), DomainError);
}

TEST_CASE("lambert_w_from_log matches direct evaluation and scales far out") {
    for (double lz : {-5.0, 0.0, 3.0, 100.0, 650.0}) {
        CHECK(lambert_w_from_log(lz) ==
              doctest::Approx(lambert_w(std::exp(lz))).epsilon(1e-13));
    }
    // Far beyond double range: w + log(w) must reproduce log z.
    const double w = lambert_w_from_log(1e4);
    CHECK(w + std::log(w) == doctest::Approx(1e4).epsilon(1e-13));
}
