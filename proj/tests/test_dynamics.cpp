#include <cmath>
#include <random>
#include <doctest.h>

#include "firesale/case_studies.hpp"
#include "firesale/dynamics.hpp"
#include "firesale/errors.hpp"

using namespace firesale;

namespace {

// Dense 2x2 oracle for the rank-1 solver.
std::vector<double> dense2_solve(const std::vector<double>& z, double scale,
                                 const std::vector<double>& b) {
    const double a11 = 1.0 + scale * z[0], a12 = scale * z[0];
    const double a21 = scale * z[1], a22 = 1.0 + scale * z[1];
    const double det = a11 * a22 - a12 * a21;
    return {(b[0] * a22 - a12 * b[1]) / det, (a11 * b[1] - b[0] * a21) / det};
}

Scenario random_single_asset_scenario(std::mt19937& gen) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    Scenario scn;
    scn.horizon = 1.0;
    scn.regulation.theta_min = 0.05 + 0.15 * unif(gen);
    const int n = 2 + static_cast<int>(unif(gen) * 5);
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
        BankBook b;
        b.holdings = {0.5 + 2.5 * unif(gen)};
        total += b.holdings[0];
        scn.banks.push_back(b);
    }
    AssetSpec asset;
    const double at = 0.3 + 0.6 * unif(gen);
    asset.alpha = at / scn.regulation.theta_min;
    asset.market_cap = total * (1.0 + 0.5 * unif(gen));
    const double b_max = max_admissible_impact(asset.alpha, asset.market_cap, scn.regulation);
    asset.demand.impact_part = ImpactCurve::exponential(0.9 * b_max * unif(gen));
    asset.demand.time_part = TimeDecay::exponential(0.02 + 0.2 * unif(gen), scn.horizon);
    scn.assets.push_back(asset);
    for (int i = 0; i < n; ++i) {
        const double qbar = 0.8 + 0.2 * unif(gen);
        scn.banks[i].liquid = 0.2 * unif(gen);
        scn.banks[i].liabilities =
            scn.banks[i].liquid + qbar * (1.0 - at) * scn.banks[i].holdings[0];
    }
    return scn;
}

}  // namespace

TEST_CASE("compute_Z") {
    const Scenario scn = make_20bank_scenario(0.0);
    const int n = scn.n_banks();
    std::vector<double> pi(n, 0.0);

    SUBCASE("inactive banks have zero rows") {
        const std::vector<std::uint8_t> active(n, 0);
        for (double z : compute_Z(0.0, pi, active, scn)) CHECK(z == 0.0);
    }
    SUBCASE("single active bank at par") {
        std::vector<std::uint8_t> active(n, 0);
        active[0] = 1;
        const std::vector<double> z = compute_Z(0.0, pi, active, scn);
        CHECK(z[0] == doctest::Approx(2.0).epsilon(1e-14));  // 0.5*2 / (0.5*1)
        CHECK(z[1] == 0.0);
    }
    SUBCASE("two active banks at a lower price") {
        // Pick the time at which f_t = 0.99 so q = 0.99 with Gamma = 0.
        std::vector<std::uint8_t> active(n, 0);
        active[0] = active[1] = 1;
        const double t = scn.assets[0].demand.time_part.inverse(0.99);
        const std::vector<double> z = compute_Z(t, pi, active, scn);
        CHECK(z[0] == doctest::Approx(1.0 / (0.5 * 0.99)).epsilon(1e-12));
        CHECK(z[1] == doctest::Approx(2.0202).epsilon(1e-4));
    }
}

TEST_CASE("compute_lambda") {
    const int n = 20;
    SUBCASE("no impact: Lambda = 1") {
        const Scenario scn = make_20bank_scenario(0.0);
        std::vector<double> pi(n, 0.0);
        std::vector<std::uint8_t> active(n, 1);
        const std::vector<double> lambda = compute_lambda(0.3, pi, active, scn);
        CHECK(lambda[0] == doctest::Approx(1.0).epsilon(1e-15));
    }
    SUBCASE("mid impact, one active bank with full holdings") {
        const Scenario scn = make_20bank_scenario(0.7 / 40.0);
        std::vector<double> pi(n, 0.0);
        std::vector<std::uint8_t> active(n, 0);
        active[0] = 1;
        // 1 + ((1-0.5)/0.5) * 2 * (-0.0175) = 0.965
        const std::vector<double> lambda = compute_lambda(0.0, pi, active, scn);
        CHECK(lambda[0] == doctest::Approx(0.965).epsilon(1e-14));
    }
    SUBCASE("near-singular regime aborts") {
        Scenario scn = make_20bank_scenario(1.0 / (40.0 + 1e-8));
        std::vector<double> pi(n, 0.0);
        std::vector<std::uint8_t> active(n, 1);
        // All banks active with nothing sold: Lambda = 1 - 40/(40+1e-8) ~ 2.5e-10.
        CHECK_THROWS_AS(compute_lambda(0.0, pi, active, scn, 1e-9), NearSingularRegime);
        CHECK_NOTHROW(compute_lambda(0.0, pi, active, scn, 1e-12));
    }
    SUBCASE("Lambda depends on Gamma and the active set, not on time") {
        const Scenario scn = make_20bank_scenario(0.7 / 40.0);
        std::vector<double> pi(n, 0.0);
        for (int i = 0; i < 5; ++i) pi[i] = 0.07 * (i + 1);
        std::vector<std::uint8_t> active(n, 0);
        for (int i = 0; i < 5; ++i) active[i] = 1;
        const std::vector<double> a = compute_lambda(0.1, pi, active, scn);
        const std::vector<double> b = compute_lambda(0.9, pi, active, scn);
        CHECK(a[0] == b[0]);
    }
}

TEST_CASE("sherman_morrison_solve") {
    SUBCASE("scale zero returns the right-hand side") {
        const std::vector<double> x = sherman_morrison_solve({3.0, 4.0}, 0.0, {1.5, -2.0});
        CHECK(x[0] == 1.5);
        CHECK(x[1] == -2.0);
    }
    SUBCASE("matches the dense 2x2 oracle") {
        const std::vector<double> z{2.0, 2.0}, b{1.0, 1.0};
        const double scale = -0.01;
        const std::vector<double> x = sherman_morrison_solve(z, scale, b);
        const std::vector<double> expect = dense2_solve(z, scale, b);
        CHECK(x[0] == doctest::Approx(expect[0]).epsilon(1e-14));
        CHECK(x[0] == doctest::Approx(1.0416667).epsilon(1e-6));
        CHECK(x[1] == doctest::Approx(expect[1]).epsilon(1e-14));

        std::mt19937 gen(7);
        std::uniform_real_distribution<double> unif(-1.0, 1.0);
        for (int trial = 0; trial < 50; ++trial) {
            const std::vector<double> zr{std::fabs(unif(gen)) * 3, std::fabs(unif(gen)) * 3};
            const std::vector<double> br{unif(gen), unif(gen)};
            const double s = unif(gen) * 0.1;
            const auto got = sherman_morrison_solve(zr, s, br);
            const auto want = dense2_solve(zr, s, br);
            CHECK(got[0] == doctest::Approx(want[0]).epsilon(1e-12));
            CHECK(got[1] == doctest::Approx(want[1]).epsilon(1e-12));
        }
    }
    SUBCASE("n = 1 reduces to scalar division") {
        const std::vector<double> x = sherman_morrison_solve({4.0}, -0.1, {2.0});
        CHECK(x[0] == doctest::Approx(2.0 / 0.6).epsilon(1e-14));
    }
    SUBCASE("singular update throws") {
        CHECK_THROWS_AS(sherman_morrison_solve({1.0}, -1.0, {1.0}), SingularUpdate);
    }
}

TEST_CASE("rhs basics") {
    const int n = 20;
    SUBCASE("no active banks: prices follow the decay alone") {
        const Scenario scn = make_20bank_scenario(0.7 / 40.0);
        std::vector<double> pi(n, 0.0);
        std::vector<std::uint8_t> active(n, 0);
        const Derivatives d = rhs(0.4, pi, active, scn);
        const auto& curve = scn.assets[0].demand;
        CHECK(d.q_dot[0] ==
              doctest::Approx(curve.time_part.derivative(0.4) * 1.0).epsilon(1e-14));
        for (double v : d.pi_dot) CHECK(v == 0.0);
    }
    SUBCASE("single active bank, no impact: closed-form gamma_dot") {
        const Scenario scn = make_20bank_scenario(0.0);
        std::vector<double> pi(n, 0.0);
        pi[0] = 0.3;
        std::vector<std::uint8_t> active(n, 0);
        active[0] = 1;
        const double t = 0.25;
        const Derivatives d = rhs(t, pi, active, scn);
        const auto& td = scn.assets[0].demand.time_part;
        const double gamma_dot_expected =
            -(0.5 / 0.5) * (2.0 - 2.0 * 0.3) * td.derivative(t) / td.value(t);
        CHECK(d.pi_dot[0] * 2.0 == doctest::Approx(gamma_dot_expected).epsilon(1e-12));
        CHECK(d.psi_dot[0] ==
              doctest::Approx(gamma_dot_expected * td.value(t)).epsilon(1e-12));
    }
    SUBCASE("price slope right after the first activation (mid impact)") {
        const Scenario scn = make_20bank_scenario(0.7 / 40.0);
        std::vector<double> pi(n, 0.0);
        std::vector<std::uint8_t> active(n, 0);
        active[0] = 1;
        const Derivatives d = rhs(0.0, pi, active, scn);
        const auto& td = scn.assets[0].demand.time_part;
        CHECK(d.q_dot[0] == doctest::Approx(td.derivative(0.0) / 0.965).epsilon(1e-12));
    }
}

namespace {

// Plain Gaussian elimination with partial pivoting; the independent dense
// route for the single-asset system.
std::vector<double> gaussian_solve(std::vector<std::vector<double>> a, std::vector<double> b) {
    const int n = static_cast<int>(b.size());
    for (int col = 0; col < n; ++col) {
        int pivot = col;
        for (int r = col + 1; r < n; ++r) {
            if (std::fabs(a[r][col]) > std::fabs(a[pivot][col])) pivot = r;
        }
        std::swap(a[col], a[pivot]);
        std::swap(b[col], b[pivot]);
        for (int r = col + 1; r < n; ++r) {
            const double f = a[r][col] / a[col][col];
            for (int c = col; c < n; ++c) a[r][c] -= f * a[col][c];
            b[r] -= f * b[col];
        }
    }
    std::vector<double> x(n);
    for (int r = n - 1; r >= 0; --r) {
        double acc = b[r];
        for (int c = r + 1; c < n; ++c) acc -= a[r][c] * x[c];
        x[r] = acc / a[r][r];
    }
    return x;
}

}  // namespace

TEST_CASE("single-asset shortcut agrees with an independent dense solve") {
    std::mt19937 gen(123);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int trial = 0; trial < 30; ++trial) {
        const Scenario scn = random_single_asset_scenario(gen);
        const int n = scn.n_banks();
        std::vector<double> pi(n);
        std::vector<std::uint8_t> active(n);
        for (int i = 0; i < n; ++i) {
            pi[i] = 0.4 * unif(gen);
            active[i] = unif(gen) < 0.6 ? 1 : 0;
        }
        const double t = unif(gen) * scn.horizon;
        const Derivatives fast = rhs(t, pi, active, scn);

        // Assemble the full n x n system (I + Z 1^T f_t f'_G) gamma_dot
        // = -Z f'_t f_G from the exposed Z and solve it densely.
        const DemandEval ev = eval_demand(t, pi, scn);
        const std::vector<double> z = compute_Z(t, pi, active, scn);
        std::vector<std::vector<double>> A(n, std::vector<double>(n, 0.0));
        std::vector<double> b(n);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                A[i][j] = (i == j ? 1.0 : 0.0) + z[i] * ev.ft[0] * ev.fg_prime[0];
            }
            b[i] = -z[i] * ev.ft_prime[0] * ev.fg[0];
        }
        const std::vector<double> gamma_dot = gaussian_solve(A, b);
        double total_gamma_dot = 0.0;
        for (int i = 0; i < n; ++i) {
            const double s_i = scn.banks[i].holdings[0];
            const double dense_pi_dot = s_i > 0.0 ? gamma_dot[i] / s_i : 0.0;
            CHECK(fast.pi_dot[i] == doctest::Approx(dense_pi_dot).epsilon(1e-10));
            total_gamma_dot += gamma_dot[i];
        }
        // Chain rule consistency for the price derivative.
        const double q_dot_expected =
            ev.ft_prime[0] * ev.fg[0] + ev.ft[0] * ev.fg_prime[0] * total_gamma_dot;
        CHECK(fast.q_dot[0] == doctest::Approx(q_dot_expected).epsilon(1e-10));
    }
}

TEST_CASE("sign guarantees") {
    std::mt19937 gen(99);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int trial = 0; trial < 40; ++trial) {
        const Scenario scn = random_single_asset_scenario(gen);
        const int n = scn.n_banks();
        std::vector<double> pi(n);
        std::vector<std::uint8_t> active(n);
        for (int i = 0; i < n; ++i) {
            pi[i] = 0.35 * unif(gen);
            active[i] = unif(gen) < 0.5 ? 1 : 0;
        }
        const Derivatives d = rhs(unif(gen), pi, active, scn);
        for (double v : d.pi_dot) CHECK(v >= -1e-12);
        for (double v : d.q_dot) CHECK(v <= 1e-12);
    }
}

TEST_CASE("Sylvester determinant identity for the regime systems") {
    std::mt19937 gen(2024);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        Scenario scn = make_2asset_scenario(0.1 + 0.8 * unif(gen));
        const int n = scn.n_banks();
        std::vector<double> pi(n);
        std::vector<std::uint8_t> active(n);
        for (int i = 0; i < n; ++i) {
            pi[i] = 0.3 * unif(gen);
            active[i] = unif(gen) < 0.7 ? 1 : 0;
        }
        const RegimeRhs regime = analyze_regime(0.5 * unif(gen), pi, active, scn);
        CHECK(regime.det_bank_system ==
              doctest::Approx(regime.det_asset_system).epsilon(1e-10));
        for (int k = 0; k < scn.n_assets(); ++k) CHECK(regime.lambda[k] > 0.0);
        for (int i = 0; i < n; ++i) {
            for (int k = 0; k < scn.n_assets(); ++k) {
                const double z = regime.z[i * scn.n_assets() + k];
                CHECK(z >= 0.0);
                if (!active[i]) CHECK(z == 0.0);
            }
        }
    }
}
