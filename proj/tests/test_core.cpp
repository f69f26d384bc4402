#include <cmath>
#include <doctest.h>

#include "firesale/case_studies.hpp"
#include "firesale/core.hpp"
#include "firesale/errors.hpp"

using namespace firesale;

namespace {

AssetSpec plain_asset(double alpha) {
    AssetSpec a;
    a.alpha = alpha;
    a.market_cap = 1e9;
    a.demand.time_part = TimeDecay::constant();
    a.demand.impact_part = ImpactCurve::none();
    return a;
}

}  // namespace

TEST_CASE("capital ratio") {
    const Regulation reg{0.1};

    SUBCASE("20-bank study, firm 1 starts exactly at the threshold") {
        BankBook book;
        book.holdings = {2.0};
        book.liabilities = 1.0;
        const std::vector<AssetSpec> assets{plain_asset(5.0)};
        CHECK(capital_ratio(book, 0.0, {1.0}, 0.0, assets, reg) ==
              doctest::Approx(0.10).epsilon(1e-15));
    }
    SUBCASE("no liabilities") {
        BankBook book;
        book.liquid = 0.7;
        book.holdings = {1.5, 2.5};
        book.nontradable = 0.25;
        book.nontradable_weight = 0.4;
        const std::vector<AssetSpec> assets{plain_asset(2.0), plain_asset(3.0)};
        const double expected = (0.7 + 1.5 + 2.5 + 0.25) / (2.0 * 1.5 + 3.0 * 2.5 + 0.4 * 0.25);
        CHECK(capital_ratio(book, 0.0, {1.0, 1.0}, 0.0, assets, reg) ==
              doctest::Approx(expected).epsilon(1e-15));
    }
    SUBCASE("mixed book at a depressed price") {
        BankBook book;
        book.liquid = 0.5;
        book.holdings = {2.0};
        book.nontradable = 1.0;
        book.liabilities = 2.0;
        book.nontradable_weight = 0.5;
        const std::vector<AssetSpec> assets{plain_asset(5.0)};
        // (0.5 + 1.8 + 1 - 2) / (9 + 0.5)
        CHECK(capital_ratio(book, 0.0, {0.9}, 0.0, assets, reg) ==
              doctest::Approx(1.3 / 9.5).epsilon(1e-15));
    }
    SUBCASE("positive part clamps insolvent capital at zero") {
        BankBook book;
        book.holdings = {1.0};
        book.liabilities = 5.0;
        const std::vector<AssetSpec> assets{plain_asset(5.0)};
        CHECK(capital_ratio(book, 0.0, {1.0}, 0.0, assets, reg) == 0.0);
    }
    SUBCASE("zero risk-weighted assets is an error") {
        BankBook book;
        book.liquid = 1.0;
        book.holdings = {0.0};
        const std::vector<AssetSpec> assets{plain_asset(5.0)};
        CHECK_THROWS_AS(capital_ratio(book, 0.0, {1.0}, 0.0, assets, reg),
                        ZeroRiskWeightedAssets);
    }
}

TEST_CASE("threshold price") {
    const Regulation reg{0.1};
    const std::vector<AssetSpec> assets{plain_asset(5.0)};

    SUBCASE("20-bank study ladder") {
        for (int firm = 1; firm <= 20; ++firm) {
            BankBook book;
            book.liquid = 2.0 * (firm - 1) / 475.0;
            book.holdings = {2.0};
            book.liabilities = 1.0;
            CHECK(threshold_price(book, assets, reg) ==
                  doctest::Approx(1.0 - 2.0 * (firm - 1) / 475.0).epsilon(1e-14));
        }
        BankBook firm2;
        firm2.liquid = 2.0 / 475.0;
        firm2.holdings = {2.0};
        firm2.liabilities = 1.0;
        CHECK(threshold_price(firm2, assets, reg) == doctest::Approx(0.99578947).epsilon(1e-8));
    }
    SUBCASE("well-capitalised banks never activate") {
        BankBook book;
        book.liquid = 3.0;
        book.holdings = {2.0};
        book.nontradable = 1.0;
        book.nontradable_weight = 0.5;
        book.liabilities = 2.0;
        CHECK(threshold_price(book, assets, reg) <= 0.0);
    }
    SUBCASE("diversification study, concentrated bank") {
        BankBook book;
        book.holdings = {2.0, 0.0};
        book.liabilities = 0.98;
        const std::vector<AssetSpec> two{plain_asset(5.0), plain_asset(5.0)};
        CHECK(threshold_price(book, two, reg) == doctest::Approx(0.98).epsilon(1e-14));
    }
    SUBCASE("no tradable assets") {
        BankBook book;
        book.liquid = 1.0;
        book.holdings = {0.0};
        CHECK_THROWS_AS(threshold_price(book, assets, reg), NoTradableAssets);
    }
    SUBCASE("invariant under common currency scaling (single asset)") {
        BankBook book;
        book.liquid = 0.3;
        book.holdings = {2.0};
        book.nontradable = 0.4;
        book.nontradable_weight = 0.7;
        book.liabilities = 2.2;
        const double base = threshold_price(book, assets, reg);
        for (double c : {0.5, 3.0, 41.0}) {
            BankBook scaled = book;
            scaled.liquid *= c;
            scaled.holdings[0] *= c;
            scaled.nontradable *= c;
            scaled.liabilities *= c;
            CHECK(threshold_price(scaled, assets, reg) == doctest::Approx(base).epsilon(1e-12));
        }
    }
}

TEST_CASE("activation margin") {
    const Regulation reg{0.1};
    const std::vector<AssetSpec> assets{plain_asset(5.0)};

    SUBCASE("zero exactly at the threshold price") {
        BankBook book;
        book.liquid = 0.13;
        book.holdings = {1.7};
        book.liabilities = 1.4;
        const double qbar = threshold_price(book, assets, reg);
        CHECK(activation_margin(book, assets, reg, {qbar}) == doctest::Approx(0.0).epsilon(1e-15));
    }
    SUBCASE("20-bank study, firm 2 at par") {
        BankBook book;
        book.liquid = 2.0 / 475.0;
        book.holdings = {2.0};
        book.liabilities = 1.0;
        CHECK(activation_margin(book, assets, reg, {1.0}) ==
              doctest::Approx(0.0042105).epsilon(1e-5));
    }
    SUBCASE("diversified bank at par") {
        BankBook book;
        book.holdings = {1.0, 1.0};
        book.liabilities = 0.98;
        const std::vector<AssetSpec> two{plain_asset(5.0), plain_asset(5.0)};
        CHECK(activation_margin(book, two, reg, {1.0, 1.0}) ==
              doctest::Approx(0.02).epsilon(1e-14));
    }
}

TEST_CASE("threshold ladder ordering") {
    const Regulation reg{0.1};
    const std::vector<AssetSpec> assets{plain_asset(5.0)};
    std::vector<BankBook> banks(4);
    banks[0].holdings = {2.0};
    banks[0].liabilities = 0.9;   // q_bar = 0.9
    banks[1].holdings = {2.0};
    banks[1].liabilities = 0.95;  // q_bar = 0.95
    banks[2].holdings = {2.0};
    banks[2].liabilities = 0.9;   // tie with bank 0, input order breaks it
    banks[3].holdings = {2.0};
    banks[3].liquid = 5.0;        // q_bar < 0: excluded

    const ThresholdLadder ladder = make_threshold_ladder(banks, assets, reg);
    REQUIRE(ladder.order.size() == 3);
    CHECK(ladder.order[0] == 1);
    CHECK(ladder.order[1] == 0);
    CHECK(ladder.order[2] == 2);
    CHECK(ladder.qbar[0] == doctest::Approx(0.95));
    CHECK(ladder.qbar[1] == doctest::Approx(0.9));
}

TEST_CASE("case-study books satisfy their design identities") {
    // Leverage preset: q_bar = 1 and theta(0) = theta_min for every lambda.
    for (double lam : {1.5, 4.0, 9.0}) {
        const Scenario scn = make_leverage_scenario(lam);
        CHECK(threshold_price(scn.banks[0], scn.assets, scn.regulation) ==
              doctest::Approx(1.0).epsilon(1e-12));
        CHECK(capital_ratio(scn.banks[0], 0.0, {1.0}, 0.0, scn.assets, scn.regulation) ==
              doctest::Approx(scn.regulation.theta_min).epsilon(1e-12));
    }
    // Diversification preset: both banks share q_bar = 0.98 for any zeta.
    for (double zeta : {0.0, 0.3, 1.0}) {
        const Scenario scn = make_2asset_scenario(zeta);
        for (const auto& bank : scn.banks) {
            CHECK(threshold_price(bank, scn.assets, scn.regulation) ==
                  doctest::Approx(0.98).epsilon(1e-12));
        }
    }
}
