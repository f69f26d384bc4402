#include <doctest.h>

#include "firesale/case_studies.hpp"
#include "firesale/errors.hpp"
#include "firesale/scenario.hpp"

using namespace firesale;

TEST_CASE("case-study presets validate") {
    CHECK(validate(make_20bank_scenario(0.0)).passed());
    CHECK(validate(make_20bank_scenario(0.7 / 40.0)).passed());
    CHECK(validate(make_20bank_scenario(1.0 / (40.0 + 1e-8))).passed());
    CHECK(validate(make_leverage_scenario(4.0)).passed());
    CHECK(validate(make_2asset_scenario(0.35)).passed());
}

TEST_CASE("validation rejects alpha * theta_min >= 1") {
    Scenario scn = make_20bank_scenario(0.0);
    scn.assets[0].alpha = 15.0;
    const ValidationReport report = validate(scn);
    CHECK_FALSE(report.passed());
    bool saw = false;
    for (const auto& c : report.checks) {
        if (!c.passed && c.name.find("alpha*theta_min") != std::string::npos) saw = true;
    }
    CHECK(saw);
}

TEST_CASE("validation rejects risk-weights below the liquidity floor") {
    Scenario scn = make_20bank_scenario(0.0175);
    scn.assets[0].alpha = 3.0;  // admissible interval is (4.11765, 10)
    const ValidationReport report = validate(scn);
    CHECK_FALSE(report.passed());
    bool saw_interval = false;
    for (const auto& c : report.checks) {
        if (!c.passed && c.detail.find("admissible interval") != std::string::npos &&
            c.detail.find("4.117") != std::string::npos) {
            saw_interval = true;
        }
    }
    CHECK(saw_interval);
    CHECK_THROWS_AS(require_valid(scn), InadmissibleScenario);
}

TEST_CASE("validation rejects undercapitalised banks") {
    Scenario scn = make_20bank_scenario(0.0);
    scn.banks[3].liabilities = 1.5;  // theta(0) < theta_min
    CHECK_FALSE(validate(scn).passed());
}

TEST_CASE("validation rejects market cap below total holdings") {
    Scenario scn = make_20bank_scenario(0.0);
    scn.assets[0].market_cap = 39.0;
    CHECK_FALSE(validate(scn).passed());
}

TEST_CASE("validate is idempotent and side-effect free") {
    const Scenario scn = make_2asset_scenario(0.4);
    const Scenario copy = scn;
    const ValidationReport r1 = validate(scn);
    const ValidationReport r2 = validate(scn);
    CHECK((scn == copy));
    REQUIRE(r1.checks.size() == r2.checks.size());
    for (std::size_t i = 0; i < r1.checks.size(); ++i) {
        CHECK(r1.checks[i].passed == r2.checks[i].passed);
    }
}

TEST_CASE("scenario JSON round trip is field-exact") {
    for (const Scenario& scn :
         {make_20bank_scenario(0.7 / 40.0), make_leverage_scenario(7.35),
          make_2asset_scenario(0.15)}) {
        const std::string text = scenario_to_json(scn);
        const Scenario parsed = parse_scenario(text);
        CHECK((parsed == scn));
        CHECK((scenario_to_json(parsed) == text));
    }
}

TEST_CASE("round trip covers tabulated curves") {
    Scenario scn = make_20bank_scenario(0.01);
    scn.assets[0].demand.time_part =
        TimeDecay::tabulated({0.0, 0.4, 1.0}, {1.0, 0.97, 0.93});
    const Scenario parsed = parse_scenario(scenario_to_json(scn));
    CHECK((parsed == scn));
}

TEST_CASE("parse errors carry diagnostics") {
    CHECK_THROWS_AS(parse_scenario("{not json"), ParseError);
    CHECK_THROWS_AS(parse_scenario(R"({"schema":"firesale/99"})"), ParseError);
    CHECK_THROWS_AS(parse_scenario(R"({"schema":"firesale/1","horizon":1.0})"), ParseError);
    CHECK_THROWS_AS(load_scenario("/nonexistent/path.json"), IoError);
}

TEST_CASE("case-study presets regenerate byte-identical files") {
    const std::string once = scenario_to_json(make_20bank_scenario(0.9 / 40.0));
    const std::string twice = scenario_to_json(make_20bank_scenario(0.9 / 40.0));
    CHECK((once == twice));
}
