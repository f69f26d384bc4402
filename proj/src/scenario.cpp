#include "firesale/scenario.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "firesale/errors.hpp"

namespace firesale {

using nlohmann::json;

bool ValidationReport::passed() const {
    for (const auto& c : checks) {
        if (!c.passed) return false;
    }
    return true;
}

std::string ValidationReport::summary() const {
    std::ostringstream out;
    for (const auto& c : checks) {
        out << (c.passed ? "[ok]   " : "[FAIL] ") << c.name;
        if (!c.detail.empty()) out << ": " << c.detail;
        out << '\n';
    }
    return out.str();
}

namespace {

void add(ValidationReport& report, const std::string& name, bool ok, std::string detail = "") {
    report.checks.push_back({name, ok, std::move(detail)});
}

std::string bank_tag(int i) {
    return "bank " + std::to_string(i + 1);
}
std::string asset_tag(int k) {
    return "asset " + std::to_string(k + 1);
}

}  // namespace

ValidationReport validate(const Scenario& scn) {
    ValidationReport report;
    const double theta = scn.regulation.theta_min;
    const int n = scn.n_banks(), m = scn.n_assets();

    add(report, "theta_min in (0,1)", theta > 0.0 && theta < 1.0,
        "theta_min = " + std::to_string(theta));
    add(report, "horizon positive", scn.horizon > 0.0);
    add(report, "at least one bank and one asset", n >= 1 && m >= 1);
    if (!report.passed()) return report;

    for (int i = 0; i < n; ++i) {
        const auto& b = scn.banks[i];
        bool nonneg = b.liquid >= 0.0 && b.nontradable >= 0.0 && b.liabilities >= 0.0 &&
                      b.nontradable_weight >= 0.0;
        for (double s : b.holdings) nonneg = nonneg && s >= 0.0;
        add(report, bank_tag(i) + " entries nonnegative", nonneg);
        add(report, bank_tag(i) + " holdings sized per asset",
            static_cast<int>(b.holdings.size()) == m);
    }
    if (!report.passed()) return report;

    for (int k = 0; k < m; ++k) {
        const auto& a = scn.assets[k];
        add(report, asset_tag(k) + " risk-weight positive", a.alpha > 0.0);
        add(report, asset_tag(k) + " alpha*theta_min < 1", a.alpha * theta < 1.0,
            "alpha*theta_min = " + std::to_string(a.alpha * theta));

        double total = 0.0;
        for (int i = 0; i < n; ++i) total += scn.banks[i].holdings[k];
        add(report, asset_tag(k) + " market cap covers holdings", a.market_cap >= total - 1e-12,
            "market_cap = " + std::to_string(a.market_cap) + ", holdings = " +
                std::to_string(total));

        const auto& curve = a.demand;
        add(report, asset_tag(k) + " initial price is 1",
            std::fabs(curve.price(0.0, 0.0) - 1.0) <= 1e-12);
        if (curve.impact_part.kind() == ImpactCurve::Kind::Linear) {
            add(report, asset_tag(k) + " linear impact domain b*M < 1",
                curve.impact_part.b() * a.market_cap < 1.0);
        }

        const AlphaInterval interval =
            admissible_alpha_interval(curve.impact_part, a.market_cap, scn.regulation);
        std::ostringstream detail;
        detail << "alpha = " << a.alpha << ", admissible interval = (" << interval.lo << ", "
               << interval.hi << ")";
        add(report, asset_tag(k) + " risk-weight admissible for its liquidity",
            interval.contains(a.alpha), detail.str());

        const MonotonicityCheck mono =
            check_monotonicity_condition(curve.impact_part, a.market_cap);
        add(report, asset_tag(k) + " demand monotonicity condition", mono.ok,
            mono.ok ? "" : "first violation at gamma = " + std::to_string(*mono.first_violation));
    }
    if (!report.passed()) return report;

    const std::vector<double> unit_prices(m, 1.0);
    for (int i = 0; i < n; ++i) {
        const auto& b = scn.banks[i];
        double rwa = b.nontradable_weight * b.nontradable;
        for (int k = 0; k < m; ++k) rwa += scn.assets[k].alpha * b.holdings[k];
        add(report, bank_tag(i) + " holds risk-weighted assets", rwa > 0.0);
        if (rwa <= 0.0) continue;
        const double theta0 =
            capital_ratio(b, 0.0, unit_prices, 0.0, scn.assets, scn.regulation);
        add(report, bank_tag(i) + " initial capital ratio >= theta_min", theta0 >= theta - 1e-12,
            "theta(0) = " + std::to_string(theta0));
    }
    return report;
}

void require_valid(const Scenario& scn) {
    const ValidationReport report = validate(scn);
    if (report.passed()) return;
    std::string msg = "scenario failed validation:\n";
    for (const auto& c : report.checks) {
        if (!c.passed) {
            msg += "  " + c.name;
            if (!c.detail.empty()) msg += " (" + c.detail + ")";
            msg += '\n';
        }
    }
    throw InadmissibleScenario(msg);
}

namespace {

json time_decay_to_json(const TimeDecay& td) {
    switch (td.kind()) {
        case TimeDecay::Kind::Constant:
            return {{"kind", "constant"}};
        case TimeDecay::Kind::Exponential:
            return {{"kind", "exponential"}, {"rate", td.rate()}, {"horizon", td.horizon()}};
        case TimeDecay::Kind::Tabulated:
            return {{"kind", "tabulated"},
                    {"times", td.node_times()},
                    {"values", td.node_values()}};
    }
    return {};
}

TimeDecay time_decay_from_json(const json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "constant") return TimeDecay::constant();
    if (kind == "exponential") {
        return TimeDecay::exponential(j.at("rate").get<double>(), j.at("horizon").get<double>());
    }
    if (kind == "tabulated") {
        return TimeDecay::tabulated(j.at("times").get<std::vector<double>>(),
                                    j.at("values").get<std::vector<double>>());
    }
    throw ParseError("unknown time decay kind '" + kind + "'");
}

json impact_to_json(const ImpactCurve& c) {
    switch (c.kind()) {
        case ImpactCurve::Kind::None:
            return {{"kind", "none"}};
        case ImpactCurve::Kind::Linear:
            return {{"kind", "linear"}, {"b", c.b()}};
        case ImpactCurve::Kind::Exponential:
            return {{"kind", "exponential"}, {"b", c.b()}};
    }
    return {};
}

ImpactCurve impact_from_json(const json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "none") return ImpactCurve::none();
    if (kind == "linear") return ImpactCurve::linear(j.at("b").get<double>());
    if (kind == "exponential") return ImpactCurve::exponential(j.at("b").get<double>());
    throw ParseError("unknown impact curve kind '" + kind + "'");
}

}  // namespace

std::string scenario_to_json(const Scenario& scn) {
    json doc;
    doc["schema"] = "firesale/1";
    doc["horizon"] = scn.horizon;
    doc["regulation"] = {{"theta_min", scn.regulation.theta_min}};
    doc["assets"] = json::array();
    for (const auto& a : scn.assets) {
        doc["assets"].push_back({{"alpha", a.alpha},
                                 {"market_cap", a.market_cap},
                                 {"time_decay", time_decay_to_json(a.demand.time_part)},
                                 {"impact", impact_to_json(a.demand.impact_part)}});
    }
    doc["banks"] = json::array();
    for (const auto& b : scn.banks) {
        doc["banks"].push_back({{"liquid", b.liquid},
                                {"holdings", b.holdings},
                                {"nontradable", b.nontradable},
                                {"liabilities", b.liabilities},
                                {"nontradable_weight", b.nontradable_weight}});
    }
    return doc.dump(2) + "\n";
}

Scenario parse_scenario(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("scenario parse error: ") + e.what());
    }
    try {
        const std::string schema = doc.at("schema").get<std::string>();
        if (schema != "firesale/1") {
            throw ParseError("unsupported scenario schema '" + schema + "'");
        }
        Scenario scn;
        scn.horizon = doc.at("horizon").get<double>();
        scn.regulation.theta_min = doc.at("regulation").at("theta_min").get<double>();
        for (const auto& ja : doc.at("assets")) {
            AssetSpec asset;
            asset.alpha = ja.at("alpha").get<double>();
            asset.market_cap = ja.at("market_cap").get<double>();
            asset.demand.time_part = time_decay_from_json(ja.at("time_decay"));
            asset.demand.impact_part = impact_from_json(ja.at("impact"));
            scn.assets.push_back(std::move(asset));
        }
        for (const auto& jb : doc.at("banks")) {
            BankBook book;
            book.liquid = jb.at("liquid").get<double>();
            book.holdings = jb.at("holdings").get<std::vector<double>>();
            book.nontradable = jb.at("nontradable").get<double>();
            book.liabilities = jb.at("liabilities").get<double>();
            book.nontradable_weight = jb.at("nontradable_weight").get<double>();
            scn.banks.push_back(std::move(book));
        }
        return scn;
    } catch (const json::exception& e) {
        throw ParseError(std::string("scenario field error: ") + e.what());
    }
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open scenario file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str());
}

void save_scenario(const Scenario& scn, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write scenario file '" + path + "'");
    out << scenario_to_json(scn);
    if (!out) throw IoError("failed writing scenario file '" + path + "'");
}

}  // namespace firesale
