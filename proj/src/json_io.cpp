#include "screenalloc/json_io.hpp"

#include <cmath>
#include <stdexcept>

namespace screenalloc {

namespace {

using nlohmann::json;

void require_keys(const json& obj, std::initializer_list<const char*> keys,
                  const char* what) {
    if (!obj.is_object()) {
        throw std::invalid_argument(std::string(what) + ": expected a JSON object");
    }
    for (const char* k : keys) {
        if (!obj.contains(k)) {
            throw std::invalid_argument(std::string(what) + ": missing field '" + k + "'");
        }
    }
    for (const auto& item : obj.items()) {
        bool known = false;
        for (const char* k : keys) {
            if (item.key() == k) {
                known = true;
                break;
            }
        }
        if (!known) {
            throw std::invalid_argument(std::string(what) + ": unknown field '" +
                                        item.key() + "'");
        }
    }
}

json encode_threshold(double t) {
    if (std::isinf(t)) return t > 0 ? json("inf") : json("-inf");
    return json(t);
}

double decode_threshold(const json& j) {
    if (j.is_string()) {
        const std::string s = j.get<std::string>();
        if (s == "inf") return kInf;
        if (s == "-inf") return -kInf;
        throw std::invalid_argument("threshold string must be 'inf' or '-inf'");
    }
    return j.get<double>();
}

} // namespace

double round_currency(double v) {
    return std::round(v * 1e6) / 1e6;
}

nlohmann::json instance_to_json(const ProblemInstance& instance) {
    json j;
    j["budget"] = instance.budget;
    j["num_groups"] = instance.num_groups;
    j["utility"] = {{"repay_value", instance.utility.repay_value},
                    {"default_value", instance.utility.default_value}};
    json apps = json::array();
    for (const Applicant& a : instance.applicants) {
        json ja;
        ja["id"] = a.id;
        ja["group"] = a.group;
        ja["mu"] = a.mu;
        ja["screen_cost"] = a.screen_cost;
        ja["alloc_cost"] = a.alloc_cost;
        if (a.posterior) {
            ja["posterior"] = {{"support", a.posterior->support},
                               {"probs", a.posterior->probs}};
        } else {
            ja["posterior"] = nullptr;
        }
        apps.push_back(std::move(ja));
    }
    j["applicants"] = std::move(apps);
    json cons = json::array();
    for (const DiversityConstraint& c : instance.constraints) {
        cons.push_back({{"group", c.group}, {"target", c.target}, {"mode", to_string(c.mode)}});
    }
    j["constraints"] = std::move(cons);
    return j;
}

ProblemInstance instance_from_json(const nlohmann::json& j) {
    require_keys(j, {"budget", "num_groups", "utility", "applicants", "constraints"},
                 "instance");
    require_keys(j.at("utility"), {"repay_value", "default_value"}, "utility");

    ProblemInstance inst;
    inst.budget = j.at("budget").get<double>();
    inst.num_groups = j.at("num_groups").get<int>();
    inst.utility.repay_value = j.at("utility").at("repay_value").get<double>();
    inst.utility.default_value = j.at("utility").at("default_value").get<double>();

    for (const json& ja : j.at("applicants")) {
        require_keys(ja, {"id", "group", "mu", "screen_cost", "alloc_cost", "posterior"},
                     "applicant");
        Applicant a;
        a.id = ja.at("id").get<int>();
        a.group = ja.at("group").get<int>();
        a.mu = ja.at("mu").get<double>();
        a.screen_cost = ja.at("screen_cost").get<double>();
        a.alloc_cost = ja.at("alloc_cost").get<double>();
        const json& jp = ja.at("posterior");
        if (!jp.is_null()) {
            require_keys(jp, {"support", "probs"}, "posterior");
            DiscreteDistribution d;
            d.support = jp.at("support").get<std::vector<double>>();
            d.probs = jp.at("probs").get<std::vector<double>>();
            a.posterior = std::move(d);
        }
        inst.applicants.push_back(std::move(a));
    }
    for (const json& jc : j.at("constraints")) {
        require_keys(jc, {"group", "target", "mode"}, "constraint");
        DiversityConstraint c;
        c.group = jc.at("group").get<int>();
        c.target = jc.at("target").get<double>();
        const std::string mode = jc.at("mode").get<std::string>();
        if (mode == "at_least") {
            c.mode = ConstraintMode::at_least;
        } else if (mode == "exactly") {
            c.mode = ConstraintMode::exactly;
        } else {
            throw std::invalid_argument("constraint: mode must be 'at_least' or 'exactly'");
        }
        inst.constraints.push_back(c);
    }
    return inst;
}

nlohmann::json solve_result_to_json(const SolveResult& result) {
    json j;
    j["status"] = to_string(result.status);
    j["expected_utility"] = round_currency(result.expected_utility);
    j["expected_cost"] = round_currency(result.expected_cost);
    json gu = json::array();
    for (double v : result.group_utilities) gu.push_back(round_currency(v));
    j["group_utilities"] = std::move(gu);
    j["screening"] = {{"probs", result.screening.probs}};
    json ts = json::array();
    for (double t : result.allocation.thresholds) ts.push_back(encode_threshold(t));
    j["allocation"] = {{"thresholds", std::move(ts)},
                       {"boundary_probs", result.allocation.boundary_probs}};
    return j;
}

void policy_from_json(const nlohmann::json& j, ScreeningPolicy& screening,
                      ThresholdPolicy& allocation) {
    if (!j.contains("screening") || !j.contains("allocation")) {
        throw std::invalid_argument("policy: needs 'screening' and 'allocation' fields");
    }
    require_keys(j.at("screening"), {"probs"}, "screening");
    require_keys(j.at("allocation"), {"thresholds", "boundary_probs"}, "allocation");
    screening.probs = j.at("screening").at("probs").get<std::vector<double>>();
    allocation.thresholds.clear();
    for (const json& t : j.at("allocation").at("thresholds")) {
        allocation.thresholds.push_back(decode_threshold(t));
    }
    allocation.boundary_probs =
        j.at("allocation").at("boundary_probs").get<std::vector<double>>();
}

nlohmann::json eval_report_to_json(const EvalReport& report) {
    json j;
    j["expected_utility"] = round_currency(report.expected_utility);
    j["expected_cost"] = round_currency(report.expected_cost);
    json gu = json::array();
    for (double v : report.group_utilities) gu.push_back(round_currency(v));
    j["group_utilities"] = std::move(gu);
    if (report.draws > 0) {
        j["std_error_utility"] = report.std_error_utility;
        j["std_error_cost"] = report.std_error_cost;
        j["draws"] = report.draws;
    }
    return j;
}

} // namespace screenalloc
