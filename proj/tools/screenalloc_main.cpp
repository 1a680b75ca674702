// screenalloc CLI: generate instances, solve them, sweep Pareto frontiers,
// and simulate policies. Exit codes: 0 success, 2 input/usage error,
// 3 infeasible.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "screenalloc/data.hpp"
#include "screenalloc/evaluator.hpp"
#include "screenalloc/json_io.hpp"
#include "screenalloc/model.hpp"
#include "screenalloc/optimizer.hpp"

namespace {

using nlohmann::json;
using namespace screenalloc;

constexpr const char* kVersion = "0.1.0";

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UsageError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string fnv1a64_hex(const std::string& bytes) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

void atomic_write(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw UsageError("cannot write " + tmp);
        out << content;
    }
    std::filesystem::rename(tmp, path);
}

struct ManifestInfo {
    std::string command;
    json config = json::object();
    json inputs = json::object();
    std::chrono::steady_clock::time_point started = std::chrono::steady_clock::now();
};

void write_manifest(const ManifestInfo& info, const std::string& out_path) {
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - info.started)
            .count();
    json j;
    j["command"] = info.command;
    j["version"] = kVersion;
    j["config"] = info.config;
    j["inputs"] = info.inputs;
    j["duration_seconds"] = secs;
    atomic_write(out_path + ".manifest.json", j.dump(2) + "\n");
}

ProblemInstance load_instance(const std::string& path, ManifestInfo& manifest) {
    const std::string bytes = read_file(path);
    manifest.inputs[path] = fnv1a64_hex(bytes);
    json j;
    try {
        j = json::parse(bytes);
    } catch (const json::parse_error& e) {
        throw UsageError(path + ": " + e.what());
    }
    ProblemInstance inst = instance_from_json(j);
    const std::vector<std::string> violations = validate_instance(inst);
    if (!violations.empty()) {
        std::ostringstream msg;
        msg << path << " failed validation:";
        for (const std::string& v : violations) msg << "\n  " << v;
        throw UsageError(msg.str());
    }
    return inst;
}

std::string format_currency(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

int cmd_gen(const std::string& regime, std::uint64_t seed, const std::string& out) {
    ManifestInfo manifest;
    manifest.command = "gen";
    SyntheticConfig cfg;
    cfg.seed = seed;
    if (regime == "hi-val-lo-cost") {
        cfg.post_count = 5.0;
        cfg.screen_cost = 25.0;
    } else if (regime == "hi-val-hi-cost") {
        cfg.post_count = 5.0;
        cfg.screen_cost = 100.0;
    } else if (regime == "lo-val-lo-cost") {
        cfg.post_count = 25.0;
        cfg.screen_cost = 25.0;
    } else if (regime == "lo-val-hi-cost") {
        cfg.post_count = 25.0;
        cfg.screen_cost = 100.0;
    } else {
        throw UsageError("unknown regime '" + regime +
                         "' (expected {hi,lo}-val-{hi,lo}-cost)");
    }
    const UtilitySpec utility;
    const ProblemInstance inst = gen_synthetic(cfg, utility);
    atomic_write(out, instance_to_json(inst).dump(2) + "\n");
    manifest.config = {{"regime", regime},
                       {"seed", seed},
                       {"n", cfg.n},
                       {"post_count", cfg.post_count},
                       {"screen_cost", cfg.screen_cost},
                       {"alloc_cost", cfg.alloc_cost},
                       {"budget", cfg.budget},
                       {"bins", cfg.bins}};
    write_manifest(manifest, out);
    return 0;
}

int cmd_german(const std::string& data_path, const std::string& out, double budget,
               double screen_cost, double alloc_cost) {
    ManifestInfo manifest;
    manifest.command = "german";
    const std::string bytes = read_file(data_path);
    manifest.inputs[data_path] = fnv1a64_hex(bytes);

    const std::vector<GermanRecord> records = load_german(data_path);
    if (records.size() != 1000) {
        throw UsageError("expected the canonical 1000-row file, found " +
                         std::to_string(records.size()) + " rows");
    }
    long good = 0;
    for (const GermanRecord& r : records) good += r.good ? 1 : 0;
    if (good != 700) {
        throw UsageError("expected 700 creditworthy rows, found " + std::to_string(good));
    }
    const LogisticModel model = fit_logistic(records);
    const UtilitySpec utility;
    const ProblemInstance inst = build_german_instance(
        records, model.fitted, GermanCosts{screen_cost, alloc_cost}, budget, utility);
    atomic_write(out, instance_to_json(inst).dump(2) + "\n");
    manifest.config = {{"data", data_path},
                       {"budget", budget},
                       {"screen_cost", screen_cost},
                       {"alloc_cost", alloc_cost}};
    write_manifest(manifest, out);
    return 0;
}

int cmd_solve(const std::string& instance_path, double lambda, const std::string& mode,
              const std::string& out) {
    ManifestInfo manifest;
    manifest.command = "solve";
    const ProblemInstance inst = load_instance(instance_path, manifest);

    SolveResult result;
    if (mode == "screen") {
        ProblemInstance work = inst;
        work.constraints.push_back({0, lambda, ConstraintMode::at_least});
        result = sweep_solve(work, SweepConfig{});
    } else if (mode == "noscreen") {
        result = no_screening_baseline(inst, lambda);
    } else {
        throw UsageError("mode must be 'screen' or 'noscreen'");
    }

    atomic_write(out, solve_result_to_json(result).dump(2) + "\n");
    manifest.config = {{"instance", instance_path}, {"lambda", lambda}, {"mode", mode}};
    write_manifest(manifest, out);
    return result.status == SolveStatus::optimal ? 0 : 3;
}

int cmd_frontier(const std::string& instance_path, double lambda_min, double lambda_max,
                 int steps, const std::string& out) {
    ManifestInfo manifest;
    manifest.command = "frontier";
    const ProblemInstance inst = load_instance(instance_path, manifest);
    if (inst.num_groups != 2) {
        throw UsageError("frontier comparison needs a two-group instance");
    }
    if (steps < 1) throw UsageError("--steps must be >= 1");

    SweepConfig cfg;
    for (int k = 0; k < steps; ++k) {
        const double lambda =
            (steps == 1) ? lambda_min
                         : lambda_min + (lambda_max - lambda_min) * k / (steps - 1);
        cfg.lambda_grid.push_back(lambda);
    }
    const auto screen = pareto_frontier(inst, cfg, true);
    const auto noscreen = pareto_frontier(inst, cfg, false);

    std::ostringstream csv;
    csv << "lambda,utility_screen,cost_screen,utility_noscreen,cost_noscreen,"
           "status_screen,status_noscreen\r\n";
    for (std::size_t k = 0; k < screen.size(); ++k) {
        const SolveResult& s = screen[k].second;
        const SolveResult& b = noscreen[k].second;
        csv << format_currency(screen[k].first) << ',';
        if (s.status == SolveStatus::optimal) {
            csv << format_currency(s.expected_utility) << ','
                << format_currency(s.expected_cost) << ',';
        } else {
            csv << ",,";
        }
        if (b.status == SolveStatus::optimal) {
            csv << format_currency(b.expected_utility) << ','
                << format_currency(b.expected_cost) << ',';
        } else {
            csv << ",,";
        }
        csv << to_string(s.status) << ',' << to_string(b.status) << "\r\n";
    }
    atomic_write(out, csv.str());
    manifest.config = {{"instance", instance_path},
                       {"lambda_min", lambda_min},
                       {"lambda_max", lambda_max},
                       {"steps", steps}};
    write_manifest(manifest, out);
    return 0;
}

int cmd_simulate(const std::string& instance_path, const std::string& policy_path,
                 long draws, std::uint64_t seed) {
    ManifestInfo manifest;
    manifest.command = "simulate";
    const ProblemInstance inst = load_instance(instance_path, manifest);
    json jp;
    try {
        jp = json::parse(read_file(policy_path));
    } catch (const json::parse_error& e) {
        throw UsageError(policy_path + ": " + e.what());
    }
    ScreeningPolicy screening;
    ThresholdPolicy allocation;
    policy_from_json(jp, screening, allocation);
    if (screening.probs.size() != inst.size() ||
        allocation.thresholds.size() != static_cast<std::size_t>(inst.num_groups) ||
        allocation.boundary_probs.size() != allocation.thresholds.size()) {
        throw UsageError("policy size does not match the instance");
    }
    for (std::size_t i = 0; i < inst.size(); ++i) {
        if (!inst.applicants[i].screenable() && screening.probs[i] != 0.0) {
            throw UsageError("policy screens applicant " +
                             std::to_string(inst.applicants[i].id) +
                             ", who has no posterior");
        }
    }

    const EvalReport mc = monte_carlo_evaluate(inst, screening, allocation, draws, seed);
    const EvalReport exact = exact_evaluate(inst, screening, allocation);
    json out = eval_report_to_json(mc);
    out["exact"] = eval_report_to_json(exact);
    std::cout << out.dump(2) << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Optimal screening-then-allocation policies under a shared budget"};
    app.set_version_flag("--app-version", kVersion);
    app.require_subcommand(1);

    std::string regime, out, instance_path, policy_path, data_path;
    std::string mode = "screen";
    std::uint64_t seed = 7;
    double lambda = 0.0;
    double lambda_min = 0.0, lambda_max = 0.0;
    double budget = 150000.0, screen_cost = 100.0, alloc_cost = 1000.0;
    int steps = 50;
    long draws = 10000;

    CLI::App* gen = app.add_subcommand("gen", "Generate a synthetic instance");
    gen->add_option("--regime", regime,
                    "one of {hi,lo}-val-{hi,lo}-cost")->required();
    gen->add_option("--seed", seed, "RNG seed");
    gen->add_option("--out", out, "output instance JSON")->required();

    CLI::App* german = app.add_subcommand("german", "Build an instance from a credit file");
    german->add_option("--data", data_path, "path to the 21-column credit file")->required();
    german->add_option("--out", out, "output instance JSON")->required();
    german->add_option("--budget", budget, "total budget");
    german->add_option("--screen-cost", screen_cost, "per-applicant screening cost");
    german->add_option("--alloc-cost", alloc_cost, "per-loan cost");

    CLI::App* solve = app.add_subcommand("solve", "Solve one instance");
    solve->add_option("--instance", instance_path, "instance JSON")->required();
    solve->add_option("--lambda", lambda, "targeted-group utility floor");
    solve->add_option("--mode", mode, "screen | noscreen");
    solve->add_option("--out", out, "output result JSON")->required();

    CLI::App* frontier = app.add_subcommand("frontier", "Sweep the Pareto frontier");
    frontier->add_option("--instance", instance_path, "instance JSON")->required();
    frontier->add_option("--lambda-min", lambda_min, "first lambda");
    frontier->add_option("--lambda-max", lambda_max, "last lambda")->required();
    frontier->add_option("--steps", steps, "number of grid points");
    frontier->add_option("--out", out, "output CSV")->required();

    CLI::App* simulate = app.add_subcommand("simulate", "Monte Carlo check of a policy");
    simulate->add_option("--instance", instance_path, "instance JSON")->required();
    simulate->add_option("--policy", policy_path, "policy/result JSON")->required();
    simulate->add_option("--draws", draws, "number of draws");
    simulate->add_option("--seed", seed, "RNG seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        app.exit(e);
        return 2;
    }

    try {
        if (gen->parsed()) return cmd_gen(regime, seed, out);
        if (german->parsed()) return cmd_german(data_path, out, budget, screen_cost, alloc_cost);
        if (solve->parsed()) return cmd_solve(instance_path, lambda, mode, out);
        if (frontier->parsed()) return cmd_frontier(instance_path, lambda_min, lambda_max, steps, out);
        if (simulate->parsed()) return cmd_simulate(instance_path, policy_path, draws, seed);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 2;
}
