#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "screenalloc/evaluator.hpp"
#include "test_support.hpp"

using namespace screenalloc;
namespace st = screenalloc::testing;

namespace {

// Optimal policy for the worked example: screen all eight, allocate screened
// applicants only at the 1000 atom, nothing to the history group.
ScreeningPolicy stylized_screening() {
    ScreeningPolicy s;
    s.probs.assign(13, 0.0);
    for (int i = 0; i < 8; ++i) s.probs[i] = 1.0;
    return s;
}

ThresholdPolicy stylized_policy() {
    ThresholdPolicy t;
    t.thresholds = {500.0 / 400.0, kInf};
    t.boundary_probs = {0.0, 0.0};
    return t;
}

} // namespace

TEST_CASE("worked example: utility 4000 at cost 2000") {
    const ProblemInstance inst = st::stylized_instance();
    const EvalReport rep = exact_evaluate(inst, stylized_screening(), stylized_policy());
    CHECK(rep.expected_utility == doctest::Approx(4000.0).epsilon(1e-12));
    CHECK(rep.expected_cost == doctest::Approx(2000.0).epsilon(1e-12));
    CHECK(rep.group_utilities[0] == doctest::Approx(4000.0));
    CHECK(rep.group_utilities[1] == 0.0);
}

TEST_CASE("no screening, no allocation evaluates to zero") {
    const ProblemInstance inst = st::stylized_instance();
    ScreeningPolicy s;
    s.probs.assign(13, 0.0);
    ThresholdPolicy t;
    t.thresholds = {kInf, kInf};
    t.boundary_probs = {0.0, 0.0};
    const EvalReport rep = exact_evaluate(inst, s, t);
    CHECK(rep.expected_utility == 0.0);
    CHECK(rep.expected_cost == 0.0);
}

TEST_CASE("half-screened single applicant") {
    ProblemInstance inst;
    inst.num_groups = 1;
    inst.budget = 1000.0;
    Applicant a;
    a.id = 0;
    a.mu = 500.0;
    a.screen_cost = 50.0;
    a.alloc_cost = 400.0;
    a.posterior = DiscreteDistribution{{0.0, 1000.0}, {0.5, 0.5}};
    inst.applicants.push_back(a);

    ScreeningPolicy s;
    s.probs = {0.5};
    ThresholdPolicy t;
    t.thresholds = {500.0 / 400.0};
    t.boundary_probs = {0.0};
    const EvalReport rep = exact_evaluate(inst, s, t);
    CHECK(rep.expected_utility == doctest::Approx(250.0).epsilon(1e-12));
    CHECK(rep.expected_cost == doctest::Approx(125.0).epsilon(1e-12));
}

TEST_CASE("length mismatch throws") {
    const ProblemInstance inst = st::stylized_instance();
    ScreeningPolicy s;
    s.probs.assign(12, 0.0);
    CHECK_THROWS_AS(exact_evaluate(inst, s, stylized_policy()), std::invalid_argument);
}

TEST_CASE("exact_evaluate equals full enumeration") {
    std::mt19937_64 rng(101);
    for (int k = 0; k < 60; ++k) {
        st::TinyOptions opt;
        opt.max_applicants = 5;
        opt.max_atoms = 3;
        opt.max_screenable = 4;
        const ProblemInstance inst = st::random_tiny_instance(rng, opt);
        const ScreeningPolicy s = st::random_screening(rng, inst);
        const ThresholdPolicy t = st::random_positive_policy(rng, inst);
        const EvalReport rep = exact_evaluate(inst, s, t);
        const st::EnumeratedExpectation full = st::enumerate_expectation(inst, s, t);
        CHECK(std::abs(rep.expected_utility - full.utility) <= 1e-12);
        CHECK(std::abs(rep.expected_cost - full.cost) <= 1e-12);
        for (int g = 0; g < inst.num_groups; ++g) {
            CHECK(std::abs(rep.group_utilities[g] - full.group_utilities[g]) <= 1e-12);
        }
    }
}

TEST_CASE("scale equivariance: utility scales, cost does not") {
    std::mt19937_64 rng(55);
    for (int k = 0; k < 30; ++k) {
        ProblemInstance inst = st::random_tiny_instance(rng);
        const ScreeningPolicy s = st::random_screening(rng, inst);
        ThresholdPolicy t = st::random_positive_policy(rng, inst);
        const EvalReport base = exact_evaluate(inst, s, t);

        const double scale = 2.0; // power of two keeps ratios exact
        ProblemInstance scaled = inst;
        for (Applicant& a : scaled.applicants) {
            a.mu *= scale;
            if (a.posterior) {
                for (double& v : a.posterior->support) v *= scale;
            }
        }
        ThresholdPolicy ts = t;
        for (double& v : ts.thresholds) v *= scale;
        const EvalReport rep = exact_evaluate(scaled, s, ts);
        CHECK(rep.expected_utility ==
              doctest::Approx(scale * base.expected_utility).epsilon(1e-12));
        CHECK(rep.expected_cost == doctest::Approx(base.expected_cost).epsilon(1e-12));
    }
}

TEST_CASE("Monte Carlo agrees with the exact expectation") {
    const ProblemInstance inst = st::stylized_instance();
    const EvalReport mc =
        monte_carlo_evaluate(inst, stylized_screening(), stylized_policy(), 200000, 17);
    CHECK(std::abs(mc.expected_utility - 4000.0) <= 4.0 * mc.std_error_utility);
    CHECK(std::abs(mc.expected_cost - 2000.0) <= 4.0 * mc.std_error_cost);
    CHECK(mc.draws == 200000);
}

TEST_CASE("Monte Carlo is deterministic in the seed") {
    const ProblemInstance inst = st::stylized_instance();
    const EvalReport a =
        monte_carlo_evaluate(inst, stylized_screening(), stylized_policy(), 9000, 5);
    const EvalReport b =
        monte_carlo_evaluate(inst, stylized_screening(), stylized_policy(), 9000, 5);
    CHECK(a.expected_utility == b.expected_utility);
    CHECK(a.expected_cost == b.expected_cost);
    CHECK(a.std_error_utility == b.std_error_utility);
}

TEST_CASE("no screening and +inf thresholds simulate to exactly zero") {
    const ProblemInstance inst = st::stylized_instance();
    ScreeningPolicy s;
    s.probs.assign(13, 0.0);
    ThresholdPolicy t;
    t.thresholds = {kInf, kInf};
    t.boundary_probs = {0.0, 0.0};
    const EvalReport rep = monte_carlo_evaluate(inst, s, t, 2000, 77);
    CHECK(rep.expected_utility == 0.0);
    CHECK(rep.expected_cost == 0.0);
    CHECK(rep.std_error_utility == 0.0);
    CHECK(rep.std_error_cost == 0.0);
}

TEST_CASE("deterministic policy has zero variance") {
    const ProblemInstance inst = st::stylized_instance();
    ScreeningPolicy s;
    s.probs.assign(13, 0.0);
    ThresholdPolicy t;
    t.thresholds = {kInf, 1.0}; // every history applicant clears 1.0 strictly
    t.boundary_probs = {0.0, 0.0};
    const EvalReport rep = monte_carlo_evaluate(inst, s, t, 500, 3);
    CHECK(rep.std_error_utility == 0.0);
    CHECK(rep.std_error_cost == 0.0);
    CHECK(rep.expected_utility == doctest::Approx(5 * 750.0));
}

TEST_CASE("MC within 4 standard errors in at least 99 of 100 seeded runs") {
    std::mt19937_64 rng(7777);
    st::TinyOptions opt;
    opt.max_applicants = 5;
    const ProblemInstance inst = st::random_tiny_instance(rng, opt);
    const ScreeningPolicy s = st::random_screening(rng, inst);
    const ThresholdPolicy t = st::random_positive_policy(rng, inst);
    const EvalReport exact = exact_evaluate(inst, s, t);
    int hits = 0;
    for (int seed = 0; seed < 100; ++seed) {
        const EvalReport mc = monte_carlo_evaluate(inst, s, t, 20000, seed);
        const double se = std::max(mc.std_error_utility, 1e-12);
        if (std::abs(mc.expected_utility - exact.expected_utility) <= 4.0 * se) ++hits;
    }
    CHECK(hits >= 99);
}

TEST_CASE("one draw reports draws=1 with zero standard error") {
    const ProblemInstance inst = st::stylized_instance();
    const EvalReport rep =
        monte_carlo_evaluate(inst, stylized_screening(), stylized_policy(), 1, 9);
    CHECK(rep.draws == 1);
    CHECK(rep.std_error_utility == 0.0);
}

TEST_CASE("oracle grid search finds the worked example optimum") {
    const ProblemInstance inst = st::stylized_instance();
    SweepConfig cfg;
    cfg.alpha_grid = {0.0, 0.5, 1.0}; // eight screenable applicants: keep the grid small
    const OracleResult best = oracle_grid_search(inst, {0.0, 1.0}, cfg);
    REQUIRE(best.feasible);
    CHECK(best.report.expected_utility == doctest::Approx(4000.0).epsilon(1e-9));
    CHECK(best.report.expected_cost <= 2000.0 + 1e-9);
}

TEST_CASE("oracle allocates a single unscreenable applicant with positive mu") {
    ProblemInstance inst;
    inst.num_groups = 1;
    inst.budget = 500.0;
    Applicant a;
    a.id = 0;
    a.mu = 750.0;
    a.alloc_cost = 400.0;
    inst.applicants.push_back(a);
    SweepConfig cfg;
    const OracleResult best = oracle_grid_search(inst, {0.0, 0.5, 1.0}, cfg);
    REQUIRE(best.feasible);
    CHECK(best.report.expected_utility == doctest::Approx(750.0));
}

TEST_CASE("oracle refuses oversized enumerations") {
    std::mt19937_64 rng(1);
    st::TinyOptions opt;
    opt.max_applicants = 6;
    ProblemInstance inst = st::random_tiny_instance(rng, opt);
    while (true) {
        bool any = false;
        for (const Applicant& a : inst.applicants) any = any || a.screenable();
        if (any) break;
        inst = st::random_tiny_instance(rng, opt);
    }
    SweepConfig cfg;
    std::vector<double> huge_grid;
    for (int k = 0; k <= 4000; ++k) huge_grid.push_back(k / 4000.0);
    cfg.alpha_grid = huge_grid;
    CHECK_THROWS_AS(oracle_grid_search(inst, huge_grid, cfg), std::length_error);
}

TEST_CASE("threshold dominance: optimal worked-example policy beats 1000 alternatives") {
    const ProblemInstance inst = st::stylized_instance();
    const long violations = check_threshold_dominance(inst, stylized_screening(),
                                                      stylized_policy(), 1000, 31);
    CHECK(violations == 0);
}

TEST_CASE("threshold dominance holds across random instances with t > 0") {
    std::mt19937_64 rng(2718);
    long total = 0;
    for (int k = 0; k < 200; ++k) {
        const ProblemInstance inst = st::random_tiny_instance(rng);
        const ScreeningPolicy s = st::random_screening(rng, inst);
        ThresholdPolicy t = st::random_positive_policy(rng, inst);
        total += check_threshold_dominance(inst, s, t, 50, 1000 + k);
    }
    CHECK(total == 0);
}

TEST_CASE("dominance check rejects non-positive thresholds") {
    const ProblemInstance inst = st::stylized_instance();
    ThresholdPolicy t = stylized_policy();
    t.thresholds[0] = 0.0;
    CHECK_THROWS_AS(
        check_threshold_dominance(inst, stylized_screening(), t, 10, 1),
        std::invalid_argument);
}
