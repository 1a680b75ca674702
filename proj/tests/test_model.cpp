#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "screenalloc/model.hpp"
#include "test_support.hpp"

using namespace screenalloc;
namespace st = screenalloc::testing;

TEST_CASE("stylized instance validates cleanly") {
    const ProblemInstance inst = st::stylized_instance();
    CHECK(validate_instance(inst).empty());
    CHECK(inst.budget == 2000.0);
    CHECK(inst.size() == 13);
}

TEST_CASE("posterior mean must equal mu") {
    ProblemInstance inst = st::stylized_instance();
    inst.applicants[0].mu = 600.0; // posterior mean stays 500
    const auto violations = validate_instance(inst);
    REQUIRE(violations.size() == 1);
    CHECK(violations[0].find("applicant 0") != std::string::npos);
    CHECK(violations[0].find("iterated expectations") != std::string::npos);
}

TEST_CASE("probs must sum to one") {
    ProblemInstance inst = st::stylized_instance();
    inst.applicants[2].posterior->probs = {0.5, 0.4};
    const auto violations = validate_instance(inst);
    REQUIRE(!violations.empty());
    bool found = false;
    for (const auto& v : violations) {
        if (v.find("sum") != std::string::npos) found = true;
    }
    CHECK(found);
}

TEST_CASE("support must increase strictly and probs stay non-negative") {
    ProblemInstance inst = st::stylized_instance();
    inst.applicants[1].posterior->support = {1000.0, 0.0};
    CHECK(!validate_instance(inst).empty());

    ProblemInstance inst2 = st::stylized_instance();
    inst2.applicants[1].posterior->probs = {1.5, -0.5};
    CHECK(!validate_instance(inst2).empty());
}

TEST_CASE("group index and costs are checked") {
    ProblemInstance inst = st::stylized_instance();
    inst.applicants[12].group = 7;
    inst.applicants[3].alloc_cost = 0.0;
    const auto violations = validate_instance(inst);
    CHECK(violations.size() == 2);
}

TEST_CASE("utility map hits the paper's anchor values") {
    const UtilitySpec spec{1000.0, -200.0};
    CHECK(utility_from_repay_prob(spec, 1.0) == doctest::Approx(1000.0));
    CHECK(utility_from_repay_prob(spec, 0.0) == doctest::Approx(-200.0));
    CHECK(utility_from_repay_prob(spec, 0.5) == doctest::Approx(400.0));
    CHECK_THROWS_AS(utility_from_repay_prob(spec, 1.2), std::domain_error);
    CHECK_THROWS_AS(utility_from_repay_prob(spec, -0.1), std::domain_error);
}

TEST_CASE("utility map is affine") {
    const UtilitySpec spec{1000.0, -200.0};
    std::mt19937_64 rng(11);
    for (int k = 0; k < 200; ++k) {
        const double lam = st::uniform01(rng);
        const double x = st::uniform01(rng);
        const double y = st::uniform01(rng);
        const double lhs = utility_from_repay_prob(spec, lam * x + (1.0 - lam) * y);
        const double rhs = lam * utility_from_repay_prob(spec, x) +
                           (1.0 - lam) * utility_from_repay_prob(spec, y);
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
    }
}

TEST_CASE("random tiny instances satisfy every invariant") {
    std::mt19937_64 rng(42);
    for (int k = 0; k < 100; ++k) {
        const ProblemInstance inst = st::random_tiny_instance(rng);
        CHECK(validate_instance(inst).empty());
        for (const Applicant& a : inst.applicants) {
            if (a.posterior) {
                CHECK(a.posterior->mean() == a.mu); // dyadic fixtures are exact
            }
        }
    }
}
