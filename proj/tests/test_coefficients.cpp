#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "screenalloc/coefficients.hpp"
#include "test_support.hpp"

using namespace screenalloc;
namespace st = screenalloc::testing;

namespace {

Applicant coin_applicant() {
    Applicant a;
    a.id = 0;
    a.group = 0;
    a.mu = 500.0;
    a.screen_cost = 50.0;
    a.alloc_cost = 400.0;
    a.posterior = DiscreteDistribution{{0.0, 1000.0}, {0.5, 0.5}};
    return a;
}

} // namespace

TEST_CASE("worked example: threshold between the atoms") {
    const Applicant a = coin_applicant();
    // t = 1.5 in cost-normalized units is 600 in utility units.
    const Coefficients co = derive_coefficients(a, 1.5, 0.0);
    CHECK(co.q == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(co.qe == doctest::Approx(500.0).epsilon(1e-15));
    CHECK(co.o == 0.0);
}

TEST_CASE("infinite thresholds") {
    const Applicant a = coin_applicant();
    const Coefficients lo = derive_coefficients(a, -kInf, 0.3);
    CHECK(lo.q == doctest::Approx(1.0));
    CHECK(lo.qe == doctest::Approx(500.0)); // tower: qe at -inf is mu
    CHECK(lo.o == 1.0);
    const Coefficients hi = derive_coefficients(a, kInf, 0.3);
    CHECK(hi.q == 0.0);
    CHECK(hi.qe == 0.0);
    CHECK(hi.o == 0.0);
}

TEST_CASE("unscreenable applicants collapse to q = o, qe = o*mu") {
    Applicant a;
    a.mu = 750.0;
    a.alloc_cost = 400.0;
    const Coefficients in = derive_coefficients(a, 1.0, 0.0);
    CHECK(in.q == 1.0);
    CHECK(in.qe == doctest::Approx(750.0));
    const Coefficients at = derive_coefficients(a, 1.875, 0.25);
    CHECK(at.o == doctest::Approx(0.25));
    CHECK(at.q == doctest::Approx(0.25));
    CHECK(at.qe == doctest::Approx(0.25 * 750.0));
}

TEST_CASE("tower check: qe equals mu at t = -inf") {
    std::mt19937_64 rng(7);
    for (int k = 0; k < 100; ++k) {
        const ProblemInstance inst = st::random_tiny_instance(rng);
        for (const Applicant& a : inst.applicants) {
            if (!a.posterior) continue;
            for (double alpha : {0.0, 0.25, 1.0}) {
                const Coefficients co = derive_coefficients(a, -kInf, alpha);
                CHECK(std::abs(co.qe - a.mu) <= 1e-12 * std::max(1.0, std::abs(a.mu)));
                CHECK(co.q == doctest::Approx(1.0).epsilon(1e-14));
            }
        }
    }
}

TEST_CASE("q and qe are non-increasing in t") {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 20; ++trial) {
        Applicant a;
        a.alloc_cost = 2.0;
        a.posterior = st::random_dyadic_distribution(rng, 6);
        // Only non-negative supports keep qe monotone alongside q.
        for (double& s : a.posterior->support) s = std::abs(s);
        std::sort(a.posterior->support.begin(), a.posterior->support.end());
        a.posterior->support.erase(
            std::unique(a.posterior->support.begin(), a.posterior->support.end()),
            a.posterior->support.end());
        a.posterior->probs.resize(a.posterior->support.size());
        double total = 0.0;
        for (double& p : a.posterior->probs) {
            p = 1.0 + st::pick_int(rng, 0, 7);
            total += p;
        }
        for (double& p : a.posterior->probs) p /= total;
        a.mu = a.posterior->mean();

        const double alpha = st::pick_int(rng, 0, 4) * 0.25;
        double prev_q = 2.0, prev_qe = 1e18;
        for (int step = 0; step <= 100; ++step) {
            const double t = -1.0 + step * 0.2;
            const Coefficients co = derive_coefficients(a, t, alpha);
            CHECK(co.q <= prev_q + 1e-12);
            CHECK(co.qe <= prev_qe + 1e-9);
            prev_q = co.q;
            prev_qe = co.qe;
        }
    }
}

TEST_CASE("q and qe are affine in alpha at an atom") {
    const Applicant a = coin_applicant();
    const double t = 1000.0 / 400.0; // sits exactly on the top atom
    const Coefficients c0 = derive_coefficients(a, t, 0.0);
    const Coefficients c5 = derive_coefficients(a, t, 0.5);
    const Coefficients c1 = derive_coefficients(a, t, 1.0);
    CHECK(c5.q == doctest::Approx(0.5 * (c0.q + c1.q)).epsilon(1e-14));
    CHECK(c5.qe == doctest::Approx(0.5 * (c0.qe + c1.qe)).epsilon(1e-14));
    // Slope equals the boundary mass.
    CHECK(c1.q - c0.q == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("o takes only the values 0, alpha, 1") {
    std::mt19937_64 rng(5);
    for (int k = 0; k < 200; ++k) {
        const ProblemInstance inst = st::random_tiny_instance(rng);
        const ThresholdPolicy pol = st::random_positive_policy(rng, inst);
        for (const Applicant& a : inst.applicants) {
            const Coefficients co = derive_coefficients(a, pol);
            const double alpha = pol.boundary_probs[a.group];
            CHECK((co.o == 0.0 || co.o == alpha || co.o == 1.0));
        }
    }
}

TEST_CASE("group index beyond policy length throws") {
    Applicant a;
    a.group = 3;
    ThresholdPolicy pol;
    pol.thresholds = {0.0, 0.0};
    pol.boundary_probs = {0.0, 0.0};
    CHECK_THROWS_AS(derive_coefficients(a, pol), std::out_of_range);
}
