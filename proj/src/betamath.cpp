#include "screenalloc/betamath.hpp"

#include <cmath>
#include <stdexcept>

#include "screenalloc/stable_sum.hpp"

namespace screenalloc {

namespace {

// Continued fraction for the incomplete beta (modified Lentz). Converges
// quickly for x < (a+1)/(a+b+2); the symmetry relation covers the rest.
double beta_cf(double a, double b, double x) {
    constexpr int kMaxIter = 400;
    constexpr double kEps = 1e-15;
    constexpr double kTiny = 1e-300;

    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < kEps) break;
    }
    return h;
}

} // namespace

double reg_inc_beta(double a, double b, double x) {
    if (!(a > 0.0) || !(b > 0.0)) {
        throw std::domain_error("reg_inc_beta: shape parameters must be positive");
    }
    if (!(x >= 0.0 && x <= 1.0)) {
        throw std::domain_error("reg_inc_beta: x must lie in [0, 1]");
    }
    if (x == 0.0) return 0.0;
    if (x == 1.0) return 1.0;
    const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                            a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return front * beta_cf(a, b, x) / a;
    }
    return 1.0 - front * beta_cf(b, a, 1.0 - x) / b;
}

double reg_inc_beta_inv(double a, double b, double p) {
    if (!(a > 0.0) || !(b > 0.0)) {
        throw std::domain_error("reg_inc_beta_inv: shape parameters must be positive");
    }
    if (!(p >= 0.0 && p <= 1.0)) {
        throw std::domain_error("reg_inc_beta_inv: p must lie in [0, 1]");
    }
    if (p == 0.0) return 0.0;
    if (p == 1.0) return 1.0;

    double lo = 0.0;
    double hi = 1.0;
    double x = a / (a + b); // mean as the starting point
    const double ln_norm = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b);
    for (int it = 0; it < 200; ++it) {
        const double f = reg_inc_beta(a, b, x) - p;
        if (f > 0.0) {
            hi = x;
        } else {
            lo = x;
        }
        if (std::abs(f) < 1e-14) break;
        const double ln_pdf = ln_norm + (a - 1.0) * std::log(x) + (b - 1.0) * std::log1p(-x);
        double step = f / std::exp(ln_pdf);
        double next = x - step;
        if (!(next > lo && next < hi)) {
            next = 0.5 * (lo + hi); // bisect when Newton leaves the bracket
        }
        if (next == x) break;
        x = next;
    }
    return x;
}

DiscreteDistribution discretize_beta(double mean, double count, int bins) {
    if (!(mean > 0.0 && mean < 1.0)) {
        throw std::domain_error("discretize_beta: mean must lie in (0, 1)");
    }
    if (!(count > 0.0)) {
        throw std::domain_error("discretize_beta: count must be positive");
    }
    if (bins < 2) {
        throw std::domain_error("discretize_beta: bins must be >= 2");
    }
    const double a = mean * count;
    const double b = (1.0 - mean) * count;
    if (!(a > 0.0) || !(b > 0.0)) {
        throw std::domain_error("discretize_beta: degenerate shape parameters");
    }

    DiscreteDistribution dist;
    dist.support.resize(bins);
    dist.probs.resize(bins);
    double prev = 0.0;
    for (int k = 0; k < bins; ++k) {
        dist.support[k] = (2.0 * k + 1.0) / (2.0 * bins);
        const double next = (k + 1 == bins) ? 1.0
                                            : reg_inc_beta(a, b, static_cast<double>(k + 1) / bins);
        dist.probs[k] = std::max(0.0, next - prev);
        prev = next;
    }
    StableSum total;
    for (double p : dist.probs) total.add(p);
    const double norm = total.get();
    for (double& p : dist.probs) p /= norm;
    return dist;
}

} // namespace screenalloc
