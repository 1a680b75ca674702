#include "screenalloc/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include <Eigen/Dense>

#include "screenalloc/betamath.hpp"
#include "screenalloc/stable_sum.hpp"

namespace screenalloc {

namespace {

double uniform_open01(std::mt19937_64& rng) {
    return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

// Adjusts probs so the distribution's mean equals target exactly, via the
// mean-preserving linear tilt p_k -> p_k (1 + theta (s_k - m)). Falls back to
// shifting the support when the tilt would turn a probability negative.
void retarget_mean(DiscreteDistribution& dist, double target) {
    for (int pass = 0; pass < 8; ++pass) {
        const double m = dist.mean();
        const double err = target - m;
        if (std::abs(err) <= 1e-12 * std::max(1.0, std::abs(target))) return;
        const double var = dist.variance();
        bool tilted = false;
        if (var > 0.0) {
            const double theta = err / var;
            double min_factor = 1.0;
            for (double s : dist.support) {
                min_factor = std::min(min_factor, 1.0 + theta * (s - m));
            }
            if (min_factor >= 0.0) {
                StableSum norm;
                for (std::size_t k = 0; k < dist.probs.size(); ++k) {
                    dist.probs[k] *= 1.0 + theta * (dist.support[k] - m);
                    norm.add(dist.probs[k]);
                }
                const double z = norm.get();
                for (double& p : dist.probs) p /= z;
                tilted = true;
            }
        }
        if (!tilted) {
            for (double& s : dist.support) s += err;
        }
    }
}

} // namespace

ProblemInstance gen_synthetic(const SyntheticConfig& config, const UtilitySpec& utility) {
    if (config.n < 2 || config.bins < 2 || !(config.prior_count > 0.0) ||
        !(config.post_count > 0.0) || !(config.targeted_mean > 0.0) ||
        !(config.targeted_mean < 1.0) || !(config.untargeted_mean > 0.0) ||
        !(config.untargeted_mean < 1.0)) {
        throw std::invalid_argument("gen_synthetic: invalid configuration");
    }

    std::mt19937_64 rng(config.seed);
    const int n_targeted = config.n / 2;
    const int n_other = config.n - n_targeted;

    // Shared support grid: bin midpoints mapped through the utility spec.
    std::vector<double> support(config.bins);
    for (int k = 0; k < config.bins; ++k) {
        support[k] =
            utility_from_repay_prob(utility, (2.0 * k + 1.0) / (2.0 * config.bins));
    }

    ProblemInstance inst;
    inst.num_groups = 2;
    inst.budget = config.budget;
    inst.utility = utility;
    inst.applicants.reserve(config.n);

    const double at = config.targeted_mean * config.prior_count;
    const double bt = (1.0 - config.targeted_mean) * config.prior_count;
    for (int i = 0; i < n_targeted; ++i) {
        const double x = reg_inc_beta_inv(at, bt, uniform_open01(rng));
        Applicant a;
        a.id = i;
        a.group = 0;
        a.mu = utility_from_repay_prob(utility, x);
        a.screen_cost = config.screen_cost;
        a.alloc_cost = config.alloc_cost;
        DiscreteDistribution post = discretize_beta(x, config.post_count, config.bins);
        post.support = support;
        retarget_mean(post, a.mu);
        a.posterior = std::move(post);
        inst.applicants.push_back(std::move(a));
    }

    const double au = config.untargeted_mean * config.prior_count;
    const double bu = (1.0 - config.untargeted_mean) * config.prior_count;
    for (int i = 0; i < n_other; ++i) {
        const double x = reg_inc_beta_inv(au, bu, uniform_open01(rng));
        Applicant a;
        a.id = n_targeted + i;
        a.group = 1;
        a.mu = utility_from_repay_prob(utility, x);
        a.screen_cost = config.screen_cost;
        a.alloc_cost = config.alloc_cost;
        inst.applicants.push_back(std::move(a));
    }
    return inst;
}

namespace {

struct ColumnSpec {
    int file_column; // 0-based
    bool categorical;
    const char* prefix;
    int lo = 0;
    int hi = 0;
};

// UCI attribute layout: 7 numeric columns, 13 categorical code families.
const ColumnSpec kColumns[] = {
    {0, true, "A1", 1, 4},    {1, false, "", 0, 0},     {2, true, "A3", 0, 4},
    {3, true, "A4", 0, 10},   {4, false, "", 0, 0},     {5, true, "A6", 1, 5},
    {6, true, "A7", 1, 5},    {7, false, "", 0, 0},     {8, true, "A9", 1, 5},
    {9, true, "A10", 1, 3},   {10, false, "", 0, 0},    {11, true, "A12", 1, 4},
    {12, false, "", 0, 0},    {13, true, "A14", 1, 3},  {14, true, "A15", 1, 3},
    {15, false, "", 0, 0},    {16, true, "A17", 1, 4},  {17, false, "", 0, 0},
    {18, true, "A19", 1, 2},  {19, true, "A20", 1, 2},
};

bool valid_code(const ColumnSpec& spec, const std::string& token) {
    const std::string prefix = spec.prefix;
    if (token.size() <= prefix.size() || token.compare(0, prefix.size(), prefix) != 0) {
        return false;
    }
    const std::string digits = token.substr(prefix.size());
    if (digits.empty() || digits.size() > 2) return false;
    for (char ch : digits) {
        if (ch < '0' || ch > '9') return false;
    }
    const int v = std::stoi(digits);
    return v >= spec.lo && v <= spec.hi;
}

[[noreturn]] void parse_fail(int line, const std::string& what) {
    std::ostringstream msg;
    msg << "load_german: line " << line << ": " << what;
    throw std::runtime_error(msg.str());
}

} // namespace

std::vector<GermanRecord> load_german(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("load_german: cannot open " + path);
    }
    std::vector<GermanRecord> records;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream ss(line);
        std::vector<std::string> tokens;
        std::string tok;
        while (ss >> tok) tokens.push_back(tok);
        if (tokens.empty()) continue;
        if (tokens.size() != 21) {
            parse_fail(line_no, "expected 21 columns, found " +
                                    std::to_string(tokens.size()));
        }
        GermanRecord rec;
        for (const ColumnSpec& spec : kColumns) {
            const std::string& t = tokens[spec.file_column];
            if (spec.categorical) {
                if (!valid_code(spec, t)) {
                    parse_fail(line_no, "unknown code '" + t + "' in column " +
                                            std::to_string(spec.file_column + 1));
                }
                rec.categorical.push_back(t);
            } else {
                try {
                    std::size_t used = 0;
                    const double v = std::stod(t, &used);
                    if (used != t.size()) throw std::invalid_argument(t);
                    rec.numeric.push_back(v);
                } catch (const std::exception&) {
                    parse_fail(line_no, "non-numeric value '" + t + "' in column " +
                                            std::to_string(spec.file_column + 1));
                }
            }
        }
        if (tokens[20] == "1") {
            rec.good = true;
        } else if (tokens[20] == "2") {
            rec.good = false;
        } else {
            parse_fail(line_no, "label must be 1 or 2, found '" + tokens[20] + "'");
        }
        rec.owns_residence = tokens[14] == "A152";
        records.push_back(std::move(rec));
    }
    return records;
}

LogisticModel fit_logistic(const std::vector<GermanRecord>& records,
                           const LogisticConfig& config) {
    if (records.empty()) {
        throw std::invalid_argument("fit_logistic: empty record set");
    }
    const std::size_t n = records.size();
    const std::size_t n_num = records[0].numeric.size();
    const std::size_t n_cat = records[0].categorical.size();

    // One-hot columns: observed codes per attribute, sorted, first dropped.
    std::vector<std::vector<std::string>> levels(n_cat);
    for (std::size_t c = 0; c < n_cat; ++c) {
        std::map<std::string, int> seen;
        for (const GermanRecord& r : records) seen[r.categorical[c]] = 1;
        for (const auto& [code, _] : seen) levels[c].push_back(code);
    }

    std::size_t d = 1 + n_num;
    for (const auto& lv : levels) d += lv.size() > 1 ? lv.size() - 1 : 0;

    std::vector<double> mean(n_num, 0.0), sd(n_num, 0.0);
    for (std::size_t j = 0; j < n_num; ++j) {
        StableSum s;
        for (const GermanRecord& r : records) s.add(r.numeric[j]);
        mean[j] = s.get() / static_cast<double>(n);
        StableSum v;
        for (const GermanRecord& r : records) {
            v.add((r.numeric[j] - mean[j]) * (r.numeric[j] - mean[j]));
        }
        sd[j] = std::sqrt(v.get() / static_cast<double>(n));
        if (sd[j] == 0.0) sd[j] = 1.0;
    }

    Eigen::MatrixXd X(n, d);
    Eigen::VectorXd y(n);
    for (std::size_t i = 0; i < n; ++i) {
        const GermanRecord& r = records[i];
        std::size_t col = 0;
        X(i, col++) = 1.0;
        for (std::size_t j = 0; j < n_num; ++j) {
            X(i, col++) = (r.numeric[j] - mean[j]) / sd[j];
        }
        for (std::size_t c = 0; c < n_cat; ++c) {
            for (std::size_t l = 1; l < levels[c].size(); ++l) {
                X(i, col++) = (r.categorical[c] == levels[c][l]) ? 1.0 : 0.0;
            }
        }
        y(i) = r.good ? 1.0 : 0.0;
    }

    const auto penalized_nll = [&](const Eigen::VectorXd& coef) {
        const Eigen::VectorXd e = X * coef;
        double nll = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            // log(1 + exp(e)) - y*e, stably
            nll += std::max(e(i), 0.0) + std::log1p(std::exp(-std::abs(e(i)))) -
                   y(i) * e(i);
        }
        for (std::size_t j = 0; j < d; ++j) nll += 0.5 * config.ridge * coef(j) * coef(j);
        return nll;
    };

    Eigen::VectorXd beta = Eigen::VectorXd::Zero(d);
    Eigen::VectorXd eta(n), p(n), w(n), z(n);
    double current_nll = penalized_nll(beta);
    int iterations = 0;
    bool converged = false;
    for (int it = 0; it < config.max_iter; ++it) {
        ++iterations;
        eta = X * beta;
        for (std::size_t i = 0; i < n; ++i) {
            p(i) = 1.0 / (1.0 + std::exp(-eta(i)));
            w(i) = std::max(p(i) * (1.0 - p(i)), 1e-10);
            z(i) = eta(i) + (y(i) - p(i)) / w(i);
        }
        Eigen::MatrixXd h = X.transpose() * w.asDiagonal() * X;
        for (std::size_t j = 0; j < d; ++j) h(j, j) += config.ridge;
        const Eigen::VectorXd proposed =
            h.ldlt().solve(X.transpose() * (w.array() * z.array()).matrix());

        // Step-halving keeps the penalized deviance non-increasing; plain
        // IRLS oscillates once the likelihood saturates.
        Eigen::VectorXd direction = proposed - beta;
        double step = 1.0;
        Eigen::VectorXd next = proposed;
        double next_nll = penalized_nll(next);
        for (int half = 0; half < 40 && next_nll > current_nll + 1e-12; ++half) {
            step *= 0.5;
            next = beta + step * direction;
            next_nll = penalized_nll(next);
        }
        const double change = (next - beta).cwiseAbs().maxCoeff();
        beta = next;
        current_nll = next_nll;
        if (change < config.tol) {
            converged = true;
            break;
        }
    }
    if (!converged) {
        throw LogisticConvergenceError(
            "fit_logistic: IRLS did not converge within max_iter",
            std::vector<double>(beta.data(), beta.data() + beta.size()));
    }

    LogisticModel model;
    model.coefficients.assign(beta.data(), beta.data() + beta.size());
    model.iterations = iterations;
    eta = X * beta;
    model.fitted.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        model.fitted[i] = 1.0 / (1.0 + std::exp(-eta(i)));
    }
    return model;
}

ProblemInstance build_german_instance(const std::vector<GermanRecord>& records,
                                      const std::vector<double>& probabilities,
                                      const GermanCosts& costs, double budget,
                                      const UtilitySpec& utility) {
    if (records.size() != probabilities.size()) {
        throw std::invalid_argument(
            "build_german_instance: records/probabilities length mismatch");
    }

    std::vector<double> targeted_values;
    long targeted_good = 0;
    long targeted_count = 0;
    for (std::size_t i = 0; i < records.size(); ++i) {
        if (records[i].owns_residence) continue;
        ++targeted_count;
        if (records[i].good) ++targeted_good;
        targeted_values.push_back(utility_from_repay_prob(utility, probabilities[i]));
    }
    if (targeted_count == 0) {
        throw std::invalid_argument("build_german_instance: no targeted records");
    }
    const double base_rate =
        static_cast<double>(targeted_good) / static_cast<double>(targeted_count);
    const double targeted_mu = utility_from_repay_prob(utility, base_rate);

    // Shared targeted posterior: empirical score distribution collapsed to at
    // most 201 quantile atoms.
    std::sort(targeted_values.begin(), targeted_values.end());
    constexpr std::size_t kMaxAtoms = 201;
    DiscreteDistribution post;
    const std::size_t nv = targeted_values.size();
    const std::size_t bins = std::min(kMaxAtoms, nv);
    std::size_t start = 0;
    for (std::size_t b = 0; b < bins; ++b) {
        const std::size_t stop = ((b + 1) * nv) / bins;
        if (stop == start) continue;
        StableSum s;
        for (std::size_t k = start; k < stop; ++k) s.add(targeted_values[k]);
        const double atom = s.get() / static_cast<double>(stop - start);
        const double prob = static_cast<double>(stop - start) / static_cast<double>(nv);
        if (!post.support.empty() && atom == post.support.back()) {
            post.probs.back() += prob;
        } else {
            post.support.push_back(atom);
            post.probs.push_back(prob);
        }
        start = stop;
    }

    // Recenter so the posterior mean equals mu exactly: multiplicative when
    // mu > 0, additive shift otherwise.
    const double m = post.mean();
    if (targeted_mu > 0.0 && m > 0.0) {
        const double scale = targeted_mu / m;
        for (double& s : post.support) s *= scale;
    } else {
        for (double& s : post.support) s += targeted_mu - m;
    }
    const double resid = targeted_mu - post.mean();
    if (resid != 0.0) {
        for (double& s : post.support) s += resid;
    }

    ProblemInstance inst;
    inst.num_groups = 2;
    inst.budget = budget;
    inst.utility = utility;
    inst.applicants.reserve(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        Applicant a;
        a.id = static_cast<int>(i);
        a.screen_cost = costs.screen;
        a.alloc_cost = costs.alloc;
        if (records[i].owns_residence) {
            a.group = 1;
            a.mu = utility_from_repay_prob(utility, probabilities[i]);
        } else {
            a.group = 0;
            a.mu = targeted_mu;
            a.posterior = post;
        }
        inst.applicants.push_back(std::move(a));
    }
    return inst;
}

} // namespace screenalloc
