#pragma once

#include <cmath>

namespace screenalloc {

/// Neumaier compensated accumulator. The solver tolerances (1e-9 on rows
/// whose magnitudes reach 1e5) leave little headroom for naive summation.
class StableSum {
public:
    void add(double v) {
        double t = sum_ + v;
        if (std::abs(sum_) >= std::abs(v)) {
            comp_ += (sum_ - t) + v;
        } else {
            comp_ += (v - t) + sum_;
        }
        sum_ = t;
    }

    double get() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

} // namespace screenalloc
