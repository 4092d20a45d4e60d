#pragma once
#include <cmath>
#include <cstddef>
#include <span>

namespace rhls {

// Neumaier-compensated accumulator; result depends only on the order of add() calls.
class CompensatedSum {
public:
    void add(double x) {
        const double t = sum_ + x;
        if (std::fabs(sum_) >= std::fabs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

// Pairwise over blocks of 64, compensated within blocks.
double stable_sum(std::span<const double> xs);

// sum_i a[i] * b[i] with the same reduction tree as stable_sum.
double stable_dot(std::span<const double> a, std::span<const double> b);

} // namespace rhls
