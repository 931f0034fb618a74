#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include <Eigen/Dense>

namespace qivar {

// Inverse logit, clamped so the result stays strictly inside (0,1) in
// double precision even for very large |x|.
inline double expit(double x) {
    double p;
    if (x >= 0.0) {
        p = 1.0 / (1.0 + std::exp(-x));
    } else {
        const double e = std::exp(x);
        p = e / (1.0 + e);
    }
    const double hi = std::nextafter(1.0, 0.0);
    return std::clamp(p, std::numeric_limits<double>::min(), hi);
}

inline double logit(double p) { return std::log(p / (1.0 - p)); }

// log(1 + exp(x)) without overflow.
inline double log1pexp(double x) {
    if (x > 33.0) return x + std::exp(-x);
    if (x > 0.0) return x + std::log1p(std::exp(-x));
    return std::log1p(std::exp(x));
}

// Neumaier-compensated accumulator. The decomposition sums run over all
// patients in a fixed order; compensation keeps them stable independent
// of n.
class NeumaierSum {
public:
    void add(double x) {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x)) {
            comp_ += (sum_ - t) + x;
        } else {
            comp_ += (x - t) + sum_;
        }
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

inline double compensated_mean(const Eigen::VectorXd& v) {
    NeumaierSum s;
    for (Eigen::Index i = 0; i < v.size(); ++i) s.add(v[i]);
    return s.value() / static_cast<double>(v.size());
}

// Sample variance with a selectable divisor (n or n-1).
inline double sample_variance(const Eigen::VectorXd& v, bool unbiased) {
    const auto n = static_cast<double>(v.size());
    if (v.size() < 2) return 0.0;
    const double mean = compensated_mean(v);
    NeumaierSum ss;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        const double d = v[i] - mean;
        ss.add(d * d);
    }
    return ss.value() / (unbiased ? n - 1.0 : n);
}

// Empirical quantile with linear interpolation between order statistics
// (the same rule as R's default type 7): h = (n-1)p + 1 on sorted data.
inline double quantile_type7(const std::vector<double>& sorted, double p) {
    const std::size_t n = sorted.size();
    if (n == 0) return std::numeric_limits<double>::quiet_NaN();
    if (n == 1) return sorted[0];
    const double h = (static_cast<double>(n) - 1.0) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, n - 1);
    const double frac = h - std::floor(h);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

}  // namespace qivar
