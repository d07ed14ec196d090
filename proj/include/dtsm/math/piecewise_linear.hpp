#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "dtsm/errors.hpp"

namespace dtsm::math {

/// Piecewise-linear function on a strictly increasing knot grid.
/// Evaluation outside the domain throws; integral(a,b) is exact.
class PiecewiseLinear {
  public:
    PiecewiseLinear() = default;

    PiecewiseLinear(std::vector<double> x, std::vector<double> y)
        : x_(std::move(x)), y_(std::move(y)) {
        require(x_.size() == y_.size(), "piecewise linear: size mismatch");
        require(x_.size() >= 2, "piecewise linear: need at least two knots");
        for (std::size_t i = 0; i < x_.size(); ++i) {
            require(std::isfinite(x_[i]) && std::isfinite(y_[i]),
                    "piecewise linear: non-finite knot");
            if (i > 0) require(x_[i] > x_[i - 1], "piecewise linear: knots not increasing");
        }
    }

    static PiecewiseLinear constant(double x0, double x1, double value) {
        return PiecewiseLinear({x0, x1}, {value, value});
    }

    double domain_begin() const { return x_.front(); }
    double domain_end() const { return x_.back(); }
    const std::vector<double>& knots() const { return x_; }
    const std::vector<double>& values() const { return y_; }

    double operator()(double t) const {
        require_range(t >= x_.front() && t <= x_.back(),
                      "piecewise linear: evaluation outside domain");
        const std::size_t i = cell(t);
        const double w = (t - x_[i]) / (x_[i + 1] - x_[i]);
        return y_[i] + w * (y_[i + 1] - y_[i]);
    }

    /// Exact integral over [a,b] within the domain.
    double integral(double a, double b) const {
        require_range(a >= x_.front() && b <= x_.back() && a <= b,
                      "piecewise linear: integration range outside domain");
        if (a == b) return 0.0;
        double total = 0.0;
        std::size_t i = cell(a);
        double lo = a;
        double flo = (*this)(a);
        while (lo < b) {
            const double hi = std::min(b, x_[i + 1]);
            const double fhi = hi == x_[i + 1] ? y_[i + 1] : (*this)(hi);
            total += 0.5 * (flo + fhi) * (hi - lo);
            lo = hi;
            flo = fhi;
            ++i;
        }
        return total;
    }

    /// Cumulative integral from the first knot to each knot.
    std::vector<double> cumulative() const {
        std::vector<double> c(x_.size(), 0.0);
        for (std::size_t i = 1; i < x_.size(); ++i)
            c[i] = c[i - 1] + 0.5 * (y_[i - 1] + y_[i]) * (x_[i] - x_[i - 1]);
        return c;
    }

    double min_value() const { return *std::min_element(y_.begin(), y_.end()); }

  private:
    // index i with x_[i] <= t, i < size-1
    std::size_t cell(double t) const {
        auto it = std::upper_bound(x_.begin(), x_.end(), t);
        std::size_t i = static_cast<std::size_t>(it - x_.begin());
        if (i > 0) --i;
        if (i >= x_.size() - 1) i = x_.size() - 2;
        return i;
    }

    std::vector<double> x_;
    std::vector<double> y_;
};

} // namespace dtsm::math
