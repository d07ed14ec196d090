#include "dtsm/core_model.hpp"

#include <algorithm>
#include <cmath>

#include "dtsm/errors.hpp"

namespace dtsm::core {

RiskySchedule::RiskySchedule(std::vector<RiskyTime> entries) : entries_(std::move(entries)) {
    double prev = -1.0;
    for (const auto& e : entries_) {
        require(std::isfinite(e.time) && e.time >= 0.0, "risky time must be non-negative");
        require(e.gamma > 0.0 && e.gamma < 1.0, "gamma must lie in (0,1)");
        require(e.time > prev, "risky times must be strictly increasing");
        if (e.announce_time)
            require(*e.announce_time >= 0.0 && *e.announce_time < e.time,
                    "announce time must precede the risky time");
        prev = e.time;
    }
}

namespace {

void check_grid(const std::vector<double>& g, const char* name) {
    require(g.size() >= 2, std::string(name) + ": need at least two nodes");
    for (std::size_t i = 0; i < g.size(); ++i) {
        require(std::isfinite(g[i]), std::string(name) + ": non-finite node");
        if (i > 0) require(g[i] > g[i - 1], std::string(name) + ": not strictly increasing");
    }
}

// linear interpolation weight and cell on a grid
struct Cell {
    std::size_t i;
    double w;
};

Cell locate(const std::vector<double>& grid, double x) {
    auto it = std::upper_bound(grid.begin(), grid.end(), x);
    std::size_t i = static_cast<std::size_t>(it - grid.begin());
    if (i > 0) --i;
    if (i >= grid.size() - 1) i = grid.size() - 2;
    return {i, (x - grid[i]) / (grid[i + 1] - grid[i])};
}

} // namespace

ForwardSurface::ForwardSurface(std::vector<double> time_grid, std::vector<double> maturity_grid,
                               std::vector<std::vector<double>> f, RiskySchedule schedule,
                               std::vector<std::vector<double>> g_atoms)
    : time_grid_(std::move(time_grid)), maturity_grid_(std::move(maturity_grid)),
      f_(std::move(f)), g_(std::move(g_atoms)), schedule_(std::move(schedule)) {
    check_grid(time_grid_, "time grid");
    check_grid(maturity_grid_, "maturity grid");
    require(f_.size() == time_grid_.size(), "f rows must match the time grid");
    for (const auto& row : f_) {
        require(row.size() == maturity_grid_.size(), "f row must match the maturity grid");
        for (double v : row) require(std::isfinite(v), "f must be finite");
    }
    require(g_.size() == schedule_.size(), "atom columns must be keyed by the schedule");
    for (const auto& col : g_) {
        require(col.size() == time_grid_.size(), "g column must match the time grid");
        for (double v : col) require(std::isfinite(v), "g must be finite");
    }
    for (const auto& e : schedule_)
        require(e.time <= maturity_grid_.back(), "risky time beyond the horizon");
}

double ForwardSurface::f_at(double t, double u) const {
    require_range(t >= time_grid_.front() && t <= time_grid_.back(), "t outside the time grid");
    require_range(u >= maturity_grid_.front() && u <= maturity_grid_.back(),
                  "maturity outside the grid");
    const Cell ct = locate(time_grid_, t);
    const Cell cu = locate(maturity_grid_, u);
    const double f0 = f_[ct.i][cu.i] + cu.w * (f_[ct.i][cu.i + 1] - f_[ct.i][cu.i]);
    const double f1 = f_[ct.i + 1][cu.i] + cu.w * (f_[ct.i + 1][cu.i + 1] - f_[ct.i + 1][cu.i]);
    return f0 + ct.w * (f1 - f0);
}

double ForwardSurface::g_at(double t, std::size_t atom) const {
    require_range(atom < g_.size(), "atom index out of range");
    require_range(t >= time_grid_.front() && t <= time_grid_.back(), "t outside the time grid");
    const Cell ct = locate(time_grid_, t);
    return g_[atom][ct.i] + ct.w * (g_[atom][ct.i + 1] - g_[atom][ct.i]);
}

double ForwardSurface::integral_f(double t, double a, double b) const {
    require_range(a <= b, "empty integration range expected a <= b");
    if (a == b) return 0.0;
    const Cell ct = locate(time_grid_, t);
    auto row_at = [&](std::size_t j) {
        return f_[ct.i][j] + ct.w * (f_[ct.i + 1][j] - f_[ct.i][j]);
    };
    auto value_at = [&](double u) {
        const Cell cu = locate(maturity_grid_, u);
        const double lo = row_at(cu.i);
        return lo + cu.w * (row_at(cu.i + 1) - lo);
    };
    double total = 0.0;
    Cell c = locate(maturity_grid_, a);
    double lo = a;
    double flo = value_at(a);
    std::size_t i = c.i;
    while (lo < b) {
        const double hi = std::min(b, maturity_grid_[i + 1]);
        const double fhi = value_at(hi);
        total += 0.5 * (flo + fhi) * (hi - lo);
        lo = hi;
        flo = fhi;
        ++i;
    }
    return total;
}

double bond_price(const ForwardSurface& surface, double t, double T, bool defaulted) {
    require_range(T >= t, "bond price needs t <= T");
    require_range(t >= 0.0 && T <= surface.horizon(), "(t,T) outside [0,T*]");
    if (defaulted) return 0.0;
    double log_p = -surface.integral_f(t, t, T);
    const auto& schedule = surface.schedule();
    for (std::size_t i = 0; i < schedule.size(); ++i) {
        const double u = schedule[i].time;
        if (u > t && u <= T) log_p -= surface.g_at(t, i);
    }
    return std::exp(log_p);
}

CompensatorSpec::CompensatorSpec(math::PiecewiseLinear hazard, RiskySchedule schedule)
    : hazard_(std::move(hazard)), schedule_(std::move(schedule)) {
    require(hazard_.domain_begin() == 0.0, "hazard grid must start at 0");
    require(hazard_.min_value() >= 0.0, "hazard must be non-negative");
    for (const auto& e : schedule_)
        require(e.time <= hazard_.domain_end(), "risky time beyond the hazard horizon");
}

double compensator_path(const CompensatorSpec& spec, double t) {
    require_range(t >= 0.0 && t <= spec.horizon(), "t outside [0,T*]");
    double value = spec.hazard().integral(0.0, t);
    for (const auto& e : spec.schedule())
        if (e.time <= t) value += e.gamma;
    return value;
}

double h_prime(const CompensatorSpec& spec, double t) {
    require_range(t >= 0.0 && t <= spec.horizon(), "t outside [0,T*]");
    double value = spec.hazard().integral(0.0, t);
    for (const auto& e : spec.schedule()) {
        require(e.gamma < 1.0, "gamma must be below 1");
        if (e.time <= t) value -= std::log1p(-e.gamma);
    }
    return value;
}

} // namespace dtsm::core
