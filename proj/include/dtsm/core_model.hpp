#pragma once

#include <optional>
#include <vector>

#include "dtsm/math/piecewise_linear.hpp"

namespace dtsm::core {

/// A predictable time u_i at which default has conditional probability
/// mass gamma in (0,1), optionally announced at announce_time < u_i.
/// A missing announce time means the date is deterministic, i.e. known
/// from time 0.
struct RiskyTime {
    double time = 0.0;
    double gamma = 0.0;
    std::optional<double> announce_time;
};

/// Ordered set of risky times with disjoint supports.
class RiskySchedule {
  public:
    RiskySchedule() = default;
    explicit RiskySchedule(std::vector<RiskyTime> entries);

    std::size_t size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }
    const RiskyTime& operator[](std::size_t i) const { return entries_[i]; }
    auto begin() const { return entries_.begin(); }
    auto end() const { return entries_.end(); }

    /// Announcement time of entry i (0 for deterministic times).
    double announce_time(std::size_t i) const {
        return entries_[i].announce_time.value_or(0.0);
    }

  private:
    std::vector<RiskyTime> entries_;
};

/// Term structure with a continuous forward curve f(t,T) on a
/// time x maturity grid and atom premiums g(t,u_i) at the risky times.
/// Both arguments interpolate linearly; the maturity integral is the
/// exact integral of the interpolant (composite trapezoid on the grid).
class ForwardSurface {
  public:
    ForwardSurface(std::vector<double> time_grid, std::vector<double> maturity_grid,
                   std::vector<std::vector<double>> f, RiskySchedule schedule,
                   std::vector<std::vector<double>> g_atoms);

    double horizon() const { return maturity_grid_.back(); }
    const std::vector<double>& time_grid() const { return time_grid_; }
    const std::vector<double>& maturity_grid() const { return maturity_grid_; }
    const std::vector<std::vector<double>>& f_values() const { return f_; }
    const std::vector<std::vector<double>>& g_values() const { return g_; }
    const RiskySchedule& schedule() const { return schedule_; }

    /// f(t,u), bilinear.
    double f_at(double t, double u) const;

    /// Atom premium g(t, u_i) for schedule entry i, linear in t.
    double g_at(double t, std::size_t atom) const;

    /// Integral of u -> f(t,u) over [a,b].
    double integral_f(double t, double a, double b) const;

  private:
    std::vector<double> time_grid_;
    std::vector<double> maturity_grid_;
    std::vector<std::vector<double>> f_; // [time][maturity]
    std::vector<std::vector<double>> g_; // [atom][time]
    RiskySchedule schedule_;
};

/// Compensator specification: absolutely continuous hazard h plus the
/// atoms Gamma_i of the schedule.
class CompensatorSpec {
  public:
    CompensatorSpec(math::PiecewiseLinear hazard, RiskySchedule schedule);

    const math::PiecewiseLinear& hazard() const { return hazard_; }
    const RiskySchedule& schedule() const { return schedule_; }
    double horizon() const { return hazard_.domain_end(); }

  private:
    math::PiecewiseLinear hazard_;
    RiskySchedule schedule_;
};

/// Short rate on a grid; the numeraire is exp(integral of r).
class ShortRate {
  public:
    explicit ShortRate(math::PiecewiseLinear r) : r_(std::move(r)) {}

    double operator()(double t) const { return r_(t); }
    double integral(double a, double b) const { return r_.integral(a, b); }
    const math::PiecewiseLinear& curve() const { return r_; }

  private:
    math::PiecewiseLinear r_;
};

/// Zero-recovery bond price
///   P(t,T) = 1{not defaulted} exp(-int_t^T f(t,u) du - sum_{u_i in (t,T]} g(t,u_i)).
/// The atom at u_i contributes iff t < u_i <= T, so P(T,T) = 1 pre-default
/// and T -> P(t,T) is right-continuous with a drop of factor e^{-g} at u_i.
double bond_price(const ForwardSurface& surface, double t, double T, bool defaulted);

/// H^p(t) = int_0^t h ds + sum_{u_i <= t} Gamma_i, evaluated pre-default.
double compensator_path(const CompensatorSpec& spec, double t);

/// H'(t) = int_0^t h ds - sum_{u_i <= t} log(1 - Gamma_i).
double h_prime(const CompensatorSpec& spec, double t);

} // namespace dtsm::core
