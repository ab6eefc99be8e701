#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "momentpde/polynomial.hpp"

namespace momentpde {

class SimulationError : public std::runtime_error {
 public:
  explicit SimulationError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Finite-volume trajectory of the scalar conservation law
///   dy/dt + d(y^2/2)/dx = u(t, x, y)
/// on a periodic spatial interval (t is the first problem coordinate, x the
/// second). Cell centers x_i = x_lo + (i + 1/2) dx.
struct GridSolution {
  int nx = 0;
  double x_lo = 0.0, x_hi = 1.0;
  double t0 = 0.0, t1 = 0.0;
  bool periodic = true;
  std::vector<double> times;               // accepted time levels
  std::vector<std::vector<double>> y;      // per time level
  std::vector<std::vector<double>> u;      // control record per time level
  int dt_halvings = 0;                     // CFL-driven step reductions

  double dx() const { return (x_hi - x_lo) / nx; }
  double cell_center(int i) const { return x_lo + (i + 0.5) * dx(); }

  /// Spatial integral of y^p at one time level (rectangle rule).
  double space_integral_pow(int level, int p) const;
};

struct SimOptions {
  int nx = 100;
  double dt = 0.01;
  double blowup_threshold = 1e6;
  int max_halvings = 12;
};

using InitialProfile = std::function<double(double)>;          // y0(x)
using Feedback = std::function<double(double, double, double)>;  // u(t, x, y)

/// Local Lax-Friedrichs (Rusanov) flux with forward Euler stepping and an
/// explicit source split for the control term. The time step halves until
/// the CFL number max|y| dt/dx stays at or below one; blow-up aborts with
/// the offending step index.
GridSolution simulate(const InitialProfile& y0, const Feedback& controller,
                      double t0, double t1, double x_lo, double x_hi,
                      const SimOptions& opts = {});

/// Quadrature of a polynomial running cost over the trajectory: rectangle
/// rule in space, trapezoid in time. The polynomial may reference x1 (time),
/// x2 (space), y1, and z1_2 (the space derivative, approximated by central
/// differences at reduced accuracy).
double functional_eval(const GridSolution& sol, const Polynomial& L);

}  // namespace momentpde
