#include "momentpde/simulate.hpp"

#include <algorithm>
#include <cmath>

namespace momentpde {

double GridSolution::space_integral_pow(int level, int p) const {
  double acc = 0.0;
  for (double v : y.at(level)) acc += std::pow(v, p);
  return acc * dx();
}

GridSolution simulate(const InitialProfile& y0, const Feedback& controller,
                      double t0, double t1, double x_lo, double x_hi,
                      const SimOptions& opts) {
  if (!(t1 > t0) || !(x_hi > x_lo) || opts.nx < 4)
    throw SimulationError("simulate: degenerate domain or grid");
  GridSolution sol;
  sol.nx = opts.nx;
  sol.x_lo = x_lo;
  sol.x_hi = x_hi;
  sol.t0 = t0;
  sol.t1 = t1;
  const double dx = sol.dx();

  std::vector<double> y(opts.nx), u(opts.nx, 0.0);
  for (int i = 0; i < opts.nx; ++i) y[i] = y0(sol.cell_center(i));

  double dt = opts.dt;
  {
    double a0 = 0.0;
    for (double v : y) a0 = std::max(a0, std::abs(v));
    while (a0 * dt / dx > 1.0 && sol.dt_halvings < opts.max_halvings) {
      dt *= 0.5;
      ++sol.dt_halvings;
    }
  }

  auto record = [&](double t) {
    sol.times.push_back(t);
    sol.y.push_back(y);
    sol.u.push_back(u);
  };

  double t = t0;
  if (controller)
    for (int i = 0; i < opts.nx; ++i) u[i] = controller(t, sol.cell_center(i), y[i]);
  record(t);

  std::vector<double> ynew(opts.nx);
  long step = 0;
  while (t < t1 - 1e-12) {
    double amax = 0.0;
    for (double v : y) amax = std::max(amax, std::abs(v));
    while (amax * dt / dx > 1.0 && sol.dt_halvings < opts.max_halvings) {
      dt *= 0.5;
      ++sol.dt_halvings;
    }
    if (amax * dt / dx > 1.0)
      throw SimulationError("simulate: CFL condition unattainable at step " +
                            std::to_string(step));
    const double h = std::min(dt, t1 - t);

    if (controller)
      for (int i = 0; i < opts.nx; ++i) u[i] = controller(t, sol.cell_center(i), y[i]);
    else
      std::fill(u.begin(), u.end(), 0.0);

    // Rusanov flux at every interface, periodic wrap.
    for (int i = 0; i < opts.nx; ++i) {
      const int im = (i - 1 + opts.nx) % opts.nx;
      const int ip = (i + 1) % opts.nx;
      auto flux = [&](double a, double b) {
        const double speed = std::max(std::abs(a), std::abs(b));
        return 0.5 * (0.5 * a * a + 0.5 * b * b) - 0.5 * speed * (b - a);
      };
      const double f_right = flux(y[i], y[ip]);
      const double f_left = flux(y[im], y[i]);
      ynew[i] = y[i] - h / dx * (f_right - f_left) + h * u[i];
    }
    y.swap(ynew);
    t += h;
    ++step;
    for (double v : y)
      if (!(std::abs(v) < opts.blowup_threshold))
        throw SimulationError("simulate: blow-up at step " + std::to_string(step));
    record(t);
  }
  return sol;
}

double functional_eval(const GridSolution& sol, const Polynomial& L) {
  const auto& space = L.space();
  const int vx1 = space->find_var("x1");
  const int vx2 = space->find_var("x2");
  const int vy = space->find_var("y1");
  const int vz = space->find_var("z1_2");
  const bool needs_z = vz >= 0 && L.depends_on(vz);

  const double dx = sol.dx();
  std::vector<double> point(space->dim(), 0.0);
  std::vector<double> level_values(sol.times.size());
  for (std::size_t t = 0; t < sol.times.size(); ++t) {
    const auto& y = sol.y[t];
    double acc = 0.0;
    for (int i = 0; i < sol.nx; ++i) {
      if (vx1 >= 0) point[vx1] = sol.times[t];
      if (vx2 >= 0) point[vx2] = sol.cell_center(i);
      if (vy >= 0) point[vy] = y[i];
      if (needs_z) {
        const int im = (i - 1 + sol.nx) % sol.nx;
        const int ip = (i + 1) % sol.nx;
        point[vz] = (y[ip] - y[im]) / (2.0 * dx);
      }
      acc += L.eval(point);
    }
    level_values[t] = acc * dx;
  }
  // Trapezoid in time over the recorded (possibly uneven) levels.
  double total = 0.0;
  for (std::size_t t = 0; t + 1 < sol.times.size(); ++t)
    total += 0.5 * (level_values[t] + level_values[t + 1]) *
             (sol.times[t + 1] - sol.times[t]);
  return total;
}

}  // namespace momentpde
