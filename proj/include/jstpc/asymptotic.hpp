#pragma once

// Symmetric-lattice optimum: choose one transmit power and one cell size for
// every link to maximize rate per unit area under an energy-per-bit cap.

#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "jstpc/core_model.hpp"
#include "jstpc/hex_lattice.hpp"

namespace jstpc {

/// Brute-force search grid: log-spaced powers, linear cell radii (in units of d).
struct AsymptoticGrid {
  double d_m = 1.0;
  double gamma_lo_mw = 1.0;
  double gamma_hi_mw = 100.0;
  int gamma_points = 200;
  double rg_lo_over_d = 1.0;
  double rg_hi_over_d = 4.0;
  int rg_points = 300;
  bool refine = false;  // continuous polish after the grid; off keeps results bit-reproducible

  double gamma_at(int j) const {
    if (gamma_points == 1) return gamma_lo_mw;
    return gamma_lo_mw * std::pow(gamma_hi_mw / gamma_lo_mw, static_cast<double>(j) / (gamma_points - 1));
  }
  double rg_at(int i) const {
    if (rg_points == 1) return rg_lo_over_d * d_m;
    return d_m * (rg_lo_over_d + (rg_hi_over_d - rg_lo_over_d) * i / (rg_points - 1));
  }
  double rg_step_m() const { return rg_points > 1 ? d_m * (rg_hi_over_d - rg_lo_over_d) / (rg_points - 1) : 0.0; }

  void validate() const {
    if (!(d_m > 0) || gamma_points < 1 || rg_points < 1 || !(gamma_lo_mw > 0) || gamma_hi_mw < gamma_lo_mw ||
        !(rg_lo_over_d > 0) || rg_hi_over_d < rg_lo_over_d)
      throw std::invalid_argument("AsymptoticGrid: invalid ranges");
  }
};

struct AsymptoticSolution {
  double gamma_star_mw = 0;
  double rg_star_m = 0;
  double spectral_density = 0;  // bit/s/Hz per m^2
  double energy_per_bit = 0;    // J/(bit/Hz)
  double sinr = 0;
  int gamma_index = -1;
  int rg_index = -1;
};

/// (2 Gc + g_a gamma) / log2(1 + F).
inline double asymptotic_energy_per_bit(double gamma_mw, double rg_over_d, const HexLattice& lattice,
                                        const RadioParams& p) {
  return link_slot_power(true, gamma_mw, p) / std::log2(1.0 + lattice.F(rg_over_d));
}

inline double asymptotic_energy_per_bit(double gamma_mw, double rg_over_d, const RadioParams& p) {
  return asymptotic_energy_per_bit(gamma_mw, rg_over_d, HexLattice({p.alpha}), p);
}

/// Maximize a unimodal function on [a, b].
inline double golden_section_max(const std::function<double(double)>& f, double a, double b, double tol = 1e-10) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

/// Smallest r in [lo, hi] with pred(r) true, for a predicate monotone false->true.
inline double bisect_threshold(const std::function<bool(double)>& pred, double lo, double hi, double tol = 1e-12) {
  if (pred(lo)) return lo;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (pred(mid))
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

namespace detail {

inline AsymptoticSolution make_solution(double gamma, double rg, double d, const HexLattice& lattice,
                                        const RadioParams& p) {
  AsymptoticSolution s;
  s.gamma_star_mw = gamma;
  s.rg_star_m = rg;
  const double r = rg / d;
  s.sinr = lattice.F(r);
  s.spectral_density = lattice.G(r) / (d * d);
  s.energy_per_bit = link_slot_power(true, gamma, p) / std::log2(1.0 + s.sinr);
  return s;
}

inline Feasible<AsymptoticSolution> refine_solution(double e_hat, const RadioParams& p, const AsymptoticGrid& g,
                                                    const HexLattice& lattice) {
  const double d = g.d_m;
  const double lo = g.rg_lo_over_d, hi = g.rg_hi_over_d;
  const double gamma = g.gamma_lo_mw;
  auto feasible = [&](double r) {
    const double f = lattice.F(r);
    return f >= p.eta_min && link_slot_power(true, gamma, p) / std::log2(1.0 + f) <= e_hat;
  };
  if (!feasible(hi)) return Feasible<AsymptoticSolution>::infeasible("energy_per_bit/eta_min");
  const double bound = bisect_threshold(feasible, lo, hi);
  const double peak = golden_section_max([&](double r) { return lattice.G(r); }, lo, hi);
  const double r = std::max(bound, peak);
  return {detail::make_solution(gamma, r * d, d, lattice, p), {}};
}

}  // namespace detail

/// Grid-optimal (gamma, r_g) maximizing G(r_g/d)/d^2 s.t. E <= e_hat and F >= eta_min.
/// Ties resolve to the smaller r_g, then the smaller gamma.
inline Feasible<AsymptoticSolution> solve_asymptotic(double e_hat, const RadioParams& p, const AsymptoticGrid& g,
                                                     const HexLattice& lattice) {
  g.validate();
  if (g.refine) return detail::refine_solution(e_hat, p, g, lattice);

  bool any_sinr_ok = false;
  AsymptoticSolution best;
  double best_obj = -kInf;
  for (int i = 0; i < g.rg_points; ++i) {
    const double rg = g.rg_at(i);
    const double r = rg / g.d_m;
    const double f = lattice.F(r);
    if (f < p.eta_min) continue;
    any_sinr_ok = true;
    const double rate = std::log2(1.0 + f);
    const double obj = rate / (1.5 * kSqrt3 * r * r) / (g.d_m * g.d_m);
    for (int j = 0; j < g.gamma_points; ++j) {
      const double gamma = g.gamma_at(j);
      const double e = link_slot_power(true, gamma, p) / rate;
      if (e > e_hat) continue;
      if (obj > best_obj) {
        best_obj = obj;
        best.gamma_star_mw = gamma;
        best.rg_star_m = rg;
        best.sinr = f;
        best.spectral_density = obj;
        best.energy_per_bit = e;
        best.gamma_index = j;
        best.rg_index = i;
      }
    }
  }
  if (!any_sinr_ok) return Feasible<AsymptoticSolution>::infeasible("eta_min");
  if (best.rg_index < 0) return Feasible<AsymptoticSolution>::infeasible("energy_per_bit");
  return {best, {}};
}

inline Feasible<AsymptoticSolution> solve_asymptotic(double e_hat, const RadioParams& p, const AsymptoticGrid& g) {
  return solve_asymptotic(e_hat, p, g, HexLattice({p.alpha}));
}

// --- Lagrangian optimality check -------------------------------------------
//
// Maximize f(r_g) = G(r_g/d)/d^2 subject to
//   g1 = E(gamma, r_g) - e_hat <= 0,  g2 = eta_min - F(r_g/d) <= 0,
//   gamma_lo <= gamma <= gamma_hi.
// Stationarity: f_r - mu1 * dg1/dr_g - mu2 * dg2/dr_g = 0, and the gamma
// equation mu1 * dE/dgamma is absorbed by the multiplier of an active power bound.

struct KktResidual {
  double stationarity_rg = 0;
  double stationarity_gamma = 0;
  double slack_energy = 0;  // mu1 * g1
  double slack_sinr = 0;    // mu2 * g2
  double sign_violation = 0;
  double primal_violation = 0;
};

struct KktDerivatives {
  double f = 0, f_r = 0;
  double g1 = 0, g1_r = 0, g1_gamma = 0;
  double g2 = 0, g2_r = 0;
};

inline KktDerivatives kkt_derivatives(double rg, double gamma, double e_hat, double d, const HexLattice& lattice,
                                      const RadioParams& p) {
  KktDerivatives k;
  const double r = rg / d;
  const double f = lattice.F(r);
  const double df = lattice.dF(r);
  const double rate = std::log2(1.0 + f);
  const double power = link_slot_power(true, gamma, p);
  k.f = lattice.G(r) / (d * d);
  k.f_r = lattice.dG(r) / (d * d * d);
  k.g1 = power / rate - e_hat;
  k.g1_r = -power * df / (d * (1.0 + f) * std::log(2.0) * rate * rate);
  k.g1_gamma = p.amp_inverse_efficiency * 1e-3 / rate;
  k.g2 = p.eta_min - f;
  k.g2_r = -df / d;
  return k;
}

inline KktResidual kkt_residual(double rg, double gamma, double mu1, double mu2, double e_hat, double d,
                                double gamma_lo, double gamma_hi, const HexLattice& lattice, const RadioParams& p) {
  const KktDerivatives k = kkt_derivatives(rg, gamma, e_hat, d, lattice, p);
  KktResidual res;
  res.stationarity_rg = k.f_r - mu1 * k.g1_r - mu2 * k.g2_r;
  const double pull = mu1 * k.g1_gamma;  // must be balanced by a bound multiplier of the right sign
  const double span = gamma_hi - gamma_lo;
  const bool at_lo = gamma <= gamma_lo + 1e-12 * span;
  const bool at_hi = gamma >= gamma_hi - 1e-12 * span;
  if (at_lo)
    res.stationarity_gamma = std::min(0.0, pull);
  else if (at_hi)
    res.stationarity_gamma = std::max(0.0, pull);
  else
    res.stationarity_gamma = pull;
  res.slack_energy = mu1 * k.g1;
  res.slack_sinr = mu2 * k.g2;
  res.sign_violation = std::max(0.0, -mu1) + std::max(0.0, -mu2);
  res.primal_violation = std::max(0.0, k.g1) + std::max(0.0, k.g2);
  return res;
}

struct Multipliers {
  double mu1 = 0;
  double mu2 = 0;
  bool energy_active = false;
  bool sinr_active = false;
};

/// Least-squares multipliers over the constraints flagged active.
inline Multipliers fit_multipliers(const KktDerivatives& k, bool energy_active, bool sinr_active) {
  Multipliers m;
  m.energy_active = energy_active;
  m.sinr_active = sinr_active;
  const double a1 = energy_active ? k.g1_r : 0.0;
  const double a2 = sinr_active ? k.g2_r : 0.0;
  const double norm = a1 * a1 + a2 * a2;
  if (norm > 0) {
    m.mu1 = a1 * k.f_r / norm;
    m.mu2 = a2 * k.f_r / norm;
  }
  return m;
}

struct KktCheck {
  Multipliers multipliers;
  KktResidual residual;
  double tol_stationarity = 0;
  double tol_slack = 0;
  bool pass = false;
};

/// Evaluates optimality of a grid solution; tolerances scale with the r_g grid step.
inline KktCheck check_grid_optimum(const AsymptoticSolution& s, double e_hat, const AsymptoticGrid& g,
                                   const HexLattice& lattice, const RadioParams& p) {
  const double h = g.rg_step_m();
  const double d = g.d_m;
  const KktDerivatives k = kkt_derivatives(s.rg_star_m, s.gamma_star_mw, e_hat, d, lattice, p);
  const bool energy_active = std::abs(k.g1) <= std::abs(k.g1_r) * h * 1.0001;
  const bool sinr_active = std::abs(k.g2) <= std::abs(k.g2_r) * h * 1.0001;
  KktCheck out;
  out.multipliers = fit_multipliers(k, energy_active, sinr_active);
  out.residual = kkt_residual(s.rg_star_m, s.gamma_star_mw, out.multipliers.mu1, out.multipliers.mu2, e_hat, d,
                              g.gamma_lo_mw, g.gamma_hi_mw, lattice, p);
  const double step = std::max(h * 1e-2, 1e-9 * d);
  const double f_rr = (lattice.dG((s.rg_star_m + step) / d) - lattice.dG((s.rg_star_m - step) / d)) /
                      (2.0 * step) / (d * d * d);
  out.tol_stationarity = 2.0 * h * std::abs(f_rr) + 1e-12 * std::abs(k.f_r);
  out.tol_slack = 2.0 * h * std::abs(k.f_r) + 1e-15;
  const KktResidual& r = out.residual;
  out.pass = std::abs(r.stationarity_rg) <= out.tol_stationarity && r.stationarity_gamma == 0.0 &&
             std::abs(r.slack_energy) <= out.tol_slack && std::abs(r.slack_sinr) <= out.tol_slack &&
             r.sign_violation == 0.0 && r.primal_violation == 0.0;
  return out;
}

}  // namespace jstpc
