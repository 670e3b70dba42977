#pragma once

// Per-link transmit power and target interference.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "jstpc/core_model.hpp"
#include "jstpc/hex_lattice.hpp"

namespace jstpc {

enum class PlannerMode { Proposed, MaxPower, MinInterference, Arbitrary };

inline const char* to_string(PlannerMode m) {
  switch (m) {
    case PlannerMode::Proposed: return "proposed";
    case PlannerMode::MaxPower: return "max_power";
    case PlannerMode::MinInterference: return "min_interference";
    case PlannerMode::Arbitrary: return "arbitrary";
  }
  return "?";
}

inline PlannerMode planner_mode_from_string(const std::string& s) {
  if (s == "proposed") return PlannerMode::Proposed;
  if (s == "max_power") return PlannerMode::MaxPower;
  if (s == "min_interference") return PlannerMode::MinInterference;
  if (s == "arbitrary") return PlannerMode::Arbitrary;
  throw std::invalid_argument("unknown planner mode '" + s + "'");
}

struct LinkPlan {
  int link_id = 0;
  double d_m = 0;
  double gamma_star_mw = 0;
  double i_target_mw = 0;
  double planned_sinr = 0;
  double planned_rate = 0;   // bit/s/Hz
  double energy_per_bit = 0;  // J/(bit/Hz), always-scheduled
  double e_hat = 0;           // theta * min E over the mode's candidates
  double theta = 1;
  double lambda = 0;          // mW^2
  double objective = 0;       // lattice area rate at the planned SINR, bit/s/Hz per m^2
  PlannerMode mode = PlannerMode::Proposed;
};

/// Planner settings that do not change per link.
struct PlannerConfig {
  int hyperbola_points = 400;
  int box_points = 200;  // per axis for the min-energy box search and Arbitrary mode
  std::uint64_t seed = 1;
  double box_tolerance = 1e-12;  // relative slack on box edges hit by rounding
};

/// Smallest source-i to destination-j distance for which i stays under j's target.
inline double min_separation(double gamma_i_mw, double i_target_j_mw, const RadioParams& p) {
  if (!(gamma_i_mw > 0) || !(i_target_j_mw > 0)) throw std::domain_error("min_separation: inputs must be positive");
  return std::pow(p.c * gamma_i_mw / i_target_j_mw, 1.0 / p.alpha);
}

inline double default_lambda(const RadioParams& p) { return p.gamma_max_mw * p.i_min_mw; }

inline std::vector<double> log_points(double lo, double hi, int n) {
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) out[i] = n == 1 ? lo : lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1));
  if (n > 1) out.back() = hi;
  return out;
}

namespace detail {

struct Candidate {
  double gamma;
  double itarget;
};

inline bool within(double v, double lo, double hi, double tol) { return v >= lo * (1 - tol) && v <= hi * (1 + tol); }

struct Evaluated {
  Candidate c;
  double sinr;
  double energy;
};

/// Applies box and SINR limits; remembers which filter emptied the set.
inline std::vector<Evaluated> screen(const std::vector<Candidate>& cands, double d, const RadioParams& p, double tol,
                                     std::string& violated) {
  std::vector<Evaluated> out;
  const double h = channel_gain(d, p);
  bool any_box = false, any_low = false;
  for (const auto& c : cands) {
    if (!within(c.gamma, p.gamma_min_mw, p.gamma_max_mw, tol) || !within(c.itarget, p.i_min_mw, p.i_max_mw, tol))
      continue;
    any_box = true;
    const double eta = c.gamma * h / c.itarget;
    if (eta < p.eta_min * (1 - tol)) continue;
    any_low = true;
    if (eta > p.eta_max * (1 + tol)) continue;
    out.push_back({c, eta, link_slot_power(true, c.gamma, p) / std::log2(1.0 + eta)});
  }
  if (out.empty()) violated = !any_box ? "box" : (!any_low ? "eta_min" : "eta_max");
  return out;
}

inline std::vector<Candidate> box_grid(const RadioParams& p, int n) {
  std::vector<Candidate> out;
  const auto gs = log_points(p.gamma_min_mw, p.gamma_max_mw, n);
  const auto is = log_points(p.i_min_mw, p.i_max_mw, n);
  out.reserve(gs.size() * is.size());
  for (double g : gs)
    for (double i : is) out.push_back({g, i});
  return out;
}

inline std::vector<Candidate> mode_candidates(PlannerMode mode, double lambda, const RadioParams& p,
                                              const PlannerConfig& cfg) {
  std::vector<Candidate> out;
  switch (mode) {
    case PlannerMode::Proposed:
      for (double g : log_points(p.gamma_min_mw, p.gamma_max_mw, cfg.hyperbola_points)) out.push_back({g, lambda / g});
      break;
    case PlannerMode::MaxPower:
      for (double i : log_points(p.i_min_mw, p.i_max_mw, cfg.hyperbola_points)) out.push_back({p.gamma_max_mw, i});
      break;
    case PlannerMode::MinInterference:
      for (double g : log_points(p.gamma_min_mw, p.gamma_max_mw, cfg.hyperbola_points)) out.push_back({g, p.i_min_mw});
      break;
    case PlannerMode::Arbitrary:
      out = box_grid(p, cfg.box_points);
      break;
  }
  return out;
}

}  // namespace detail

/// min over the (gamma, I~) log grid of (2Gc + g_a gamma) / log2(1 + c gamma d^-alpha / I~), no product constraint.
inline Feasible<double> min_energy_per_bit(double d, const RadioParams& p, const PlannerConfig& cfg = {}) {
  if (!(d > 0)) throw std::domain_error("min_energy_per_bit: distance must be positive");
  std::string why;
  const auto ok = detail::screen(detail::box_grid(p, cfg.box_points), d, p, cfg.box_tolerance, why);
  if (ok.empty()) return Feasible<double>::infeasible(why);
  double best = kInf;
  for (const auto& e : ok) best = std::min(best, e.energy);
  return {best, {}};
}

/// Area rate of an infinite lattice of links of length d all running at SINR eta.
inline double lattice_area_rate(double eta, double d, const LatticeInverseTable& table) {
  const double r = table.inverse(eta);
  return std::log2(1.0 + eta) / (1.5 * kSqrt3 * r * r) / (d * d);
}

/// Chooses (gamma*, I~*) for one link. The energy cap is theta times the
/// smallest energy per bit among the mode's own candidates.
inline Feasible<LinkPlan> plan_link(double d, double theta, double lambda, PlannerMode mode, const RadioParams& p,
                                    const LatticeInverseTable& table, const PlannerConfig& cfg = {}, int link_id = 0) {
  if (!(d > 0) || d > p.d_max_m * (1 + 1e-12)) throw std::domain_error("plan_link: distance outside (0, d_max]");
  if (!(theta >= 1)) throw std::invalid_argument("plan_link: theta must be >= 1");
  if (!(lambda > 0)) throw std::invalid_argument("plan_link: lambda must be positive");

  std::string why;
  const auto ok = detail::screen(detail::mode_candidates(mode, lambda, p, cfg), d, p, cfg.box_tolerance, why);
  if (ok.empty()) return Feasible<LinkPlan>::infeasible(why);
  double min_e = kInf;
  for (const auto& e : ok) min_e = std::min(min_e, e.energy);
  const double e_hat = theta * min_e;

  std::vector<const detail::Evaluated*> admissible;
  for (const auto& e : ok)
    if (e.energy <= e_hat) admissible.push_back(&e);
  if (admissible.empty()) return Feasible<LinkPlan>::infeasible("energy_per_bit");

  const detail::Evaluated* pick = nullptr;
  double best = -kInf;
  if (mode == PlannerMode::Arbitrary) {
    Rng rng = Rng::stream(cfg.seed, static_cast<std::uint64_t>(link_id) + 0x9e37);
    pick = admissible[rng.below(admissible.size())];
    best = lattice_area_rate(pick->sinr, d, table);
  } else {
    for (const auto* e : admissible) {
      const double v = lattice_area_rate(e->sinr, d, table);
      if (v > best) {  // strict: earlier (smaller power) candidates win ties
        best = v;
        pick = e;
      }
    }
  }

  LinkPlan plan;
  plan.link_id = link_id;
  plan.d_m = d;
  plan.gamma_star_mw = pick->c.gamma;
  plan.i_target_mw = pick->c.itarget;
  plan.planned_sinr = pick->sinr;
  plan.planned_rate = std::log2(1.0 + pick->sinr);
  plan.energy_per_bit = pick->energy;
  plan.e_hat = e_hat;
  plan.theta = theta;
  plan.lambda = mode == PlannerMode::Proposed ? lambda : pick->c.gamma * pick->c.itarget;
  plan.objective = best;
  plan.mode = mode;
  return {plan, {}};
}

/// Separation bound terms for scaled pairs (s1 gamma1, s1 I1) and (s2 gamma2, s2 I2).
struct EqualProductBound {
  double term12 = 0;  // (c gamma1' / I2')^(2/alpha)
  double term21 = 0;  // (c gamma2' / I1')^(2/alpha)
  double bound() const { return std::max(term12, term21); }
};

inline EqualProductBound equal_product_optimality(double gamma1, double i1, double gamma2, double i2, double scale1,
                                                  double scale2, const RadioParams& p) {
  if (!(gamma1 > 0 && i1 > 0 && gamma2 > 0 && i2 > 0 && scale1 > 0 && scale2 > 0))
    throw std::domain_error("equal_product_optimality: inputs must be positive");
  EqualProductBound b;
  b.term12 = std::pow(p.c * scale1 * gamma1 / (scale2 * i2), 2.0 / p.alpha);
  b.term21 = std::pow(p.c * scale2 * gamma2 / (scale1 * i1), 2.0 / p.alpha);
  return b;
}

/// Scale of the second pair that equalizes gamma * I with the first (first scale fixed to 1).
inline double equal_product_scale(double gamma1, double i1, double gamma2, double i2) {
  return std::sqrt(gamma1 * i1 / (gamma2 * i2));
}

}  // namespace jstpc
