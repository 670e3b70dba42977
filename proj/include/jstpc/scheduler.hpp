#pragma once

// Sequential greedy link scheduling in rounds: each round grants every link at
// most one more slot, always taking the (link, slot) whose admission packs the
// interference closest to the targets.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "jstpc/core_model.hpp"
#include "jstpc/link_planner.hpp"

namespace jstpc {

enum class ScheduleMode { Greedy, Random };

inline const char* to_string(ScheduleMode m) { return m == ScheduleMode::Greedy ? "greedy" : "random"; }

/// Everything the scheduler needs about a set of links. Index order is the tie-break order.
struct SchedulerProblem {
  std::size_t slots = 0;
  std::vector<double> gamma_star_mw;
  std::vector<double> i_target_mw;
  std::vector<double> planned_rate;  // bit/s/Hz while scheduled
  std::vector<double> r_hat;         // cap on the slot-averaged rate
  std::vector<double> floor_mw;      // interference assumed present at each destination regardless of the schedule
  Matrix<double> gains;              // gains(k, l): source of k to destination of l
  std::vector<std::vector<std::uint32_t>> conflicts;  // links sharing a node
  std::vector<std::uint8_t> schedulable;               // 0 for links whose slots are fixed elsewhere
  Matrix<std::uint8_t> fixed;                          // pre-occupied cells of non-schedulable links

  std::size_t link_count() const { return gamma_star_mw.size(); }

  void validate() const {
    const std::size_t L = link_count();
    if (i_target_mw.size() != L || planned_rate.size() != L || r_hat.size() != L || floor_mw.size() != L ||
        gains.rows() != L || gains.cols() != L || conflicts.size() != L || schedulable.size() != L ||
        fixed.rows() != L || fixed.cols() != slots)
      throw std::invalid_argument("SchedulerProblem: inconsistent sizes");
    for (std::size_t l = 0; l < L; ++l)
      if (!(gamma_star_mw[l] > 0) || !(i_target_mw[l] > 0) || floor_mw[l] < 0 || !(r_hat[l] > 0))
        throw std::invalid_argument("SchedulerProblem: bad link parameters");
  }

  /// Centralized problem: all links schedulable, zero floor unless given.
  static SchedulerProblem from_plans(const Topology& topo, const std::vector<LinkPlan>& plans, std::size_t slots,
                                     const std::vector<LinkDemand>& demands = {}, double floor_mw = 0.0) {
    const std::size_t L = topo.link_count();
    if (plans.size() != L) throw std::invalid_argument("from_plans: one plan per link required");
    SchedulerProblem s;
    s.slots = slots;
    s.gains = topo.gains;
    s.fixed = Matrix<std::uint8_t>(L, slots, 0);
    s.schedulable.assign(L, 1);
    s.floor_mw.assign(L, floor_mw);
    s.r_hat.assign(L, kInf);
    for (std::size_t l = 0; l < L; ++l) {
      s.gamma_star_mw.push_back(plans[l].gamma_star_mw);
      s.i_target_mw.push_back(plans[l].i_target_mw);
      s.planned_rate.push_back(std::log2(1.0 + plans[l].gamma_star_mw * topo.gains(l, l) / plans[l].i_target_mw));
      if (!demands.empty()) s.r_hat[l] = demands.at(l).r_hat;
    }
    s.conflicts.assign(L, {});
    for (std::size_t a = 0; a < L; ++a)
      for (std::size_t b = 0; b < L; ++b)
        if (a != b) {
          const Link &x = topo.links[a], &y = topo.links[b];
          if (x.source == y.source || x.source == y.dest || x.dest == y.source || x.dest == y.dest)
            s.conflicts[a].push_back(static_cast<std::uint32_t>(b));
        }
    return s;
  }
};

struct ScheduleLogRow {
  int round = 0;
  int step = 0;
  std::size_t link = 0;
  std::size_t slot = 0;
  double gamma_hat = 0;  // kInf when the slot was empty
  double i_hat = 0;
  double product = 0;
};

struct ScheduleMatrix {
  std::size_t links = 0;
  std::size_t slots = 0;
  Matrix<std::uint8_t> u;
  Matrix<double> gamma_mw;
  std::vector<ScheduleLogRow> log;
  int rounds = 0;
};

/// Mutable state of one schedule build.
class Scheduler {
 public:
  explicit Scheduler(SchedulerProblem problem) : p_(std::move(problem)) {
    p_.validate();
    L_ = p_.link_count();
    T_ = p_.slots;
    u_ = p_.fixed;
    count_.assign(L_, 0);
    in_round_.assign(L_, 0);
    iacc_.assign(T_ * L_, 0.0);
    ghat_.assign(T_ * L_, kInf);
    members_.assign(T_, {});
    for (std::size_t t = 0; t < T_; ++t) {
      for (std::size_t k = 0; k < L_; ++k)
        if (u_(k, t)) add_interference(k, t);
      refresh_gamma_hat(t);
    }
    col_val_.assign(T_, -1.0);
    col_link_.assign(T_, kNone);
    refresh_all_columns();
  }

  const SchedulerProblem& problem() const { return p_; }
  const Matrix<std::uint8_t>& u() const { return u_; }
  int round() const { return round_; }
  int step() const { return step_; }

  /// Average rate of link l over the horizon as scheduled so far.
  double rate(std::size_t l) const { return count_[l] * p_.planned_rate[l] / static_cast<double>(T_); }

  /// Largest power link l may use at slot t without pushing any scheduled link past its target.
  double max_allowed_power(std::size_t l, std::size_t t) const { return ghat_[t * L_ + l]; }

  /// Interference link l would see at slot t from what is already scheduled, plus its floor.
  double residual_interference(std::size_t l, std::size_t t) const { return iacc_[t * L_ + l] + p_.floor_mw[l]; }

  /// Admission rule with the rate cap evaluated after adding the candidate.
  bool feasible(std::size_t l, std::size_t t) const { return link_eligible(l) && cell_ok(l, t); }

  double product(std::size_t l, std::size_t t) const {
    const double gh = max_allowed_power(l, t);
    if (std::isinf(gh)) return 0.0;
    return (p_.gamma_star_mw[l] / gh) * (residual_interference(l, t) / p_.i_target_mw[l]);
  }

  /// Feasible (link, slot) with the largest product; ties go to the smaller link, then slot.
  std::optional<std::pair<std::size_t, std::size_t>> greedy_step() const {
    double best = -1.0;
    std::size_t bl = kNone, bt = kNone;
    for (std::size_t t = 0; t < T_; ++t) {
      if (col_link_[t] == kNone) continue;
      const double v = col_val_[t];
      if (v > best || (v == best && col_link_[t] < bl)) {
        best = v;
        bl = col_link_[t];
        bt = t;
      }
    }
    if (bl == kNone) return std::nullopt;
    return std::make_pair(bl, bt);
  }

  std::optional<std::pair<std::size_t, std::size_t>> random_step(Rng& rng) const {
    std::vector<std::pair<std::size_t, std::size_t>> pool;
    for (std::size_t l = 0; l < L_; ++l)
      if (link_eligible(l))
        for (std::size_t t = 0; t < T_; ++t)
          if (cell_ok(l, t)) pool.emplace_back(l, t);
    if (pool.empty()) return std::nullopt;
    return pool[rng.below(pool.size())];
  }

  /// Admits link l at slot t and logs the decision.
  void commit(std::size_t l, std::size_t t) {
    if (!feasible(l, t)) throw std::logic_error("Scheduler::commit: infeasible cell");
    log_.push_back({round_, step_, l, t, max_allowed_power(l, t), residual_interference(l, t), product(l, t)});
    ++step_;
    u_(l, t) = 1;
    ++count_[l];
    in_round_[l] = 1;
    add_interference(l, t);
    refresh_gamma_hat(t);
    refresh_column(t);
    for (std::size_t s = 0; s < T_; ++s)
      if (col_link_[s] == l) refresh_column(s);
  }

  /// Starts a new round; every link may again be granted one slot.
  void begin_round() {
    ++round_;
    std::fill(in_round_.begin(), in_round_.end(), 0);
    refresh_all_columns();
  }

  const std::vector<ScheduleLogRow>& log() const { return log_; }

 private:
  static constexpr std::size_t kNone = static_cast<std::size_t>(-1);

  bool link_eligible(std::size_t l) const {
    return p_.schedulable[l] && !in_round_[l] &&
           (count_[l] + 1) * p_.planned_rate[l] / static_cast<double>(T_) <= p_.r_hat[l];
  }

  bool cell_ok(std::size_t l, std::size_t t) const {
    if (u_(l, t)) return false;
    for (std::uint32_t c : p_.conflicts[l])
      if (u_(c, t)) return false;
    return max_allowed_power(l, t) >= p_.gamma_star_mw[l] && residual_interference(l, t) <= p_.i_target_mw[l];
  }

  void add_interference(std::size_t k, std::size_t t) {
    members_[t].push_back(static_cast<std::uint32_t>(k));
    double* row = &iacc_[t * L_];
    const double g = p_.gamma_star_mw[k];
    for (std::size_t l = 0; l < L_; ++l)
      if (l != k) row[l] += g * p_.gains(k, l);
  }

  void refresh_gamma_hat(std::size_t t) {
    double* gh = &ghat_[t * L_];
    std::fill(gh, gh + L_, kInf);
    for (std::uint32_t k : members_[t]) {
      const double margin = p_.i_target_mw[k] - iacc_[t * L_ + k] - p_.floor_mw[k];
      for (std::size_t l = 0; l < L_; ++l) {
        if (l == k) continue;
        const double h = p_.gains(l, k);
        const double v = margin / h;  // infinite gain (shared node) gives 0 or -0
        if (v < gh[l]) gh[l] = v;
      }
    }
  }

  void refresh_column(std::size_t t) {
    col_val_[t] = -1.0;
    col_link_[t] = kNone;
    for (std::size_t l = 0; l < L_; ++l) {
      if (!feasible(l, t)) continue;
      const double v = product(l, t);
      if (v > col_val_[t]) {
        col_val_[t] = v;
        col_link_[t] = l;
      }
    }
  }

  void refresh_all_columns() {
    for (std::size_t t = 0; t < T_; ++t) refresh_column(t);
  }

  SchedulerProblem p_;
  std::size_t L_ = 0, T_ = 0;
  Matrix<std::uint8_t> u_;
  std::vector<int> count_;
  std::vector<std::uint8_t> in_round_;
  std::vector<double> iacc_;  // [t * L + l]: interference at destination l from links scheduled at t
  std::vector<double> ghat_;  // [t * L + l]
  std::vector<std::vector<std::uint32_t>> members_;
  std::vector<double> col_val_;
  std::vector<std::size_t> col_link_;
  std::vector<ScheduleLogRow> log_;
  int round_ = 0;
  int step_ = 0;
};

/// Runs rounds until a round admits nothing.
inline ScheduleMatrix build_schedule(const SchedulerProblem& problem, ScheduleMode mode = ScheduleMode::Greedy,
                                     std::uint64_t seed = 0) {
  Scheduler s(problem);
  Rng rng = Rng::stream(seed, 0x5c4ed);
  int rounds = 0;
  for (;;) {
    int admitted = 0;
    for (;;) {
      auto pick = mode == ScheduleMode::Greedy ? s.greedy_step() : s.random_step(rng);
      if (!pick) break;
      s.commit(pick->first, pick->second);
      ++admitted;
    }
    if (admitted == 0) break;
    ++rounds;
    s.begin_round();
  }
  ScheduleMatrix out;
  out.links = problem.link_count();
  out.slots = problem.slots;
  out.u = s.u();
  out.gamma_mw = Matrix<double>(out.links, out.slots, 0.0);
  for (std::size_t l = 0; l < out.links; ++l)
    for (std::size_t t = 0; t < out.slots; ++t)
      if (out.u(l, t)) out.gamma_mw(l, t) = problem.gamma_star_mw[l];
  out.log = s.log();
  out.rounds = rounds;
  return out;
}

/// Recomputes every scheduled cell from scratch and reports target or cap violations.
struct ScheduleAudit {
  std::size_t target_violations = 0;
  std::size_t cap_violations = 0;
  std::size_t conflict_violations = 0;
  std::size_t duplicate_in_round = 0;
  double worst_ratio = 0;  // max over scheduled cells of (interference + floor) / target
  bool ok() const { return !target_violations && !cap_violations && !conflict_violations && !duplicate_in_round; }
};

inline ScheduleAudit audit_schedule(const SchedulerProblem& p, const ScheduleMatrix& m, double rel_tol = 1e-9) {
  ScheduleAudit a;
  const std::size_t L = p.link_count();
  for (std::size_t t = 0; t < p.slots; ++t) {
    // Links whose targets were already broken by the fixed cells alone are not the scheduler's doing.
    for (std::size_t l = 0; l < L; ++l) {
      if (!m.u(l, t)) continue;
      double inter = p.floor_mw[l], fixed_only = p.floor_mw[l];
      for (std::size_t k = 0; k < L; ++k) {
        if (k == l || !m.u(k, t)) continue;
        inter += p.gamma_star_mw[k] * p.gains(k, l);
        if (p.fixed(k, t)) fixed_only += p.gamma_star_mw[k] * p.gains(k, l);
      }
      const bool preexisting = p.fixed(l, t) && fixed_only > p.i_target_mw[l] * (1 + rel_tol);
      if (!preexisting) {
        a.worst_ratio = std::max(a.worst_ratio, inter / p.i_target_mw[l]);
        if (inter > p.i_target_mw[l] * (1 + rel_tol)) ++a.target_violations;
      }
      for (std::uint32_t c : p.conflicts[l])
        if (m.u(c, t) && p.schedulable[l]) ++a.conflict_violations;
    }
  }
  for (std::size_t l = 0; l < L; ++l) {
    if (!p.schedulable[l]) continue;
    std::size_t n = 0;
    for (std::size_t t = 0; t < p.slots; ++t) n += m.u(l, t);
    if (n * p.planned_rate[l] / static_cast<double>(p.slots) > p.r_hat[l] * (1 + rel_tol)) ++a.cap_violations;
  }
  std::vector<std::vector<int>> seen(static_cast<std::size_t>(m.rounds) + 1);
  for (const auto& row : m.log) {
    auto& v = seen.at(static_cast<std::size_t>(row.round));
    if (std::find(v.begin(), v.end(), static_cast<int>(row.link)) != v.end()) ++a.duplicate_in_round;
    v.push_back(static_cast<int>(row.link));
  }
  return a;
}

}  // namespace jstpc
