#pragma once

// Slotted simulator of the coordinator-based MAC: requests in contention
// slots, per-cell scheduling slots in color order, then contention-free data
// slots checked against the full network's interference.

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "jstpc/cell_grid.hpp"
#include "jstpc/core_model.hpp"
#include "jstpc/hex_lattice.hpp"
#include "jstpc/link_planner.hpp"
#include "jstpc/metrics.hpp"
#include "jstpc/scheduler.hpp"
#include "jstpc/trace.hpp"

namespace jstpc {

struct FrameConfig {
  double slot_s = 1e-3;
  int contention_slots = 3;
  int scheduling_slots = 7;
  int data_slots = 90;
  double signaling_rate_bps = 6e6;
  int request_bits = 160;
  int entry_bits = 200;
  double data_packet_bits = 8000;  // unit of Poisson arrivals
  int cw_min = 15;
  int cw_max = 1023;
  double minislot_s = 20e-6;
  double sifs_s = 10e-6;
  double preamble_s = 72e-6;
  double request_cs_threshold_mw = dbm_to_mw(-82.0);

  int slots_per_frame() const { return contention_slots + scheduling_slots + data_slots; }
  double frame_s() const { return slot_s * slots_per_frame(); }
  double data_fraction() const { return static_cast<double>(data_slots) / slots_per_frame(); }
  /// Entries per scheduling packet; an entry carries one link's slot set for the frame.
  int entry_capacity() const { return static_cast<int>(std::floor(slot_s * signaling_rate_bps / entry_bits + 1e-9)); }
  int request_minislots() const {
    return static_cast<int>(std::ceil((preamble_s + request_bits / signaling_rate_bps + sifs_s) / minislot_s - 1e-9));
  }

  void validate() const {
    if (!(slot_s > 0) || contention_slots < 0 || scheduling_slots < 1 || data_slots < 1)
      throw std::invalid_argument("FrameConfig: slot counts and duration must be positive");
    if (scheduling_slots < 7) throw std::invalid_argument("FrameConfig: seven scheduling slots are needed for the coloring");
    if (!(signaling_rate_bps > 0) || request_bits <= 0 || entry_bits <= 0 || !(data_packet_bits > 0))
      throw std::invalid_argument("FrameConfig: packet sizes and rates must be positive");
    if (cw_min < 1 || cw_max < cw_min) throw std::invalid_argument("FrameConfig: need 1 <= CW_min <= CW_max");
    if (!(minislot_s > 0) || sifs_s < 0 || preamble_s < 0) throw std::invalid_argument("FrameConfig: bad timing");
    if (entry_capacity() < 1) throw std::invalid_argument("FrameConfig: scheduling packet holds no entry");
  }
};

struct SimScenario {
  RadioParams radio;
  FrameConfig frame;
  int nodes = 100;
  double rg_m = 20.0;
  int rings = 2;
  double ra_factor = 1.5;
  bool saturated = true;
  double load_bps = 0;  // aggregate over the network, split evenly
  bool mobile = false;
  double speed_max_mps = 2.0;
  double report_period_s = 1.0;
  double duration_s = 5.0;
  std::uint64_t seed = 1;
  double theta = kInf;
  double lambda = 0;  // 0 selects gamma_max * I_min
  PlannerMode planner = PlannerMode::Proposed;
  ScheduleMode scheduler = ScheduleMode::Greedy;
  double floor_scale = 0.05;  // multiplies the worst-case remote floor
  std::vector<Vec2> positions;   // optional fixed placement; overrides `nodes`
  std::vector<int> destinations;  // optional, parallel to positions; -1 for none
  bool record_tx = false;
  bool audit = false;

  CellGrid grid() const { return CellGrid(rg_m, rings, ra_factor); }
  int frames() const { return static_cast<int>(std::llround(duration_s / frame.frame_s())); }
  int node_count() const { return positions.empty() ? nodes : static_cast<int>(positions.size()); }
  double effective_lambda() const { return lambda > 0 ? lambda : default_lambda(radio); }

  void validate() const {
    radio.validate();
    frame.validate();
    if (nodes < 0) throw std::invalid_argument("SimScenario: negative node count");
    if (!destinations.empty() && destinations.size() != positions.size())
      throw std::invalid_argument("SimScenario: destinations must parallel positions");
    if (rg_m < radio.d_max_m) throw std::invalid_argument("SimScenario: r_g must be at least d_max");
    if (ra_factor < 1.0) throw std::invalid_argument("SimScenario: r_a must be at least r_g");
    if (rings < 0) throw std::invalid_argument("SimScenario: negative ring count");
    if (!(duration_s > 0) || frames() < 1) throw std::invalid_argument("SimScenario: duration shorter than a frame");
    if (!saturated && load_bps < 0) throw std::invalid_argument("SimScenario: negative load");
    if (speed_max_mps < 0 || !(report_period_s > 0)) throw std::invalid_argument("SimScenario: bad mobility");
    if (!(theta >= 1)) throw std::invalid_argument("SimScenario: theta must be >= 1");
    if (lambda < 0) throw std::invalid_argument("SimScenario: negative lambda");
    if (floor_scale < 0) throw std::invalid_argument("SimScenario: negative floor scale");
  }
};

/// One inverse table per path-loss exponent, built on first use.
inline const LatticeInverseTable& shared_lattice_table(double alpha) {
  static std::mutex mu;
  static std::map<double, std::unique_ptr<LatticeInverseTable>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[alpha];
  if (!slot) {
    LatticeConfig cfg;
    cfg.alpha = alpha;
    slot = std::make_unique<LatticeInverseTable>(HexLattice(cfg));
  }
  return *slot;
}

/// Mobile nodes, their destinations and traffic queues. Shared by both MACs.
class Population {
 public:
  Population(const SimScenario& s, const CellGrid& grid)
      : s_(s), grid_(grid), placement_(Rng::stream(s.seed, 1)), motion_(Rng::stream(s.seed, 2)),
        pick_(Rng::stream(s.seed, 3)), traffic_(Rng::stream(s.seed, 4)) {
    const auto n = static_cast<std::size_t>(s.node_count());
    pos.resize(n);
    vel.assign(n, {0, 0});
    dest.assign(n, -1);
    epoch.assign(n, 0);
    queue.assign(n, 0.0);
    if (!s.positions.empty()) {
      pos = s.positions;
      for (const auto& p : pos)
        if (!grid.contains(p)) throw std::invalid_argument("SimScenario: fixed position outside the layout");
    } else {
      for (auto& p : pos) p = grid.random_point(placement_);
    }
    if (s.mobile)
      for (auto& v : vel) {
        const double speed = motion_.uniform(0, s.speed_max_mps), phi = motion_.uniform(-kPi, kPi);
        v = {speed * std::cos(phi), speed * std::sin(phi)};
      }
  }

  std::size_t size() const { return pos.size(); }
  double link_distance(std::size_t i) const { return distance(pos[i], pos[static_cast<std::size_t>(dest[i])]); }

  /// Uniform destination among nodes within d_max that `accept` admits; -1 if none.
  template <class Accept>
  void choose_destination(std::size_t i, Accept accept) {
    std::vector<int> cand;
    for (std::size_t j = 0; j < size(); ++j) {
      if (j == i) continue;
      const double d = distance(pos[i], pos[j]);
      if (d > 0 && d <= s_.radio.d_max_m) cand.push_back(static_cast<int>(j));
    }
    const int old = dest[i];
    dest[i] = -1;
    while (!cand.empty()) {
      const std::size_t k = pick_.below(cand.size());
      if (accept(i, static_cast<std::size_t>(cand[k]))) {
        dest[i] = cand[k];
        break;
      }
      cand.erase(cand.begin() + static_cast<std::ptrdiff_t>(k));
    }
    if (dest[i] != old) ++epoch[i];
  }

  /// Straight-line motion; a node that would leave the layout reverses instead.
  void move(double dt) {
    for (std::size_t i = 0; i < size(); ++i) {
      const Vec2 next{pos[i].x + vel[i].x * dt, pos[i].y + vel[i].y * dt};
      if (grid_.contains(next))
        pos[i] = next;
      else
        vel[i] = {-vel[i].x, -vel[i].y};
    }
  }

  /// Adds this period's arrivals; saturated sources are topped up to `saturated_fill`. Returns bits added.
  double arrivals(std::size_t i, double dt, double saturated_fill) {
    double add = 0;
    if (s_.saturated) {
      add = std::max(0.0, saturated_fill - queue[i]);
    } else if (s_.load_bps > 0 && s_.node_count() > 0) {
      const double per_node = s_.load_bps / s_.node_count();
      add = static_cast<double>(traffic_.poisson(per_node * dt / s_.frame.data_packet_bits)) * s_.frame.data_packet_bits;
    }
    queue[i] += add;
    return add;
  }

  std::vector<Vec2> pos;
  std::vector<Vec2> vel;
  std::vector<int> dest;
  std::vector<int> epoch;  // bumps whenever the destination changes
  std::vector<double> queue;

 private:
  const SimScenario& s_;
  const CellGrid& grid_;
  Rng placement_, motion_, pick_, traffic_;
};

/// What a coordinator knows about one link when it schedules.
struct ViewRecord {
  int source = 0;
  int dest = 0;
  Vec2 src_pos;
  Vec2 dst_pos;
  double gamma_mw = 0;
  double i_target_mw = 0;
  double planned_rate = 0;
  std::vector<std::uint8_t> slots;  // already-announced data slots (foreign links)
  double queued_bits = 0;           // own links only
  bool own = false;
};

struct CoordinatorView {
  int coordinator = 0;
  std::vector<ViewRecord> links;
};

/// Scheduler input for a coordinator's view: own links schedulable, foreign ones fixed.
inline SchedulerProblem view_problem(const CoordinatorView& v, std::size_t slots, double floor_mw,
                                     double bits_per_rate_slot, const RadioParams& p) {
  const std::size_t L = v.links.size();
  SchedulerProblem s;
  s.slots = slots;
  s.gains = Matrix<double>(L, L);
  s.fixed = Matrix<std::uint8_t>(L, slots, 0);
  s.conflicts.assign(L, {});
  for (std::size_t k = 0; k < L; ++k) {
    const auto& a = v.links[k];
    s.gamma_star_mw.push_back(a.gamma_mw);
    s.i_target_mw.push_back(a.i_target_mw);
    s.planned_rate.push_back(a.planned_rate);
    s.floor_mw.push_back(floor_mw);
    s.schedulable.push_back(a.own ? 1 : 0);
    double cap = kInf;
    if (a.own && std::isfinite(a.queued_bits)) {
      const double need = std::ceil(a.queued_bits / (a.planned_rate * bits_per_rate_slot) - 1e-9);
      cap = std::max(need, 0.0) * a.planned_rate / static_cast<double>(slots) * (1 + 1e-12);
    }
    s.r_hat.push_back(cap);
    if (!a.own)
      for (std::size_t t = 0; t < slots; ++t) s.fixed(k, t) = a.slots.at(t);
    for (std::size_t l = 0; l < L; ++l) {
      s.gains(k, l) = channel_gain_or_inf(distance(a.src_pos, v.links[l].dst_pos), p);
      const auto& b = v.links[l];
      if (k != l && (a.source == b.source || a.source == b.dest || a.dest == b.source || a.dest == b.dest))
        s.conflicts[k].push_back(static_cast<std::uint32_t>(l));
    }
  }
  return s;
}

struct SimResult {
  Trace trace;
  MetricsReport inner;  // 7 central cells
  MetricsReport all;    // whole layout
  double floor_mw = 0;
  double max_g = 0;
  long long audit_violations = 0;
  long long deferred_entries = 0;
  int max_entries = 0;  // largest scheduling packet sent
  long long duplex_failures = 0;

  double success_ratio() const { return all.success_ratio(); }
};

class MacSimulator {
 public:
  explicit MacSimulator(SimScenario s)
      : s_(std::move(s)), grid_((s_.validate(), s_.grid())), colors_(assign_scheduling_colors(grid_)),
        table_(shared_lattice_table(s_.radio.alpha)), pop_(s_, grid_), contention_rng_(Rng::stream(s_.seed, 5)) {
    const auto n = pop_.size();
    need_request_.assign(n, 1);
    cw_.assign(n, s_.frame.cw_min);
    registered_.assign(n, -1);
    coord_backlog_.assign(n, 0.0);
    records_.assign(grid_.size(), {});
    floor_mw_ = s_.floor_scale * remote_interference_floor(grid_.d0(), grid_.rg(), s_.radio) + s_.radio.n0_mw;
    for (std::size_t i = 0; i < n; ++i) {
      if (s_.destinations.empty()) {
        pick_destination(i);
        continue;
      }
      const int j = s_.destinations[i];
      if (j >= 0 && (static_cast<std::size_t>(j) >= n || static_cast<std::size_t>(j) == i))
        throw std::invalid_argument("SimScenario: bad destination index");
      pop_.dest[i] = j;
      if (j >= 0 && !plan_for(pop_.link_distance(i), i, 0)) pop_.dest[i] = -1;
      need_request_[i] = pop_.dest[i] >= 0;
    }
  }

  const CellGrid& grid() const { return grid_; }
  double floor_mw() const { return floor_mw_; }

  SimResult run() {
    SimResult out;
    Trace& tr = out.trace;
    const auto& fc = s_.frame;
    tr.scheme = scheme_name();
    tr.slot_s = fc.slot_s;
    tr.energy_slot_s = fc.slot_s;
    tr.data_fraction = fc.data_fraction();
    tr.bandwidth_hz = s_.radio.bandwidth_hz;
    const int frames = s_.frames();
    tr.frames = frames;
    tr.duration_s = frames * fc.frame_s();
    const int report_every = std::max(1, static_cast<int>(std::llround(s_.report_period_s / fc.frame_s())));
    const std::size_t n = pop_.size(), total = n + grid_.size();
    const int spf = fc.slots_per_frame();

    for (int f = 0; f < frames; ++f) {
      FrameRow fr;
      fr.frame = f;
      awake_.assign(total, std::vector<std::uint8_t>(static_cast<std::size_t>(spf), 0));
      amp_j_.assign(total, 0.0);
      data_amp_j_.assign(total, 0.0);
      for (std::size_t c = 0; c < grid_.size(); ++c) std::fill(awake_[n + c].begin(), awake_[n + c].end(), 1);
      std::vector<int> cell_now(n);
      for (std::size_t i = 0; i < n; ++i) cell_now[i] = grid_.cell_of(pop_.pos[i]);

      // Traffic arrives over the frame; saturated queues hold one full frame of data.
      const double fill = fc.data_slots * full_slot_bits();
      for (std::size_t i = 0; i < n; ++i) {
        tr.generated_bits += pop_.arrivals(i, fc.frame_s(), fill);
        if (!s_.saturated && pop_.dest[i] >= 0 && pop_.queue[i] > 0 && coord_backlog_[i] <= 0) need_request_[i] = 1;
      }

      contention(fr);
      frame_entries_.clear();
      for (int color = 0; color < 7; ++color)
        for (std::size_t c = 0; c < grid_.size(); ++c)
          if (colors_[c] == color) schedule_cell(f, c, out);
      // Nodes listen to their own cell's scheduling slot.
      for (std::size_t i = 0; i < n; ++i)
        if (cell_now[i] >= 0)
          awake_[i][static_cast<std::size_t>(fc.contention_slots + colors_[static_cast<std::size_t>(cell_now[i])])] = 1;

      std::vector<LinkFrameRow> rows(n);
      for (std::size_t i = 0; i < n; ++i) {
        rows[i].frame = f;
        rows[i].source = static_cast<int>(i);
        rows[i].dest = pop_.dest[i];
        rows[i].source_cell = cell_now[i];
        rows[i].d_m = pop_.dest[i] >= 0 ? pop_.link_distance(i) : 0.0;
      }
      data_phase(f, rows, fr, out);
      for (const auto& r : rows)
        if (r.dest >= 0) tr.links.push_back(r);

      // Energy.
      for (std::size_t k = 0; k < total; ++k) {
        NodeFrameRow nr;
        nr.frame = f;
        nr.node = static_cast<int>(k);
        nr.coordinator = k >= n;
        nr.cell = k >= n ? static_cast<int>(k - n) : cell_now[k];
        nr.total_slots = spf;
        int awake_data = 0;
        for (int t = 0; t < spf; ++t) {
          nr.awake_slots += awake_[k][static_cast<std::size_t>(t)];
          if (t >= fc.contention_slots + fc.scheduling_slots) awake_data += awake_[k][static_cast<std::size_t>(t)];
        }
        nr.amp_j = amp_j_[k];
        nr.energy_j = nr.awake_slots * s_.radio.circuit_power_w * fc.slot_s +
                      (spf - nr.awake_slots) * s_.radio.sleep_power_w * fc.slot_s + nr.amp_j;
        nr.data_energy_j = awake_data * s_.radio.circuit_power_w * fc.slot_s +
                           (fc.data_slots - awake_data) * s_.radio.sleep_power_w * fc.slot_s + data_amp_j_[k];
        fr.energy_j += nr.energy_j;
        tr.nodes.push_back(nr);
      }
      tr.frame_rows.push_back(fr);

      // Mobility, destination upkeep, location reports.
      if (s_.mobile) pop_.move(fc.frame_s());
      for (std::size_t i = 0; i < n; ++i) {
        if ((pop_.dest[i] < 0 && s_.destinations.empty()) ||
            (pop_.dest[i] >= 0 && pop_.link_distance(i) > s_.radio.d_max_m))
          pick_destination(i);
        if (s_.mobile && (f + 1) % report_every == 0 && pop_.dest[i] >= 0) need_request_[i] = 1;
      }
    }
    for (std::size_t i = 0; i < n; ++i) tr.queued_bits += pop_.queue[i];

    out.floor_mw = floor_mw_;
    out.max_g = max_area_efficiency(s_.radio.alpha);
    out.inner = compute_metrics(tr, RegionFilter::inner(grid_), out.max_g);
    out.all = compute_metrics(tr, RegionFilter::all(grid_), out.max_g);
    return out;
  }

 private:
  struct Record {
    int epoch = -1;
    int dest = -1;
    Vec2 src_pos;
    Vec2 dst_pos;
    LinkPlan plan;
    double backlog = 0;  // bits the coordinator believes are waiting
  };

  struct Entry {
    int coordinator = 0;
    int source = 0;
    int dest = 0;
    int epoch = 0;
    Vec2 src_pos;
    Vec2 dst_pos;
    LinkPlan plan;
    std::vector<std::uint8_t> slots;
  };

  std::string scheme_name() const {
    if (s_.scheduler == ScheduleMode::Random) return "P-ran.sch";
    switch (s_.planner) {
      case PlannerMode::MaxPower: return "P-gamma_max";
      case PlannerMode::MinInterference: return "P-I_min";
      case PlannerMode::Arbitrary: return "P-arb";
      default: return "Proposed";
    }
  }

  double full_slot_bits() const {
    return std::log2(1 + s_.radio.eta_max) * s_.radio.bandwidth_hz * s_.frame.slot_s;
  }

  std::optional<LinkPlan> plan_for(double d, std::size_t source, int epoch) const {
    if (!(d > 0) || d > s_.radio.d_max_m) return std::nullopt;
    PlannerConfig cfg;
    cfg.seed = s_.seed * 1000003ULL + source * 7919ULL + static_cast<std::uint64_t>(epoch);
    auto r = plan_link(d, s_.theta, s_.effective_lambda(), s_.planner, s_.radio, table_, cfg, static_cast<int>(source));
    return r.value;
  }

  void pick_destination(std::size_t i) {
    pop_.choose_destination(i, [&](std::size_t a, std::size_t b) {
      return plan_for(distance(pop_.pos[a], pop_.pos[b]), a, 0).has_value();
    });
    need_request_[i] = pop_.dest[i] >= 0;
  }

  /// Truncated CSMA for request packets in the contention slots.
  void contention(FrameRow& fr) {
    const auto& fc = s_.frame;
    const std::size_t n = pop_.size();
    const int total_ms = static_cast<int>(std::llround(fc.contention_slots * fc.slot_s / fc.minislot_s));
    const int dur = fc.request_minislots();
    struct Attempt {
      std::size_t node;
      int target;  // coordinator cell
      int backoff;
      int start = -1;
      double worst = kInf;  // worst SINR over the packet
      int done_ms = -1;
    };
    std::vector<Attempt> at;
    for (std::size_t i = 0; i < n; ++i) {
      if (!need_request_[i] || pop_.dest[i] < 0) continue;
      const int target = grid_.cell_of(pop_.pos[static_cast<std::size_t>(pop_.dest[i])]);
      if (target < 0) continue;
      at.push_back({i, target, static_cast<int>(contention_rng_.below(static_cast<std::uint64_t>(cw_[i]) + 1))});
    }
    if (at.empty() || total_ms <= 0) return;
    const double gmax = s_.radio.gamma_max_mw;
    auto rx_power = [&](Vec2 from, Vec2 to) { return gmax * channel_gain_or_inf(distance(from, to), s_.radio); };
    for (int m = 0; m < total_ms; ++m) {
      // Carrier sense at the start of the mini-slot sees only packets already on air.
      std::vector<std::size_t> on;
      for (std::size_t a = 0; a < at.size(); ++a)
        if (at[a].start >= 0 && m < at[a].start + dur) on.push_back(a);
      std::vector<std::size_t> starting;
      for (std::size_t a = 0; a < at.size(); ++a) {
        if (at[a].start >= 0 || at[a].done_ms >= 0) continue;
        double sensed = 0;
        for (std::size_t b : on) sensed += rx_power(pop_.pos[at[b].node], pop_.pos[at[a].node]);
        if (sensed >= fc.request_cs_threshold_mw) continue;  // frozen
        if (at[a].backoff > 0) {
          --at[a].backoff;
          continue;
        }
        if (m + dur > total_ms) {
          at[a].done_ms = total_ms;  // no room left this frame
          continue;
        }
        starting.push_back(a);
      }
      for (std::size_t a : starting) {
        at[a].start = m;
        on.push_back(a);
        amp_j_[at[a].node] += s_.radio.amp_inverse_efficiency * mw_to_w(gmax) *
                              (fc.preamble_s + fc.request_bits / fc.signaling_rate_bps);
      }
      // SINR of every packet on air during this mini-slot at its coordinator.
      for (std::size_t a : on) {
        const Vec2 rx = grid_.cell(static_cast<std::size_t>(at[a].target)).center;
        double inter = 0;
        for (std::size_t b : on)
          if (b != a) inter += rx_power(pop_.pos[at[b].node], rx);
        at[a].worst = std::min(at[a].worst, sinr(rx_power(pop_.pos[at[a].node], rx), inter, s_.radio.n0_mw));
      }
    }
    for (auto& a : at) {
      const int end_ms = a.start >= 0 ? a.start + dur : (a.done_ms >= 0 ? a.done_ms : total_ms);
      const int end_slot = std::min(fc.contention_slots,
                                    static_cast<int>(std::ceil(end_ms * fc.minislot_s / fc.slot_s - 1e-9)));
      for (int t = 0; t < std::max(end_slot, 1); ++t) awake_[a.node][static_cast<std::size_t>(t)] = 1;
      if (a.start < 0) continue;
      if (a.worst >= s_.radio.eta_min) {
        ++fr.requests_ok;
        cw_[a.node] = fc.cw_min;
        register_request(a.node, static_cast<std::size_t>(a.target));
      } else {
        ++fr.requests_failed;
        cw_[a.node] = std::min(2 * (cw_[a.node] + 1) - 1, fc.cw_max);
      }
    }
  }

  void register_request(std::size_t i, std::size_t coord) {
    const std::size_t j = static_cast<std::size_t>(pop_.dest[i]);
    const auto plan = plan_for(pop_.link_distance(i), i, pop_.epoch[i]);
    if (registered_[i] >= 0) records_[static_cast<std::size_t>(registered_[i])].erase(static_cast<int>(i));
    registered_[i] = -1;
    need_request_[i] = 0;
    if (!plan) {
      pick_destination(i);
      return;
    }
    Record r;
    r.epoch = pop_.epoch[i];
    r.dest = static_cast<int>(j);
    r.src_pos = pop_.pos[i];
    r.dst_pos = pop_.pos[j];
    r.plan = *plan;
    r.backlog = s_.saturated ? kInf : pop_.queue[i];
    records_[coord][static_cast<int>(i)] = r;
    registered_[i] = static_cast<int>(coord);
    coord_backlog_[i] = r.backlog;
  }

  void schedule_cell(int frame, std::size_t c, SimResult& out) {
    const auto& fc = s_.frame;
    const std::size_t T = static_cast<std::size_t>(fc.data_slots);
    const Vec2 center = grid_.cell(c).center;
    CoordinatorView view;
    view.coordinator = static_cast<int>(c);
    std::vector<int> own;
    for (const auto& [src, rec] : records_[c])
      if (rec.backlog > 0) own.push_back(src);
    const std::size_t cap = static_cast<std::size_t>(fc.entry_capacity());
    if (own.size() > cap) {
      // Rotate so deferred links go first next frame.
      std::rotate(own.begin(), own.begin() + static_cast<std::ptrdiff_t>(static_cast<std::size_t>(frame) % own.size()),
                  own.end());
      out.deferred_entries += static_cast<long long>(own.size() - cap);
      own.resize(cap);
      std::sort(own.begin(), own.end());
    }
    for (int src : own) {
      const Record& r = records_[c].at(src);
      view.links.push_back({src, r.dest, r.src_pos, r.dst_pos, r.plan.gamma_star_mw,
                            r.plan.i_target_mw, r.plan.planned_rate, {}, r.backlog, true});
    }
    const double rn = grid_.rn();
    for (const auto& e : frame_entries_) {
      if (distance(e.src_pos, center) > rn && distance(e.dst_pos, center) > rn) continue;
      view.links.push_back({e.source, e.dest, e.src_pos, e.dst_pos, e.plan.gamma_star_mw, e.plan.i_target_mw,
                            e.plan.planned_rate, e.slots, 0.0, false});
    }
    if (own.empty()) return;
    const double rate_slot_bits = s_.radio.bandwidth_hz * fc.slot_s;
    const SchedulerProblem prob = view_problem(view, T, floor_mw_, rate_slot_bits, s_.radio);
    const std::uint64_t seed = s_.seed * 0x9e3779b97f4a7c15ULL + static_cast<std::uint64_t>(frame) * 131ULL + c;
    const ScheduleMatrix m = build_schedule(prob, s_.scheduler, seed);
    if (s_.audit) {
      const auto a = audit_schedule(prob, m);
      out.audit_violations += static_cast<long long>(a.target_violations + a.cap_violations + a.conflict_violations +
                                                     a.duplicate_in_round);
    }
    int entries = 0;
    for (std::size_t k = 0; k < own.size(); ++k) {
      Entry e;
      const auto src = static_cast<std::size_t>(own[k]);
      const Record& r = records_[c].at(own[k]);
      e.coordinator = static_cast<int>(c);
      e.source = own[k];
      e.dest = r.dest;
      e.epoch = r.epoch;
      e.src_pos = r.src_pos;
      e.dst_pos = r.dst_pos;
      e.plan = r.plan;
      e.slots.assign(T, 0);
      int granted = 0;
      for (std::size_t t = 0; t < T; ++t) {
        e.slots[t] = m.u(k, t);
        granted += m.u(k, t);
      }
      if (!granted) continue;
      ++entries;
      Record& rw = records_[c].at(own[k]);
      if (std::isfinite(rw.backlog))
        rw.backlog = std::max(0.0, rw.backlog - granted * r.plan.planned_rate * rate_slot_bits);
      coord_backlog_[src] = rw.backlog;
      frame_entries_.push_back(std::move(e));
    }
    out.max_entries = std::max(out.max_entries, entries);
    const std::size_t coord_node = pop_.size() + c;
    amp_j_[coord_node] += s_.radio.amp_inverse_efficiency * mw_to_w(s_.radio.gamma_max_mw) *
                          (fc.preamble_s + entries * fc.entry_bits / fc.signaling_rate_bps);
  }

  void data_phase(int frame, std::vector<LinkFrameRow>& rows, FrameRow& fr, SimResult& out) {
    const auto& fc = s_.frame;
    const std::size_t T = static_cast<std::size_t>(fc.data_slots);
    const std::size_t base = static_cast<std::size_t>(fc.contention_slots + fc.scheduling_slots);
    const double rate_slot_bits = s_.radio.bandwidth_hz * fc.slot_s;
    double worst_margin = kInf;
    for (std::size_t t = 0; t < T; ++t) {
      struct Tx {
        const Entry* e;
        double bits;
      };
      std::vector<Tx> txs;
      std::vector<std::uint8_t> sending(pop_.size(), 0);
      for (const auto& e : frame_entries_) {
        if (!e.slots[t]) continue;
        const auto src = static_cast<std::size_t>(e.source), dst = static_cast<std::size_t>(e.dest);
        fr.scheduled += 1;
        awake_[dst][base + t] = 1;  // the receiver listens as announced
        if (pop_.epoch[src] != e.epoch || pop_.dest[src] != e.dest || !(pop_.queue[src] > 0)) continue;
        const double bits = std::min(pop_.queue[src], e.plan.planned_rate * rate_slot_bits);
        pop_.queue[src] -= bits;  // in flight
        txs.push_back({&e, bits});
        sending[src] = 1;
        awake_[src][base + t] = 1;
        const double amp = s_.radio.amp_inverse_efficiency * mw_to_w(e.plan.gamma_star_mw) * fc.slot_s;
        amp_j_[src] += amp;
        data_amp_j_[src] += amp;
      }
      for (const auto& x : txs) {
        const auto src = static_cast<std::size_t>(x.e->source), dst = static_cast<std::size_t>(x.e->dest);
        double inter = 0;
        for (const auto& y : txs)
          if (&y != &x)
            inter += y.e->plan.gamma_star_mw *
                     channel_gain_or_inf(distance(pop_.pos[static_cast<std::size_t>(y.e->source)], pop_.pos[dst]), s_.radio);
        const double signal = x.e->plan.gamma_star_mw * channel_gain(distance(pop_.pos[src], pop_.pos[dst]), s_.radio);
        const double actual = sinr(signal, inter, s_.radio.n0_mw);
        const double required = x.e->plan.planned_sinr;
        const bool duplex = sending[dst] != 0;
        const bool ok = !duplex && actual >= required * (1 - 1e-9);
        if (duplex) ++out.duplex_failures;
        worst_margin = std::min(worst_margin, actual / required);
        LinkFrameRow& row = rows[src];
        row.slots += 1;
        if (ok) {
          row.delivered += 1;
          row.bits += x.bits;
          row.rate_slots += x.bits / rate_slot_bits;
          out.trace.delivered_bits += x.bits;
          ++fr.delivered;
        } else {
          pop_.queue[src] += x.bits;
          ++fr.failed;
        }
        if (s_.record_tx)
          out.trace.tx.push_back({frame, static_cast<int>(t), x.e->source, x.e->dest, rows[src].source_cell,
                                  pop_.pos[src], pop_.pos[dst], x.e->plan.gamma_star_mw, required, actual,
                                  ok ? x.bits : 0.0, ok ? x.bits / rate_slot_bits : 0.0, ok});
      }
    }
    fr.min_sinr_margin_db = std::isfinite(worst_margin) ? linear_to_db(worst_margin) : 0.0;
  }

  SimScenario s_;
  CellGrid grid_;
  std::vector<int> colors_;
  const LatticeInverseTable& table_;
  Population pop_;
  Rng contention_rng_;
  double floor_mw_ = 0;
  std::vector<std::uint8_t> need_request_;
  std::vector<int> cw_;
  std::vector<int> registered_;
  std::vector<double> coord_backlog_;
  std::vector<std::map<int, Record>> records_;
  std::vector<Entry> frame_entries_;
  std::vector<std::vector<std::uint8_t>> awake_;
  std::vector<double> amp_j_;
  std::vector<double> data_amp_j_;
};

inline SimResult run_simulation(const SimScenario& s) { return MacSimulator(s).run(); }

}  // namespace jstpc
