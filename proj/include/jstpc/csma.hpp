#pragma once

// Mini-slotted CSMA/CA baseline in the spirit of 802.11 DCF, with an optional
// power-saving mode (ATIM window at the start of each beacon interval).
// Powers are distance scaled so every link sees the same received power;
// the carrier-sense threshold is the knob swept by optimize_csma.

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>
#include <vector>

#include "jstpc/cell_grid.hpp"
#include "jstpc/mac_sim.hpp"
#include "jstpc/metrics.hpp"
#include "jstpc/trace.hpp"

namespace jstpc {

struct CsmaConfig {
  double cs_threshold_mw = dbm_to_mw(-85.0);
  int cw_min = 15;
  int cw_max = 1023;
  int retry_limit = 7;
  double minislot_s = 20e-6;
  double sifs_s = 10e-6;
  double preamble_s = 72e-6;
  double packet_s = 1e-3;  // data airtime excluding the preamble
  double signaling_rate_bps = 6e6;
  bool psm = false;
  double beacon_s = 0.1;
  double atim_window_s = 0.02;
  int atim_bits = 224;
  int atim_ack_bits = 112;
  int rate_history = 32;

  int to_minislots(double seconds) const { return static_cast<int>(std::ceil(seconds / minislot_s - 1e-9)); }
  int difs_minislots() const { return to_minislots(sifs_s + 2 * minislot_s); }
  int data_minislots() const { return to_minislots(preamble_s + packet_s); }
  int atim_minislots() const {
    return to_minislots(2 * preamble_s + (atim_bits + atim_ack_bits) / signaling_rate_bps + sifs_s);
  }
  int beacon_minislots() const { return to_minislots(beacon_s); }
  int window_minislots() const { return psm ? to_minislots(atim_window_s) : 0; }

  void validate() const {
    if (!(cs_threshold_mw > 0)) throw std::invalid_argument("CsmaConfig: carrier-sense threshold must be positive");
    if (cw_min < 1 || cw_max < cw_min || retry_limit < 1) throw std::invalid_argument("CsmaConfig: bad contention window");
    if (!(minislot_s > 0) || sifs_s < 0 || preamble_s < 0 || !(packet_s > 0))
      throw std::invalid_argument("CsmaConfig: bad timing");
    if (!(beacon_s > 0)) throw std::invalid_argument("CsmaConfig: beacon interval must be positive");
    if (psm && !(atim_window_s > 0 && atim_window_s < beacon_s))
      throw std::invalid_argument("CsmaConfig: ATIM window must lie inside the beacon interval");
    if (rate_history < 1) throw std::invalid_argument("CsmaConfig: rate history must hold a sample");
  }
};

/// Transmit power that puts gamma_max * c * d_max^-alpha at the receiver, clamped to the box.
inline double csma_link_power(double d, const RadioParams& p) {
  const double g = p.gamma_max_mw * std::pow(d / p.d_max_m, p.alpha);
  return std::clamp(g, p.gamma_min_mw, p.gamma_max_mw);
}

/// SINR requirement maximizing rate times the empirical chance of meeting it.
inline double pick_required_sinr(const std::deque<double>& history, const RadioParams& p) {
  if (history.empty()) return p.eta_min;
  const double lo_db = linear_to_db(p.eta_min), hi_db = linear_to_db(p.eta_max);
  double best = p.eta_min, best_v = -1;
  for (double db = lo_db; db <= hi_db + 1e-9; db += 1.0) {
    const double eta = db_to_linear(db);
    std::size_t hits = 0;
    for (double h : history) hits += h >= eta * (1 - 1e-12);
    const double v = std::log2(1 + eta) * static_cast<double>(hits) / static_cast<double>(history.size());
    if (v > best_v) {
      best_v = v;
      best = eta;
    }
  }
  return best;
}

struct CsmaStats {
  long long collisions = 0;  // failed data transmissions
  long long atim_ok = 0;
  long long atim_failed = 0;
  long long overlap_violations = 0;  // mutually sensing senders overlapping without a common start
};

struct CsmaResult {
  Trace trace;
  MetricsReport inner;
  MetricsReport all;
  CsmaStats stats;
  double max_g = 0;
};

class CsmaSimulator {
 public:
  CsmaSimulator(SimScenario s, CsmaConfig cfg)
      : s_(std::move(s)), cfg_(cfg), grid_((s_.validate(), cfg_.validate(), s_.grid())), pop_(s_, grid_),
        backoff_rng_(Rng::stream(s_.seed, 6)) {
    const std::size_t n = pop_.size();
    for (std::size_t i = 0; i < n; ++i) {
      if (!s_.destinations.empty()) {
        const int j = s_.destinations[i];
        if (j >= 0 && (static_cast<std::size_t>(j) >= n || static_cast<std::size_t>(j) == i))
          throw std::invalid_argument("SimScenario: bad destination index");
        pop_.dest[i] = j;
        if (j >= 0 && pop_.link_distance(i) > s_.radio.d_max_m) pop_.dest[i] = -1;
      } else {
        pop_.choose_destination(i, [](std::size_t, std::size_t) { return true; });
      }
    }
    st_.assign(n, {});
    for (auto& x : st_) x.cw = cfg_.cw_min;
    history_.assign(n, {});
    sensed_.assign(n, 0.0);
  }

  CsmaResult run() {
    CsmaResult out;
    Trace& tr = out.trace;
    tr.scheme = cfg_.psm ? "best-PSM" : "best-DCF";
    tr.slot_s = cfg_.packet_s;
    tr.data_fraction = 1.0;
    tr.energy_slot_s = cfg_.minislot_s;
    tr.bandwidth_hz = s_.radio.bandwidth_hz;
    const int per_frame = cfg_.beacon_minislots();
    const double frame_s = per_frame * cfg_.minislot_s;
    const int frames = std::max(1, static_cast<int>(std::llround(s_.duration_s / frame_s)));
    tr.frames = frames;
    tr.duration_s = frames * frame_s;
    const std::size_t n = pop_.size();
    const int window = cfg_.window_minislots();
    const double fill = std::ceil(per_frame / static_cast<double>(cfg_.data_minislots())) * max_packet_bits();

    for (int f = 0; f < frames; ++f) {
      gains_ = Matrix<double>(n, n, 0.0);
      for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b)
          if (a != b) gains_(a, b) = channel_gain_or_inf(distance(pop_.pos[a], pop_.pos[b]), s_.radio);
      recompute_sensed();
      std::vector<int> cell_now(n);
      std::vector<LinkFrameRow> rows(n);
      for (std::size_t i = 0; i < n; ++i) {
        cell_now[i] = grid_.cell_of(pop_.pos[i]);
        tr.generated_bits += pop_.arrivals(i, frame_s, fill);
        rows[i].frame = f;
        rows[i].source = static_cast<int>(i);
        rows[i].dest = pop_.dest[i];
        rows[i].source_cell = cell_now[i];
        rows[i].d_m = pop_.dest[i] >= 0 ? pop_.link_distance(i) : 0.0;
      }
      awake_count_.assign(n, 0);
      amp_j_.assign(n, 0.0);
      std::vector<std::uint8_t> stay(n, cfg_.psm ? 0 : 1);  // awake after the ATIM window
      std::vector<std::uint8_t> announced(n, 0);           // source holds an acknowledged ATIM

      for (int k = 0; k < per_frame; ++k) {
        const bool in_window = k < window;
        finish_transmissions(k, rows, stay, announced, out);
        // Who may contend this mini-slot.
        for (std::size_t i = 0; i < n; ++i) {
          auto& x = st_[i];
          x.eligible = false;
          if (x.tx_end >= 0 || pop_.dest[i] < 0 || !(pop_.queue[i] > 0)) continue;
          const auto j = static_cast<std::size_t>(pop_.dest[i]);
          if (cfg_.psm) {
            if (in_window) {
              x.eligible = !announced[i] && k + cfg_.atim_minislots() <= window;
            } else {
              x.eligible = announced[i] && stay[i] && stay[j];
            }
          } else {
            x.eligible = true;
          }
        }
        std::vector<std::size_t> starting;
        for (std::size_t i = 0; i < n; ++i) {
          auto& x = st_[i];
          if (!x.eligible) continue;
          if (x.backoff < 0) x.backoff = static_cast<int>(backoff_rng_.below(static_cast<std::uint64_t>(x.cw) + 1));
          if (sensed_[i] >= cfg_.cs_threshold_mw) {
            x.difs = cfg_.difs_minislots();
            continue;
          }
          if (x.difs > 0) {
            --x.difs;
            continue;
          }
          if (x.backoff > 0) {
            --x.backoff;
            continue;
          }
          starting.push_back(i);
        }
        for (std::size_t i : starting) start_transmission(i, k, in_window);
        if (!starting.empty()) {
          update_sinr();
          check_overlaps(out.stats);
        }
        // Energy: awake unless PSM has put the node to sleep.
        for (std::size_t i = 0; i < n; ++i)
          if (!cfg_.psm || in_window || stay[i] || st_[i].tx_end >= 0) ++awake_count_[i];
      }
      finish_transmissions(per_frame, rows, stay, announced, out);
      if (cfg_.psm) {
        // The next ATIM window starts: anything still on air is cut and retried.
        for (std::size_t i = 0; i < n; ++i) abort_transmission(i);
      } else {
        for (std::size_t i : on_air_) {
          st_[i].tx_start -= per_frame;
          st_[i].tx_end -= per_frame;
        }
      }

      for (const auto& r : rows)
        if (r.dest >= 0) tr.links.push_back(r);
      FrameRow fr;
      fr.frame = f;
      for (std::size_t i = 0; i < n; ++i) {
        NodeFrameRow nr;
        nr.frame = f;
        nr.node = static_cast<int>(i);
        nr.cell = cell_now[i];
        nr.total_slots = per_frame;
        nr.awake_slots = awake_count_[i];
        nr.amp_j = amp_j_[i];
        nr.energy_j = nr.awake_slots * s_.radio.circuit_power_w * cfg_.minislot_s +
                      (per_frame - nr.awake_slots) * s_.radio.sleep_power_w * cfg_.minislot_s + nr.amp_j;
        nr.data_energy_j = nr.energy_j;
        fr.energy_j += nr.energy_j;
        tr.nodes.push_back(nr);
        fr.scheduled += rows[i].slots;
        fr.delivered += rows[i].delivered;
        fr.failed += rows[i].slots - rows[i].delivered;
      }
      tr.frame_rows.push_back(fr);

      if (s_.mobile) pop_.move(frame_s);
      for (std::size_t i = 0; i < n; ++i)
        if (pop_.dest[i] >= 0 && pop_.link_distance(i) > s_.radio.d_max_m) {
          pop_.choose_destination(i, [](std::size_t, std::size_t) { return true; });
          history_[i].clear();
        } else if (pop_.dest[i] < 0 && s_.destinations.empty()) {
          pop_.choose_destination(i, [](std::size_t, std::size_t) { return true; });
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
      abort_transmission(i);  // unfinished packets go back to their queues
      tr.queued_bits += pop_.queue[i];
    }
    out.max_g = max_area_efficiency(s_.radio.alpha);
    out.inner = compute_metrics(tr, RegionFilter::inner(grid_), out.max_g);
    out.all = compute_metrics(tr, RegionFilter::all(grid_), out.max_g);
    return out;
  }

 private:
  struct NodeState {
    int cw = 15;
    int retries = 0;
    int backoff = -1;
    int difs = 0;
    bool eligible = false;
    // current transmission
    int tx_start = -1;
    int tx_end = -1;
    bool atim = false;
    int dest = -1;
    double gamma = 0;
    double bits = 0;
    double required = 0;
    double worst = kInf;
    bool duplex = false;
  };

  double max_packet_bits() const { return std::log2(1 + s_.radio.eta_max) * s_.radio.bandwidth_hz * cfg_.packet_s; }

  void start_transmission(std::size_t i, int k, bool atim) {
    auto& x = st_[i];
    x.atim = atim;
    x.dest = pop_.dest[i];
    x.gamma = csma_link_power(pop_.link_distance(i), s_.radio);
    x.tx_start = k;
    x.tx_end = k + (atim ? cfg_.atim_minislots() : cfg_.data_minislots());
    x.worst = kInf;
    x.duplex = false;
    x.backoff = -1;
    if (atim) {
      x.required = s_.radio.eta_min;
      x.bits = 0;
      amp_j_[i] += s_.radio.amp_inverse_efficiency * mw_to_w(x.gamma) *
                   (2 * cfg_.preamble_s + cfg_.atim_bits / cfg_.signaling_rate_bps);
    } else {
      x.required = pick_required_sinr(history_[i], s_.radio);
      x.bits = std::min(pop_.queue[i], std::log2(1 + x.required) * s_.radio.bandwidth_hz * cfg_.packet_s);
      pop_.queue[i] -= x.bits;  // in flight
      amp_j_[i] += s_.radio.amp_inverse_efficiency * mw_to_w(x.gamma) * (cfg_.preamble_s + cfg_.packet_s);
    }
    on_air_.push_back(i);
    for (std::size_t j = 0; j < pop_.size(); ++j)
      if (j != i) sensed_[j] += x.gamma * gains_(i, j);
  }

  void recompute_sensed() {
    std::fill(sensed_.begin(), sensed_.end(), 0.0);
    for (std::size_t i : on_air_)
      for (std::size_t j = 0; j < pop_.size(); ++j)
        if (j != i) sensed_[j] += st_[i].gamma * gains_(i, j);
  }

  void update_sinr() {
    for (std::size_t a : on_air_) {
      auto& x = st_[a];
      const auto d = static_cast<std::size_t>(x.dest);
      double inter = 0;
      bool dest_sending = false;
      for (std::size_t b : on_air_) {
        if (b == a) continue;
        if (b == d) dest_sending = true;
        inter += st_[b].gamma * gains_(b, d);
      }
      if (dest_sending) x.duplex = true;
      x.worst = std::min(x.worst, sinr(x.gamma * gains_(a, d), inter, s_.radio.n0_mw));
    }
  }

  void check_overlaps(CsmaStats& stats) {
    for (std::size_t a : on_air_)
      for (std::size_t b : on_air_) {
        if (b <= a) continue;
        const bool mutual = st_[a].gamma * gains_(a, b) >= cfg_.cs_threshold_mw &&
                            st_[b].gamma * gains_(b, a) >= cfg_.cs_threshold_mw;
        if (mutual && st_[a].tx_start != st_[b].tx_start) ++stats.overlap_violations;
      }
  }

  void remove_from_air(std::size_t i) {
    auto& x = st_[i];
    on_air_.erase(std::find(on_air_.begin(), on_air_.end(), i));
    if (on_air_.empty()) {
      std::fill(sensed_.begin(), sensed_.end(), 0.0);
    } else {
      for (std::size_t j = 0; j < pop_.size(); ++j)
        if (j != i) sensed_[j] = std::max(0.0, sensed_[j] - x.gamma * gains_(i, j));
    }
    x.tx_start = x.tx_end = -1;
  }

  void fail(std::size_t i) {
    auto& x = st_[i];
    if (++x.retries >= cfg_.retry_limit) {
      x.retries = 0;
      x.cw = cfg_.cw_min;
    } else {
      x.cw = std::min(2 * (x.cw + 1) - 1, cfg_.cw_max);
    }
  }

  void succeed(std::size_t i) {
    st_[i].retries = 0;
    st_[i].cw = cfg_.cw_min;
  }

  void finish_transmissions(int k, std::vector<LinkFrameRow>& rows, std::vector<std::uint8_t>& stay,
                            std::vector<std::uint8_t>& announced, CsmaResult& out) {
    std::vector<std::size_t> done;
    for (std::size_t i : on_air_)
      if (st_[i].tx_end <= k) done.push_back(i);
    for (std::size_t i : done) {
      auto& x = st_[i];
      const bool ok = !x.duplex && x.worst >= x.required * (1 - 1e-12);
      const auto d = static_cast<std::size_t>(x.dest);
      if (x.atim) {
        if (ok) {
          ++out.stats.atim_ok;
          announced[i] = 1;
          stay[i] = stay[d] = 1;
          succeed(i);
        } else {
          ++out.stats.atim_failed;
          fail(i);
        }
      } else {
        auto& h = history_[i];
        h.push_back(x.duplex ? 0.0 : x.worst);
        while (h.size() > static_cast<std::size_t>(cfg_.rate_history)) h.pop_front();
        rows[i].slots += 1;
        if (ok) {
          rows[i].delivered += 1;
          rows[i].bits += x.bits;
          rows[i].rate_slots += x.bits / (s_.radio.bandwidth_hz * cfg_.packet_s);
          out.trace.delivered_bits += x.bits;
          succeed(i);
        } else {
          pop_.queue[i] += x.bits;
          ++out.stats.collisions;
          fail(i);
        }
      }
      remove_from_air(i);
      x.difs = cfg_.difs_minislots();
    }
  }

  void abort_transmission(std::size_t i) {
    auto& x = st_[i];
    if (x.tx_end < 0) return;
    if (!x.atim) pop_.queue[i] += x.bits;
    remove_from_air(i);
    x.backoff = -1;
    x.difs = 0;
  }

  SimScenario s_;
  CsmaConfig cfg_;
  CellGrid grid_;
  Population pop_;
  Rng backoff_rng_;
  std::vector<NodeState> st_;
  std::vector<std::deque<double>> history_;
  std::vector<double> sensed_;
  std::vector<std::size_t> on_air_;
  Matrix<double> gains_;
  std::vector<int> awake_count_;
  std::vector<double> amp_j_;
};

inline CsmaResult run_csma(const SimScenario& s, const CsmaConfig& cfg) { return CsmaSimulator(s, cfg).run(); }

struct CsmaSweep {
  std::vector<double> cs_thresholds_mw;
  std::vector<double> atim_windows_s;  // used only for PSM; empty keeps the base value
  CsmaConfig base;
};

struct CsmaSweepResult {
  CsmaConfig best;
  double best_throughput = -1;
  std::vector<std::pair<CsmaConfig, double>> evaluated;  // in grid order
};

/// Grid argmax of inner-region distance-weighted throughput averaged over seeds; first wins ties.
inline CsmaSweepResult optimize_csma(const SimScenario& s, const CsmaSweep& sweep,
                                     const std::vector<std::uint64_t>& seeds = {}) {
  if (sweep.cs_thresholds_mw.empty()) throw std::invalid_argument("optimize_csma: empty threshold grid");
  std::vector<double> windows = sweep.atim_windows_s;
  if (windows.empty() || !sweep.base.psm) windows = {sweep.base.atim_window_s};
  std::vector<std::uint64_t> run_seeds = seeds.empty() ? std::vector<std::uint64_t>{s.seed} : seeds;
  CsmaSweepResult out;
  for (double thr : sweep.cs_thresholds_mw)
    for (double w : windows) {
      CsmaConfig cfg = sweep.base;
      cfg.cs_threshold_mw = thr;
      cfg.atim_window_s = w;
      double total = 0;
      for (std::uint64_t seed : run_seeds) {
        SimScenario sc = s;
        sc.seed = seed;
        total += run_csma(sc, cfg).inner.throughput;
      }
      const double mean = total / static_cast<double>(run_seeds.size());
      out.evaluated.emplace_back(cfg, mean);
      if (mean > out.best_throughput) {
        out.best_throughput = mean;
        out.best = cfg;
      }
    }
  return out;
}

}  // namespace jstpc
