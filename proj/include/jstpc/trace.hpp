#pragma once

// Run trace shared by the coordinated MAC and the CSMA baselines. Metrics are
// computed from it after the run; the digest fingerprints a run for
// determinism checks.

#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "jstpc/core_model.hpp"

namespace jstpc {

/// One link (keyed by its source node) during one frame.
struct LinkFrameRow {
  int frame = 0;
  int source = 0;
  int dest = 0;
  int source_cell = -1;
  double d_m = 0;
  int slots = 0;        // data transmissions attempted
  int delivered = 0;    // of which received
  double bits = 0;      // delivered bits
  double rate_slots = 0;  // sum of bit/s/Hz over received transmissions, in slot units
};

/// Energy of one node during one frame.
struct NodeFrameRow {
  int frame = 0;
  int node = 0;
  int cell = -1;
  bool coordinator = false;
  int awake_slots = 0;
  int total_slots = 0;
  double amp_j = 0;     // amplifier energy on top of the circuit draw
  double energy_j = 0;
  double data_energy_j = 0;  // part spent in data slots
};

struct FrameRow {
  int frame = 0;
  int scheduled = 0;
  int delivered = 0;
  int failed = 0;
  int requests_ok = 0;
  int requests_failed = 0;
  double min_sinr_margin_db = 0;  // actual over required, worst transmission (0 if none)
  double energy_j = 0;
};

/// One data transmission, kept only when requested.
struct TxRecord {
  int frame = 0;
  int slot = 0;
  int source = 0;
  int dest = 0;
  int source_cell = -1;
  Vec2 src_pos;
  Vec2 dst_pos;
  double gamma_mw = 0;
  double required_sinr = 0;
  double actual_sinr = 0;
  double bits = 0;
  double rate = 0;  // bit/s/Hz carried
  bool ok = false;
};

struct Trace {
  std::string scheme;
  double slot_s = 1e-3;         // airtime of one data transmission
  double energy_slot_s = 1e-3;  // unit of NodeFrameRow awake/total slot counts
  double duration_s = 0;
  double data_fraction = 1.0;  // share of airtime usable for data
  double bandwidth_hz = 0;
  int frames = 0;
  std::vector<LinkFrameRow> links;
  std::vector<NodeFrameRow> nodes;
  std::vector<FrameRow> frame_rows;
  std::vector<TxRecord> tx;
  double generated_bits = 0;
  double delivered_bits = 0;
  double queued_bits = 0;

  std::string links_csv() const {
    std::string s = "frame,source,dest,source_cell,d_m,slots,delivered,bits,rate_slots\n";
    char buf[256];
    for (const auto& r : links) {
      std::snprintf(buf, sizeof buf, "%d,%d,%d,%d,%.17g,%d,%d,%.17g,%.17g\n", r.frame, r.source, r.dest, r.source_cell,
                    r.d_m, r.slots, r.delivered, r.bits, r.rate_slots);
      s += buf;
    }
    return s;
  }

  std::string nodes_csv() const {
    std::string s = "frame,node,cell,coordinator,awake_slots,total_slots,amp_j,energy_j,data_energy_j\n";
    char buf[256];
    for (const auto& r : nodes) {
      std::snprintf(buf, sizeof buf, "%d,%d,%d,%d,%d,%d,%.17g,%.17g,%.17g\n", r.frame, r.node, r.cell,
                    r.coordinator ? 1 : 0, r.awake_slots, r.total_slots, r.amp_j, r.energy_j, r.data_energy_j);
      s += buf;
    }
    return s;
  }

  std::string frames_csv() const {
    std::string s = "frame,scheduled,delivered,failed,requests_ok,requests_failed,min_sinr_margin_db,energy_j\n";
    char buf[256];
    for (const auto& r : frame_rows) {
      std::snprintf(buf, sizeof buf, "%d,%d,%d,%d,%d,%d,%.17g,%.17g\n", r.frame, r.scheduled, r.delivered, r.failed,
                    r.requests_ok, r.requests_failed, r.min_sinr_margin_db, r.energy_j);
      s += buf;
    }
    return s;
  }

  /// FNV-1a over the three CSV tables.
  std::uint64_t digest() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const std::string& part : {links_csv(), nodes_csv(), frames_csv()})
      for (unsigned char ch : part) {
        h ^= ch;
        h *= 0x100000001b3ULL;
      }
    return h;
  }

  double total_energy_j() const {
    double e = 0;
    for (const auto& r : nodes) e += r.energy_j;
    return e;
  }
};

inline std::string hex_digest(std::uint64_t h) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace jstpc
