#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "jstpc/units.hpp"

namespace jstpc {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Raised when a planner or solver finds no point satisfying every constraint.
class InfeasibleError : public std::runtime_error {
 public:
  InfeasibleError(std::string constraint, const std::string& what)
      : std::runtime_error(what), constraint_(std::move(constraint)) {}
  const std::string& constraint() const noexcept { return constraint_; }

 private:
  std::string constraint_;
};

/// Optional result that remembers which constraint emptied the feasible set.
template <class T>
struct Feasible {
  std::optional<T> value;
  std::string violated;

  explicit operator bool() const { return value.has_value(); }
  const T& operator*() const { return *value; }
  const T* operator->() const { return &*value; }
  static Feasible infeasible(std::string why) { return Feasible{std::nullopt, std::move(why)}; }
};

/// Radio and energy constants. RF powers in mW, circuit powers in W.
struct RadioParams {
  double c = 1e-4;
  double alpha = 3.4;
  double n0_mw = dbm_to_mw(-111.0);  // -101 dBm per 20 MHz scaled to 2 MHz
  double gamma_min_mw = 1.0;
  double gamma_max_mw = 100.0;
  double i_min_mw = dbm_to_mw(-80.0);
  double i_max_mw = dbm_to_mw(-45.0);
  double eta_min = db_to_linear(6.0);
  double eta_max = db_to_linear(30.0);
  double circuit_power_w = 1.25;
  double amp_inverse_efficiency = 10.0;
  double sleep_power_w = 0.0;
  double bandwidth_hz = 2e6;
  double d_max_m = 20.0;

  void validate() const {
    auto require = [](bool ok, const char* what) {
      if (!ok) throw std::invalid_argument(std::string("RadioParams: ") + what);
    };
    require(c > 0, "c must be positive");
    require(alpha > 0, "alpha must be positive");
    require(n0_mw > 0, "noise must be positive");
    require(gamma_min_mw > 0 && gamma_min_mw < gamma_max_mw, "need 0 < gamma_min < gamma_max");
    require(i_min_mw > 0 && i_min_mw < i_max_mw, "need 0 < i_min < i_max");
    require(eta_min > 0 && eta_min < eta_max, "need 0 < eta_min < eta_max");
    require(amp_inverse_efficiency > 1, "g_a must exceed 1");
    require(circuit_power_w > 0, "circuit power must be positive");
    require(sleep_power_w >= 0, "sleep power must be non-negative");
    require(bandwidth_hz > 0, "bandwidth must be positive");
    require(d_max_m > 0, "d_max must be positive");
  }
};

struct Vec2 {
  double x = 0;
  double y = 0;
};

inline double distance(Vec2 a, Vec2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

/// Dense row-major matrix.
template <class T>
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, T fill = T{}) : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  T& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const T& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  const std::vector<T>& data() const { return data_; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

/// h = c * d^-alpha.
inline double channel_gain(double d, const RadioParams& p) {
  if (!(d > 0)) throw std::domain_error("channel_gain: distance must be positive");
  return p.c * std::pow(d, -p.alpha);
}

/// Gain that treats co-located endpoints (a node talking to itself) as infinitely strong.
inline double channel_gain_or_inf(double d, const RadioParams& p) { return d > 0 ? channel_gain(d, p) : kInf; }

inline double sinr(double signal_mw, double interference_mw, double noise_mw) {
  if (signal_mw < 0 || interference_mw < 0 || noise_mw < 0) throw std::domain_error("sinr: negative power");
  const double denom = interference_mw + noise_mw;
  if (!(denom > 0)) throw std::domain_error("sinr: zero interference-plus-noise");
  return signal_mw / denom;
}

/// Achievable rate in bit/s/Hz.
inline double shannon_rate(double eta) {
  if (eta < 0) throw std::domain_error("shannon_rate: negative SINR");
  return std::log2(1.0 + eta);
}

/// Source plus destination power draw in W for one slot.
inline double link_slot_power(bool scheduled, double gamma_mw, const RadioParams& p) {
  return scheduled ? 2.0 * p.circuit_power_w + p.amp_inverse_efficiency * mw_to_w(gamma_mw)
                   : 2.0 * p.sleep_power_w;
}

/// Energy per bit in J/(bit/Hz) for average power (W) and average rate (bit/s/Hz).
inline double energy_per_bit(double power_w, double rate) {
  if (!(rate > 0)) throw std::domain_error("energy_per_bit: zero rate");
  return power_w / rate;
}

struct Node {
  int id = 0;
  Vec2 pos;
};

struct Link {
  int id = 0;
  int source = 0;
  int dest = 0;
};

/// Per-link rate weight, rate cap (bit/s/Hz) and energy-per-bit cap (J/(bit/Hz)).
struct LinkDemand {
  double weight = 1.0;
  double r_hat = kInf;
  double e_hat = kInf;

  void validate() const {
    if (weight < 0 || !(r_hat > 0) || !(e_hat > 0)) throw std::invalid_argument("LinkDemand out of range");
  }
};

/// Nodes, directional links, and the pairwise source-to-destination geometry.
/// gains(k, l) is the gain from the source of link k to the destination of link l.
struct Topology {
  std::vector<Node> nodes;
  std::vector<Link> links;
  Matrix<double> distances;
  Matrix<double> gains;

  std::size_t link_count() const { return links.size(); }
  double link_distance(std::size_t l) const { return distances(l, l); }

  static Topology build(std::vector<Node> nodes, std::vector<Link> links, const RadioParams& p,
                        bool enforce_d_max = true) {
    Topology t;
    t.nodes = std::move(nodes);
    t.links = std::move(links);
    auto pos_of = [&](int id) -> Vec2 {
      for (const auto& n : t.nodes)
        if (n.id == id) return n.pos;
      throw std::invalid_argument("Topology: unknown node id " + std::to_string(id));
    };
    const std::size_t L = t.links.size();
    std::vector<Vec2> src(L), dst(L);
    for (std::size_t l = 0; l < L; ++l) {
      if (t.links[l].source == t.links[l].dest) throw std::invalid_argument("Topology: link source equals dest");
      src[l] = pos_of(t.links[l].source);
      dst[l] = pos_of(t.links[l].dest);
    }
    t.distances = Matrix<double>(L, L);
    t.gains = Matrix<double>(L, L);
    for (std::size_t k = 0; k < L; ++k) {
      for (std::size_t l = 0; l < L; ++l) {
        const double d = distance(src[k], dst[l]);
        t.distances(k, l) = d;
        t.gains(k, l) = channel_gain_or_inf(d, p);
      }
    }
    for (std::size_t l = 0; l < L; ++l) {
      if (!(t.distances(l, l) > 0)) throw std::invalid_argument("Topology: zero-length link");
      if (enforce_d_max && t.distances(l, l) > p.d_max_m)
        throw std::invalid_argument("Topology: link " + std::to_string(t.links[l].id) + " longer than d_max");
    }
    return t;
  }
};

/// SINR of link l in one slot given per-link schedule flags and transmit powers.
inline double slot_sinr(const Topology& topo, const std::vector<std::uint8_t>& scheduled,
                        const std::vector<double>& gamma_mw, std::size_t l, double n0_mw) {
  if (!scheduled[l]) return 0.0;
  double interference = 0.0;
  for (std::size_t k = 0; k < topo.link_count(); ++k)
    if (k != l && scheduled[k]) interference += gamma_mw[k] * topo.gains(k, l);
  return sinr(gamma_mw[l] * topo.gains(l, l), interference, n0_mw);
}

/// splitmix64-seeded xoshiro256** generator with platform-independent helpers.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) {
    for (auto& s : state_) s = splitmix(seed);
  }

  static std::uint64_t splitmix(std::uint64_t& x) {
    std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Independent stream derived from a base seed and a stream tag.
  static Rng stream(std::uint64_t seed, std::uint64_t tag) {
    std::uint64_t x = seed ^ (tag * 0xd1b54a32d192ed03ULL);
    return Rng(splitmix(x));
  }

  std::uint64_t next() {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("Rng::below(0)");
    const std::uint64_t limit = (~std::uint64_t{0}) - (~std::uint64_t{0}) % n;
    std::uint64_t x;
    do x = next();
    while (x >= limit);
    return x % n;
  }

  double exponential(double rate) { return -std::log1p(-uniform()) / rate; }

  /// Poisson count by inversion; fine for the small means used per frame.
  std::uint64_t poisson(double mean) {
    if (mean <= 0) return 0;
    if (mean > 500) {
      // Normal approximation keeps large means cheap.
      const double u1 = uniform(), u2 = uniform();
      const double z = std::sqrt(-2.0 * std::log1p(-u1)) * std::cos(2 * kPi * u2);
      const double v = std::round(mean + std::sqrt(mean) * z);
      return v < 0 ? 0 : static_cast<std::uint64_t>(v);
    }
    const double limit = std::exp(-mean);
    std::uint64_t k = 0;
    double prod = uniform();
    while (prod > limit) {
      ++k;
      prod *= uniform();
    }
    return k;
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
  std::uint64_t state_[4];
};

}  // namespace jstpc
