#pragma once

// Interference geometry of an unbounded hexagonal lattice of concurrent links.
//
// Every cell of circumradius r_g holds one link of length d. With the target
// link's source at the origin and its destination at (d, 0), interfering
// sources sit at r_g * (sqrt3*m + sqrt3*n/2, 3n/2) for (m, n) != (0, 0).
// Everything below is expressed in the scale-free ratio r = r_g / d.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "jstpc/units.hpp"

namespace jstpc {

struct LatticeConfig {
  double alpha = 3.4;
  int truncation_radius = 5000;  // box bound M on |m|, |n|
  double tail_tolerance = 1e-6;  // relative

  void validate() const {
    if (!(alpha > 2)) throw std::domain_error("lattice sum diverges for alpha <= 2");
    if (truncation_radius < 1) throw std::invalid_argument("truncation radius must be >= 1");
    if (!(tail_tolerance > 0)) throw std::invalid_argument("tail tolerance must be positive");
  }
};

/// Distances (in units of d) from every interferer with |m|,|n| <= M to the destination.
inline std::vector<double> interferer_distances(double rg_over_d, int M) {
  if (!(rg_over_d > 0)) throw std::domain_error("interferer_distances: ratio must be positive");
  if (M < 1) throw std::invalid_argument("interferer_distances: M must be >= 1");
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>((2 * M + 1) * (2 * M + 1) - 1));
  for (int m = -M; m <= M; ++m) {
    for (int n = -M; n <= M; ++n) {
      if (m == 0 && n == 0) continue;
      const double x = m * kSqrt3 * rg_over_d + n * kSqrt3 * rg_over_d / 2.0 - 1.0;
      const double y = 1.5 * n * rg_over_d;
      out.push_back(std::hypot(x, y));
    }
  }
  return out;
}

class HexLattice {
 public:
  // F is monotone only above r = 1/sqrt3, where the nearest interferer crosses the destination.
  static constexpr double kBracketLo = 0.6;
  static constexpr double kBracketHi = 64.0;

  // Small boxes are summed directly. Large ones use an exact inner disk, an
  // expansion for everything outside it, and subtract the smooth integral over
  // the region outside the box (its error falls off as M^-3).
  static constexpr int kDirectBoxLimit = 64;

  explicit HexLattice(LatticeConfig cfg) : cfg_(cfg) {
    cfg_.validate();
    int k = 48;
    build_disk(k);
    // The tail correction error is estimated at the far end of the bracket, where it is largest.
    while (tail_error_estimate(kBracketHi) > cfg_.tail_tolerance && k < 2048) {
      k *= 2;
      build_disk(k);
    }
    const int box = cfg_.truncation_radius;
    if (box < kDirectBoxLimit || box <= (2 * k) / kSqrt3 + 1) {
      build_box(box);
    } else {
      box_coeff_ = box_exterior_coefficient(cfg_.alpha) * std::pow(box + 0.5, 2.0 - cfg_.alpha);
    }
  }

  const LatticeConfig& config() const { return cfg_; }
  double alpha() const { return cfg_.alpha; }
  int index_radius() const { return radius_; }
  bool direct_box() const { return direct_; }
  std::size_t term_count() const { return ux_.size(); }

  /// Sum of (d_i0/d)^-alpha over the whole lattice.
  double interference_sum(double r) const {
    require_ratio(r);
    const double half = -cfg_.alpha / 2.0;
    double s = 0.0;
    for (std::size_t i = 0; i < ux_.size(); ++i) {
      const double dd = r * r * u2_[i] - 2.0 * r * ux_[i] + 1.0;
      if (dd <= 0.0) return kInfSum;
      s += std::pow(dd, half);
    }
    return direct_ ? s : s + tail(r) - box_coeff_ * std::pow(r, -cfg_.alpha);
  }

  double interference_sum_derivative(double r) const {
    require_ratio(r);
    const double a = cfg_.alpha;
    double s = 0.0;
    for (std::size_t i = 0; i < ux_.size(); ++i) {
      const double dd = r * r * u2_[i] - 2.0 * r * ux_[i] + 1.0;
      const double ddr = 2.0 * r * u2_[i] - 2.0 * ux_[i];
      s += -a / 2.0 * std::pow(dd, -a / 2.0 - 1.0) * ddr;
    }
    return direct_ ? s : s + tail_derivative(r) + a * box_coeff_ * std::pow(r, -a - 1.0);
  }

  /// Asymptotic SINR at relative spacing r.
  double F(double r) const {
    const double s = interference_sum(r);
    return s >= kInfSum ? 0.0 : 1.0 / s;
  }

  double dF(double r) const {
    const double s = interference_sum(r);
    return -interference_sum_derivative(r) / (s * s);
  }

  /// Area spectral efficiency (bit/s/Hz per d^2).
  double G(double r) const { return std::log2(1.0 + F(r)) / (1.5 * kSqrt3 * r * r); }

  double dG(double r) const {
    const double f = F(r);
    const double area = 1.5 * kSqrt3 * r * r;
    const double dlog = dF(r) / ((1.0 + f) * std::log(2.0));
    return (dlog * area - std::log2(1.0 + f) * 3.0 * kSqrt3 * r) / (area * area);
  }

  /// Relative spacing that yields SINR `eta`, by bisection on the monotone F.
  double F_inverse(double eta, double lo = kBracketLo, double hi = kBracketHi, double tol = 1e-8) const {
    if (!(eta > 0)) throw std::range_error("F_inverse: SINR must be positive");
    const double f_lo = F(lo), f_hi = F(hi);
    if (eta < f_lo || eta > f_hi) throw std::range_error("F_inverse: SINR outside attainable bracket");
    while (hi - lo > tol) {
      const double mid = 0.5 * (lo + hi);
      if (F(mid) < eta)
        lo = mid;
      else
        hi = mid;
    }
    return 0.5 * (lo + hi);
  }

  /// Estimated relative error of the corrected sum: tail mass over M^2.
  double tail_error_estimate(double r) const {
    if (direct_) return 0.0;
    double raw = 0.0;
    const double half = -cfg_.alpha / 2.0;
    for (std::size_t i = 0; i < ux_.size(); ++i) raw += std::pow(r * r * u2_[i] - 2.0 * r * ux_[i] + 1.0, half);
    return std::abs(tail(r)) / raw / (static_cast<double>(radius_) * radius_);
  }

 private:
  static constexpr double kInfSum = 1e300;
  static constexpr int kTailTerms = 8;

  static void require_ratio(double r) {
    if (!(r > 0)) throw std::domain_error("lattice: r_g/d must be positive");
  }

  // Integral of |A u|^-alpha over the outside of the unit square in (m, n),
  // A mapping lattice indices to positions; done in polar form per octant.
  static double box_exterior_coefficient(double a) {
    const int n = 2048;  // Simpson intervals per octant
    auto f = [a](double phi) {
      const double c = std::cos(phi), s = std::sin(phi);
      const double ex = kSqrt3 * c + kSqrt3 / 2.0 * s, ey = 1.5 * s;
      const double rb = 1.0 / std::max(std::abs(c), std::abs(s));
      return std::pow(ex * ex + ey * ey, -a / 2.0) * std::pow(rb, 2.0 - a) / (a - 2.0);
    };
    double total = 0.0;
    for (int oct = 0; oct < 8; ++oct) {
      const double lo = oct * kPi / 4.0, h = kPi / 4.0 / n;
      double s = f(lo) + f(lo + kPi / 4.0);
      for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(lo + i * h);
      total += s * h / 3.0;
    }
    return total;
  }

  void build_box(int m_max) {
    direct_ = true;
    ux_.clear();
    u2_.clear();
    for (int m = -m_max; m <= m_max; ++m) {
      for (int n = -m_max; n <= m_max; ++n) {
        if (m == 0 && n == 0) continue;
        const double x = kSqrt3 * m + kSqrt3 * n / 2.0;
        const double y = 1.5 * n;
        ux_.push_back(x);
        u2_.push_back(x * x + y * y);
      }
    }
  }

  void build_disk(int k) {
    radius_ = k;
    ux_.clear();
    u2_.clear();
    std::size_t count = 0;
    const long kk = static_cast<long>(k) * k;
    for (int m = -2 * k - 1; m <= 2 * k + 1; ++m) {
      for (int n = -2 * k - 1; n <= 2 * k + 1; ++n) {
        const long q = static_cast<long>(m) * m + static_cast<long>(m) * n + static_cast<long>(n) * n;
        if (q > kk) continue;
        ++count;
        if (q == 0) continue;
        const double x = kSqrt3 * m + kSqrt3 * n / 2.0;
        const double y = 1.5 * n;
        ux_.push_back(x);
        u2_.push_back(x * x + y * y);
      }
    }
    // Disk holding the same number of Voronoi cells as the summed points.
    omega_ = kSqrt3 * std::sqrt(static_cast<double>(count) * (kSqrt3 / 2.0) / kPi);
    coeff_.assign(kTailTerms, 0.0);
    double poch = 1.0;
    for (int j = 0; j < kTailTerms; ++j) {
      if (j > 0) poch *= (cfg_.alpha / 2.0 + j - 1) / j;
      coeff_[j] = poch * poch;
    }
  }

  // Uniform-density integral of |x - e|^-alpha outside radius R = omega*r, expanded in 1/R^2.
  double tail(double r) const {
    const double a = cfg_.alpha;
    const double big_r = omega_ * r;
    double s = 0.0;
    for (int j = 0; j < kTailTerms; ++j) s += coeff_[j] * std::pow(big_r, 2.0 - a - 2.0 * j) / (a - 2.0 + 2.0 * j);
    return 4.0 * kPi / (3.0 * kSqrt3) / (r * r) * s;
  }

  double tail_derivative(double r) const {
    const double a = cfg_.alpha;
    double s = 0.0;
    for (int j = 0; j < kTailTerms; ++j)
      s += coeff_[j] * std::pow(omega_, 2.0 - a - 2.0 * j) * (-a - 2.0 * j) * std::pow(r, -a - 2.0 * j - 1.0) /
           (a - 2.0 + 2.0 * j);
    return 4.0 * kPi / (3.0 * kSqrt3) * s;
  }

  LatticeConfig cfg_;
  int radius_ = 0;
  bool direct_ = false;
  double box_coeff_ = 0.0;
  double omega_ = 0.0;
  std::vector<double> ux_;
  std::vector<double> u2_;
  std::vector<double> coeff_;
};

/// Cubic Hermite table of log r against log F for fast repeated inversion.
class LatticeInverseTable {
 public:
  explicit LatticeInverseTable(const HexLattice& lattice, double lo = HexLattice::kBracketLo,
                               double hi = HexLattice::kBracketHi, int nodes = 1024)
      : alpha_(lattice.alpha()) {
    if (nodes < 2 || !(lo > 0) || !(hi > lo)) throw std::invalid_argument("LatticeInverseTable: bad range");
    y_.resize(nodes);
    x_.resize(nodes);
    slope_.resize(nodes);
    for (int i = 0; i < nodes; ++i) {
      const double r = lo * std::pow(hi / lo, static_cast<double>(i) / (nodes - 1));
      const double f = lattice.F(r);
      const double df = lattice.dF(r);
      if (!(f > 0) || !(df > 0)) throw std::domain_error("LatticeInverseTable: F not increasing on range");
      x_[i] = std::log(r);
      y_[i] = std::log(f);
      slope_[i] = f / (r * df);  // d log r / d log F
      if (i > 0 && !(y_[i] > y_[i - 1])) throw std::domain_error("LatticeInverseTable: F not monotone");
    }
  }

  double alpha() const { return alpha_; }
  double min_sinr() const { return std::exp(y_.front()); }
  double max_sinr() const { return std::exp(y_.back()); }

  double inverse(double eta) const {
    if (!(eta > 0)) throw std::range_error("LatticeInverseTable: SINR must be positive");
    const double y = std::log(eta);
    if (y < y_.front() || y > y_.back()) throw std::range_error("LatticeInverseTable: SINR outside table");
    auto it = std::upper_bound(y_.begin(), y_.end(), y);
    std::size_t i = (it == y_.begin()) ? 0 : static_cast<std::size_t>(it - y_.begin()) - 1;
    if (i + 1 >= y_.size()) i = y_.size() - 2;
    const double h = y_[i + 1] - y_[i];
    const double t = (y - y_[i]) / h;
    const double t2 = t * t, t3 = t2 * t;
    const double h00 = 2 * t3 - 3 * t2 + 1, h10 = t3 - 2 * t2 + t;
    const double h01 = -2 * t3 + 3 * t2, h11 = t3 - t2;
    return std::exp(h00 * x_[i] + h10 * h * slope_[i] + h01 * x_[i + 1] + h11 * h * slope_[i + 1]);
  }

 private:
  double alpha_;
  std::vector<double> y_;
  std::vector<double> x_;
  std::vector<double> slope_;
};

inline double lattice_F(double rg_over_d, const LatticeConfig& cfg) { return HexLattice(cfg).F(rg_over_d); }
inline double lattice_G(double rg_over_d, const LatticeConfig& cfg) { return HexLattice(cfg).G(rg_over_d); }
inline double lattice_F_inverse(double eta, const LatticeConfig& cfg) { return HexLattice(cfg).F_inverse(eta); }

}  // namespace jstpc
