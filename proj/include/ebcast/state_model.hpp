#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <vector>

#include "ebcast/common.hpp"

namespace ebcast {

// Radio-site deployment model: PPP density lambda (km^-2), LoS ball radius
// r_b (km), location-information delay t_s (s).
struct Geometry {
  double lambda = 4.0;
  double r_b = 0.2;
  double t_s = 10.0;

  void validate() const {
    if (!(lambda >= 0.0)) throw GeometryError("invalid-geometry: lambda must be >= 0");
    if (!(r_b > 0.0)) throw GeometryError("invalid-geometry: r_b must be > 0");
    if (!(t_s > 0.0)) throw GeometryError("invalid-geometry: t_s must be > 0");
  }

  double coverage_area() const { return M_PI * r_b * r_b; }
};

struct VehicleProfile {
  double velocity_kmh = 0.0;

  void validate() const {
    if (!(velocity_kmh >= 0.0))
      throw GeometryError("invalid-geometry: velocity must be >= 0");
  }

  // Displacement between the reported and actual location over the delay.
  double displacement_km(const Geometry& geom) const {
    return velocity_kmh * geom.t_s / 3600.0;
  }
};

// Area of the crescent a displaced LoS disk no longer covers.  Zero at d=0,
// grows to the full disk area A = pi r_b^2, and stays there for d >= 2 r_b.
inline double lens_displaced_area(double d, double r_b) {
  if (!(r_b > 0.0)) throw GeometryError("invalid-geometry: r_b must be > 0");
  if (!(d >= 0.0)) throw GeometryError("invalid-geometry: displacement must be >= 0");
  const double area = M_PI * r_b * r_b;
  if (d >= 2.0 * r_b) return area;
  // arccos argument clamped to absorb rounding at d -> 2 r_b
  const double c = std::clamp(d / (2.0 * r_b), -1.0, 1.0);
  const double v = area + 0.5 * d * std::sqrt(4.0 * r_b * r_b - d * d) -
                   2.0 * r_b * r_b * std::acos(c);
  return std::clamp(v, 0.0, area);
}

// Joint distribution of (S, S_hat) for one vehicle, entries j(s, s_hat).
struct PerVehicleJoint {
  std::array<double, 4> entries{};  // [s * 2 + s_hat]

  double operator()(int s, int s_hat) const {
    return entries[static_cast<std::size_t>(s * 2 + s_hat)];
  }
  double& at(int s, int s_hat) {
    return entries[static_cast<std::size_t>(s * 2 + s_hat)];
  }

  double p_state0() const { return entries[0] + entries[1]; }
  double p_estimate0() const { return entries[0] + entries[2]; }

  void validate() const {
    double sum = 0.0;
    for (double e : entries) {
      if (e < 0.0) throw ValidationError("per-vehicle joint has negative mass");
      sum += e;
    }
    if (std::abs(sum - 1.0) > 1e-12)
      throw ValidationError("per-vehicle joint does not sum to 1");
    if (std::abs(p_state0() - p_estimate0()) > 1e-9)
      throw ValidationError("per-vehicle state/estimate marginals differ");
  }
};

// Per-vehicle joint from the toy model.  The estimate marginal matches the
// state marginal by construction; when exp(-lambda A) is exactly 0 or 1 the
// conditional in the model is 0/0 and the continuous limit (S independent of
// S_hat with a point-mass marginal) is used instead.
inline PerVehicleJoint per_vehicle_joint(const Geometry& geom,
                                         const VehicleProfile& profile) {
  geom.validate();
  profile.validate();
  const double area = geom.coverage_area();
  const double a_k = lens_displaced_area(profile.displacement_km(geom), geom.r_b);
  const double q = std::exp(-geom.lambda * area);        // P(S=0) = P(S_hat=0)
  const double one_minus_q = -std::expm1(-geom.lambda * area);
  PerVehicleJoint j;
  if (q == 0.0 || q == 1.0) {
    j.at(0, 0) = q;
    j.at(1, 1) = 1.0 - q;
    return j;
  }
  const double cond00 = std::exp(-geom.lambda * a_k);    // P(S=0 | S_hat=0)
  const double miss = q * (-std::expm1(-geom.lambda * a_k));  // P(S=0,S_hat=1)
  j.at(0, 0) = q * cond00;
  j.at(0, 1) = miss;
  j.at(1, 0) = miss;
  j.at(1, 1) = one_minus_q - miss;
  j.validate();
  return j;
}

// Joint distribution P(S = s, S_hat = s_hat) over {0,1}^K x {0,1}^K.
// Receiver 1 is the most significant bit of a state string.
class JointStateTable {
 public:
  static constexpr int kHardMaxReceivers = 6;  // event masks are 64-bit

  JointStateTable(int K, std::vector<double> table)
      : k_(K), n_(1u << K), p_(std::move(table)) {
    if (K < 1 || K > kHardMaxReceivers)
      throw SizeLimitError("size-limit: K must be in [1, 6]");
    if (p_.size() != static_cast<std::size_t>(n_) * n_)
      throw ValidationError("joint table has wrong size");
  }

  int receivers() const { return k_; }
  std::uint32_t states() const { return n_; }

  double operator()(std::uint32_t s, std::uint32_t s_hat) const {
    return p_[static_cast<std::size_t>(s) * n_ + s_hat];
  }
  double& at(std::uint32_t s, std::uint32_t s_hat) {
    return p_[static_cast<std::size_t>(s) * n_ + s_hat];
  }

  std::vector<double> state_marginal() const {
    std::vector<double> m(n_, 0.0);
    for (std::uint32_t s = 0; s < n_; ++s)
      for (std::uint32_t h = 0; h < n_; ++h) m[s] += (*this)(s, h);
    return m;
  }

  std::vector<double> estimate_marginal() const {
    std::vector<double> m(n_, 0.0);
    for (std::uint32_t s = 0; s < n_; ++s)
      for (std::uint32_t h = 0; h < n_; ++h) m[h] += (*this)(s, h);
    return m;
  }

  double p_state_event(std::uint64_t state_set) const {
    double total = 0.0;
    for (std::uint32_t s = 0; s < n_; ++s)
      if (state_set & (std::uint64_t{1} << s))
        for (std::uint32_t h = 0; h < n_; ++h) total += (*this)(s, h);
    return total;
  }

  // P(S_k = 0), the per-receiver erasure probability.
  double erasure_probability(int k) const {
    double eps = 0.0;
    for (std::uint32_t s = 0; s < n_; ++s)
      if (!state_bit(s, k, k_))
        for (std::uint32_t h = 0; h < n_; ++h) eps += (*this)(s, h);
    return eps;
  }

  void validate() const {
    double sum = 0.0;
    for (double e : p_) {
      if (e < 0.0) throw ValidationError("joint table has negative mass");
      sum += e;
    }
    if (std::abs(sum - 1.0) > 1e-9)
      throw ValidationError("joint table does not sum to 1");
    const auto ms = state_marginal();
    const auto mh = estimate_marginal();
    for (std::uint32_t i = 0; i < n_; ++i)
      if (std::abs(ms[i] - mh[i]) > 1e-6)
        throw ValidationError("state and estimate marginals differ");
  }

 private:
  int k_;
  std::uint32_t n_;
  std::vector<double> p_;
};

inline JointStateTable product_joint(const std::vector<PerVehicleJoint>& per_vehicle,
                                     int k_max = 4) {
  const int K = static_cast<int>(per_vehicle.size());
  if (K < 2) throw SizeLimitError("size-limit: need at least 2 receivers");
  if (K > k_max) throw SizeLimitError("size-limit: K exceeds configured K_max");
  for (const auto& j : per_vehicle) j.validate();
  const std::uint32_t n = 1u << K;
  std::vector<double> table(static_cast<std::size_t>(n) * n, 1.0);
  for (std::uint32_t s = 0; s < n; ++s)
    for (std::uint32_t h = 0; h < n; ++h) {
      double v = 1.0;
      for (int k = 1; k <= K; ++k)
        v *= per_vehicle[static_cast<std::size_t>(k - 1)](state_bit(s, k, K),
                                                          state_bit(h, k, K));
      table[static_cast<std::size_t>(s) * n + h] = v;
    }
  return JointStateTable(K, std::move(table));
}

// For a state event E, the vector p_E[s_hat] = sum_{s in E} P(s, s_hat).
// `states` is a bitmask over state indices (bit s set <=> s in E).
struct EventVector {
  std::uint64_t states = 0;
  std::vector<double> p;

  double total() const { return std::accumulate(p.begin(), p.end(), 0.0); }
};

inline EventVector event_vector(const JointStateTable& joint,
                                std::uint64_t state_set) {
  EventVector ev;
  ev.states = state_set;
  ev.p.assign(joint.states(), 0.0);
  for (std::uint32_t s = 0; s < joint.states(); ++s) {
    if (!(state_set & (std::uint64_t{1} << s))) continue;
    for (std::uint32_t h = 0; h < joint.states(); ++h) ev.p[h] += joint(s, h);
  }
  return ev;
}

inline EventVector event_vector(const JointStateTable& joint,
                                const std::function<bool(std::uint32_t)>& pred) {
  std::uint64_t set = 0;
  for (std::uint32_t s = 0; s < joint.states(); ++s)
    if (pred(s)) set |= std::uint64_t{1} << s;
  return event_vector(joint, set);
}

// Common state events.
inline std::uint64_t event_all(int K) {
  const std::uint32_t n = 1u << K;
  return n >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << n) - 1;
}

inline std::uint64_t event_single(std::uint32_t s) { return std::uint64_t{1} << s; }

// {s : s != 0...0}
inline std::uint64_t event_some_received(int K) { return event_all(K) & ~std::uint64_t{1}; }

// {s : s_k = 1}
inline std::uint64_t event_receiver_on(int k, int K) {
  std::uint64_t set = 0;
  for (std::uint32_t s = 0; s < (1u << K); ++s)
    if (state_bit(s, k, K)) set |= event_single(s);
  return set;
}

// {s : s_{K \ {k,j}} = 0...0, s_{k,j} != 0...0}
inline std::uint64_t event_pair_active(int k, int j, int K) {
  const std::uint32_t pair = receiver_mask(k, K) | receiver_mask(j, K);
  std::uint64_t set = 0;
  for (std::uint32_t s = 0; s < (1u << K); ++s)
    if ((s & ~pair & full_mask(K)) == 0 && (s & pair) != 0) set |= event_single(s);
  return set;
}

inline std::uint64_t event_complement(std::uint64_t set, int K) {
  return event_all(K) & ~set;
}

}  // namespace ebcast
