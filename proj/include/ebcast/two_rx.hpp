#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include "ebcast/polygon.hpp"
#include "ebcast/state_model.hpp"

namespace ebcast {

// Witness for a binding weighted-rate bound: family is the protected
// receiver (the one whose rate carries the weight mu).  mu may be infinite,
// in which case the bound is the single-user limit R_k <= P(S_k = 1).
struct MuCertificate {
  double mu = 1.0;
  bool mu_infinite = false;
  int family = 2;
  double bound = 0.0;
};

struct SymmetricRate {
  double rate = 0.0;
  MuCertificate certificate;
};

// 1^T max{p_{s != 0..0}, mu * p_{s_protected = 1}}, the right-hand side of
// the weighted bound R_other + mu * R_protected <= bound.
inline double weighted_bound(const JointStateTable& joint, double mu,
                             int protected_receiver) {
  const auto p_any = event_vector(joint, event_some_received(joint.receivers()));
  const auto p_on =
      event_vector(joint, event_receiver_on(protected_receiver, joint.receivers()));
  double total = 0.0;
  for (std::uint32_t h = 0; h < joint.states(); ++h)
    total += std::max(p_any.p[h], mu * p_on.p[h]);
  return total;
}

namespace detail {

// Finite mu candidates for one bound family: mu = 1 plus every breakpoint
// ratio p_{s != 0}[h] / p_E[h] that is >= 1.  Ratios with zero denominator
// are the mu -> infinity single-user limit, handled separately.
inline std::vector<double> mu_candidates(const EventVector& p_any,
                                         const EventVector& p_on) {
  std::vector<double> mus{1.0};
  for (std::size_t h = 0; h < p_any.p.size(); ++h) {
    if (p_on.p[h] <= 0.0) continue;
    const double r = p_any.p[h] / p_on.p[h];
    if (r >= 1.0 && std::isfinite(r)) mus.push_back(r);
  }
  std::sort(mus.begin(), mus.end());
  mus.erase(std::unique(mus.begin(), mus.end()), mus.end());
  return mus;
}

}  // namespace detail

// Exact two-receiver region: intersection over mu >= 1 of both weighted
// bound families plus the single-user limits.  The bound is piecewise linear
// in mu, so the finite breakpoint set is exact.
inline RegionPolygon region_polygon(const JointStateTable& joint) {
  if (joint.receivers() != 2)
    throw SizeLimitError("size-limit: region_polygon needs K = 2");
  const auto p_any = event_vector(joint, event_some_received(2));
  if (p_any.total() <= 0.0)
    throw DegenerateJointError("degenerate-joint: P(S != 00) = 0, region is {(0,0)}");

  std::vector<HalfPlane> planes;
  planes.push_back({-1.0, 0.0, 0.0});
  planes.push_back({0.0, -1.0, 0.0});
  for (int protected_rx = 1; protected_rx <= 2; ++protected_rx) {
    const auto p_on = event_vector(joint, event_receiver_on(protected_rx, 2));
    for (double mu : detail::mu_candidates(p_any, p_on)) {
      const double bound = weighted_bound(joint, mu, protected_rx);
      if (protected_rx == 2)
        planes.push_back({1.0, mu, bound});
      else
        planes.push_back({mu, 1.0, bound});
    }
    // single-user limit (mu -> infinity slope)
    if (protected_rx == 2)
      planes.push_back({0.0, 1.0, p_on.total()});
    else
      planes.push_back({1.0, 0.0, p_on.total()});
  }
  return intersect_half_planes(std::move(planes));
}

// Largest r with (r, r) achievable, minimized over the finite candidate set
// of both families; works for asymmetric joints as well since every
// constraint has the form r * (1 + mu) <= bound.
inline SymmetricRate sym_rate_direct(const JointStateTable& joint) {
  if (joint.receivers() != 2)
    throw SizeLimitError("size-limit: sym_rate_direct needs K = 2");
  const auto p_any = event_vector(joint, event_some_received(2));
  SymmetricRate best;
  best.rate = std::numeric_limits<double>::infinity();
  const auto consider = [&](double rate, const MuCertificate& cert) {
    if (rate < best.rate - 1e-15) {
      best.rate = rate;
      best.certificate = cert;
    }
  };
  for (int protected_rx = 2; protected_rx >= 1; --protected_rx) {
    const auto p_on = event_vector(joint, event_receiver_on(protected_rx, 2));
    for (double mu : detail::mu_candidates(p_any, p_on)) {
      const double bound = weighted_bound(joint, mu, protected_rx);
      consider(bound / (1.0 + mu), {mu, false, protected_rx, bound});
    }
    consider(p_on.total(), {0.0, true, protected_rx, p_on.total()});
  }
  if (!std::isfinite(best.rate)) best = SymmetricRate{};
  return best;
}

// Closed-form symmetric-rate candidates for the symmetric toy model, with
// the validity-window flags and the direct minimization for cross-checking.
// r_sym_3 and the mixed-rate expression in the main text are the same
// formula; both are evaluated from independently coded expressions.
struct ClosedFormRates {
  double r_sym_1 = 0.0, r_sym_2 = 0.0, r_sym_3 = 0.0, r_sym_4 = 0.0;
  double r_sym_fb = 0.0;
  double r_sym_mixed = 0.0;  // main-text mixed-rate expression
  double mu_1 = 0.0, mu_2 = 0.0, mu_3 = 0.0, mu_4 = 0.0;
  bool marginal_in_window = false;  // 1/3 < e^{-lambda A} < 4/5
  bool lens_above_threshold = false;
  double direct_rate = 0.0;
  double closed_vs_direct_gap = 0.0;  // r_sym_3 - direct_rate
  bool closed_form_matches_direct = false;
};

inline ClosedFormRates sym_rate_closed_forms(const Geometry& geom,
                                             const VehicleProfile& profile) {
  geom.validate();
  profile.validate();
  const double area = geom.coverage_area();
  const double a_k = lens_displaced_area(profile.displacement_km(geom), geom.r_b);
  const double lam = geom.lambda;
  const double x = std::exp(-lam * area);  // e^{-lambda A}
  const double y = std::exp(-lam * a_k);   // e^{-lambda A_k}

  ClosedFormRates out;
  const double s1 = x * y;
  const double s3 = x - 1.0;
  const double s4 = y - 1.0;
  const double s2 = (x * x * s4 * s4) / (s3 * s3) - 1.0;
  const double s5 = (x * y * (y - 1.0)) / (x - 1.0) - 1.0;
  const double den_13 = s1 - 2.0 * x + 1.0;

  out.r_sym_1 = (1.0 - x * x) / ((s3 * s5) / den_13 + 1.0);
  out.r_sym_2 = -(s2 * s3 * s3 + x * x * (y * y - 1.0) - x * s2 * s3) /
                    ((s2 * s3) / den_13 + 1.0) +
                (x * (s1 * s4 - s3)) / ((s2 * s3) / den_13 + 1.0);
  {
    const double e_a = 1.0 / x;
    const double e_ak = 1.0 / y;
    out.r_sym_3 = (e_a - e_ak) / (2.0 * e_a * e_ak + e_a * e_a * e_ak) +
                  ((1.0 - x) * (1.0 + y)) / (2.0 + y);
  }
  out.r_sym_4 = ((1.0 - x) * s5) / (s5 + y - 1.0);
  out.r_sym_fb = (1.0 - x * x) / (2.0 + x);
  out.r_sym_mixed = x * (y - x) / (1.0 + 2.0 * x) + (1.0 - x) * (1.0 + y) / (2.0 + y);

  // breakpoint candidates p_{s != 00} ./ p_{01,11} in s_hat order 00,01,10,11
  const double j01 = x * (1.0 - y);          // P(S=0, S_hat=1) per vehicle
  const double j00 = x * y;
  const double j11 = (1.0 - x) - j01;
  out.mu_1 = (x * x - j00 * j00) / (x * j01);
  out.mu_2 = (x * (1.0 - x) - j00 * j01) / (x * j11);
  out.mu_3 = (x * (1.0 - x) - j01 * j00) / ((1.0 - x) * j01);
  out.mu_4 = ((1.0 - x) * (1.0 - x) - j01 * j01) / ((1.0 - x) * j11);

  out.marginal_in_window = (x > 1.0 / 3.0) && (x < 4.0 / 5.0);
  const double e_a = 1.0 / x;
  const double thr_arg = (e_a + 1.0) / (3.0 * e_a - e_a * e_a);
  out.lens_above_threshold = thr_arg > 0.0 && lam > 0.0 &&
                             a_k > std::log(thr_arg) / lam;

  const auto joint = product_joint({per_vehicle_joint(geom, profile),
                                    per_vehicle_joint(geom, profile)});
  out.direct_rate = sym_rate_direct(joint).rate;
  out.closed_vs_direct_gap = out.r_sym_3 - out.direct_rate;
  out.closed_form_matches_direct = std::abs(out.closed_vs_direct_gap) <= 1e-9;
  return out;
}

// K = 2 scheduling shares: per-estimate probabilities of the two private
// signals and their mixture; the leftover is the common retransmission.
struct AlphaTriple {
  std::array<double, 4> alpha1{};
  std::array<double, 4> alpha2{};
  std::array<double, 4> mix{};

  void validate() const {
    for (std::size_t h = 0; h < 4; ++h) {
      for (double v : {alpha1[h], alpha2[h], mix[h]})
        if (v < -1e-12 || v > 1.0 + 1e-12)
          throw ValidationError("alpha entries must be in [0,1]");
      if (alpha1[h] + alpha2[h] + mix[h] > 1.0 + 1e-10)
        throw ValidationError("alpha1 + alpha2 + mix must be <= 1 componentwise");
    }
  }
};

struct BetaPair {
  std::array<double, 4> beta1{};
  std::array<double, 4> beta2{};

  void validate() const {
    for (std::size_t h = 0; h < 4; ++h)
      for (double v : {beta1[h], beta2[h]})
        if (v < -1e-12 || v > 1.0 + 1e-12)
          throw ValidationError("beta entries must be in [0,1]");
  }
};

struct Prop3Result {
  bool feasible = false;
  double r1 = 0.0;
  double r2 = 0.0;
  double slack_rx1 = 0.0;  // constraint protecting receiver 1's side information
  double slack_rx2 = 0.0;
};

inline Prop3Result prop3_rates(const JointStateTable& joint, const AlphaTriple& alpha) {
  if (joint.receivers() != 2)
    throw SizeLimitError("size-limit: prop3_rates needs K = 2");
  alpha.validate();
  const auto p_any = event_vector(joint, event_some_received(2));
  const auto p_on1 = event_vector(joint, event_receiver_on(1, 2));
  const auto p_on2 = event_vector(joint, event_receiver_on(2, 2));
  const auto dot = [](const std::array<double, 4>& a, const std::array<double, 4>& b,
                      const std::vector<double>& v) {
    double acc = 0.0;
    for (std::size_t h = 0; h < 4; ++h) acc += (a[h] + b[h]) * v[h];
    return acc;
  };
  Prop3Result out;
  out.r1 = dot(alpha.alpha1, alpha.mix, p_any.p);
  out.r2 = dot(alpha.alpha2, alpha.mix, p_any.p);
  const double lhs1 = dot(alpha.alpha2, alpha.mix, p_on1.p) + out.r1;
  const double lhs2 = dot(alpha.alpha1, alpha.mix, p_on2.p) + out.r2;
  out.slack_rx1 = p_on1.total() - lhs1;
  out.slack_rx2 = p_on2.total() - lhs2;
  out.feasible = out.slack_rx1 >= -1e-10 && out.slack_rx2 >= -1e-10;
  return out;
}

// Outer-bound pair to scheduling shares: the mixture takes the common part,
// the leftovers become private shares.
inline AlphaTriple beta_to_alpha(const BetaPair& beta) {
  beta.validate();
  AlphaTriple out;
  for (std::size_t h = 0; h < 4; ++h) {
    out.mix[h] = std::min(beta.beta1[h], beta.beta2[h]);
    out.alpha1[h] = std::max(beta.beta1[h] - beta.beta2[h], 0.0);
    out.alpha2[h] = std::max(beta.beta2[h] - beta.beta1[h], 0.0);
  }
  return out;
}

// Joint with the same marginals but estimate independent of the state
// (the feedback-only reduction).
inline JointStateTable decouple_estimate(const JointStateTable& joint) {
  const auto ms = joint.state_marginal();
  const auto mh = joint.estimate_marginal();
  std::vector<double> table(static_cast<std::size_t>(joint.states()) * joint.states());
  for (std::uint32_t s = 0; s < joint.states(); ++s)
    for (std::uint32_t h = 0; h < joint.states(); ++h)
      table[static_cast<std::size_t>(s) * joint.states() + h] = ms[s] * mh[h];
  return JointStateTable(joint.receivers(), std::move(table));
}

struct BaselineRegions {
  RegionPolygon feedback_only;
  RegionPolygon tdma;
};

inline BaselineRegions baseline_regions(const JointStateTable& joint) {
  if (joint.receivers() != 2)
    throw SizeLimitError("size-limit: baseline_regions needs K = 2");
  BaselineRegions out;
  out.feedback_only = region_polygon(decouple_estimate(joint));
  const double eps1 = joint.erasure_probability(1);
  const double eps2 = joint.erasure_probability(2);
  std::vector<HalfPlane> planes{{-1.0, 0.0, 0.0}, {0.0, -1.0, 0.0}};
  if (eps1 >= 1.0 || eps2 >= 1.0) {
    if (eps1 >= 1.0) planes.push_back({1.0, 0.0, 0.0});
    if (eps2 >= 1.0) planes.push_back({0.0, 1.0, 0.0});
    if (eps1 < 1.0) planes.push_back({1.0, 0.0, 1.0 - eps1});
    if (eps2 < 1.0) planes.push_back({0.0, 1.0, 1.0 - eps2});
  } else {
    planes.push_back({1.0 / (1.0 - eps1), 1.0 / (1.0 - eps2), 1.0});
  }
  out.tdma = intersect_half_planes(std::move(planes));
  return out;
}

}  // namespace ebcast
