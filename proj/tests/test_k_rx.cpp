#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <set>

#include "ebcast/k_rx.hpp"
#include "oracles.hpp"

using namespace ebcast;
using Catch::Approx;

namespace {
const Geometry kFigGeometry{4.0, 0.2, 10.0};

JointStateTable fig_joint(double velocity = 60.0, int receivers = 2) {
  const auto j = per_vehicle_joint(kFigGeometry, VehicleProfile{velocity});
  return product_joint(std::vector<PerVehicleJoint>(static_cast<std::size_t>(receivers), j),
                       receivers);
}

std::set<std::uint32_t> as_set(const std::vector<std::uint32_t>& v) {
  return {v.begin(), v.end()};
}

// receiver subset {a, b, ...} -> mask
template <typename... Rx>
std::uint32_t subset(int K, Rx... rx) {
  std::uint32_t m = 0;
  for (int k : {rx...}) m |= receiver_mask(k, K);
  return m;
}
}  // namespace

TEST_CASE("action set sizes") {
  const ActionSet a2(2);
  CHECK(a2.size() == 3 + 1);
  const ActionSet a4(4);
  CHECK(a4.size() == 15 + 6);
  CHECK(a4[static_cast<std::size_t>(a4.index_mix(2, 4))].name(4) == "2x4");
  CHECK(a4[static_cast<std::size_t>(a4.index_in(subset(4, 1, 3)))].name(4) == "13");
}

TEST_CASE("sc_set examples") {
  // K=2, U={1}, J={1,2} -> {01}
  CHECK(as_set(sc_set(subset(2, 1), subset(2, 1, 2), 2)) ==
        std::set<std::uint32_t>{0b01});
  // K=3, U={1}, J={1,2} -> {010}
  CHECK(as_set(sc_set(subset(3, 1), subset(3, 1, 2), 3)) ==
        std::set<std::uint32_t>{0b010});
  // K=3, U={1,2}, J={1,2,3} -> {001, 011, 101}
  CHECK(as_set(sc_set(subset(3, 1, 2), subset(3, 1, 2, 3), 3)) ==
        std::set<std::uint32_t>({0b001, 0b011, 0b101}));
  CHECK_THROWS_AS(sc_set(subset(2, 1), subset(2, 1), 2), SubsetError);
  CHECK_THROWS_AS(sc_set(subset(3, 1, 2), subset(3, 1, 3), 3), SubsetError);
}

TEST_CASE("jc_set examples") {
  CHECK(as_set(jc_set(subset(2, 1), subset(2, 1, 2), 2)) ==
        std::set<std::uint32_t>{subset(2, 1, 2)});
  CHECK(as_set(jc_set(subset(3, 1), subset(3, 1, 2, 3), 3)) ==
        std::set<std::uint32_t>(
            {subset(3, 1, 2), subset(3, 1, 3), subset(3, 1, 2, 3)}));
  CHECK(as_set(jc_set(subset(3, 1, 2), subset(3, 1, 2, 3), 3)) ==
        std::set<std::uint32_t>{subset(3, 1, 2, 3)});
}

TEST_CASE("states partition across realized overhearing sets") {
  for (int K = 2; K <= 4; ++K) {
    const std::uint32_t full = full_mask(K);
    for (std::uint32_t u = 1; u <= full; ++u) {
      for (std::uint32_t s = 0; s <= full; ++s) {
        if ((s & u) == u) continue;  // S_c requires a miss inside U
        int hits = 0;
        for (std::uint32_t j = 1; j <= full; ++j) {
          if ((u & j) != u || u == j) continue;
          const auto states = sc_set(u, j, K);
          hits += static_cast<int>(std::count(states.begin(), states.end(), s));
        }
        // s belongs to S_c(U, J) for exactly one J iff someone overheard
        const int expected = (u | s) != u ? 1 : 0;
        CHECK(hits == expected);
      }
    }
  }
}

TEST_CASE("rate_of on concentrated policies") {
  const auto joint = fig_joint();
  AlphaPolicy p1(2);
  for (std::uint32_t h = 0; h < 4; ++h)
    p1.at(p1.actions().index_in(receiver_mask(1, 2)), h) = 1.0;
  const auto r1 = rate_of(p1, joint);
  CHECK(r1[0] == Approx(0.634069).margin(1e-6));
  CHECK(r1[1] == Approx(0.0).margin(1e-15));

  AlphaPolicy mix(2);
  for (std::uint32_t h = 0; h < 4; ++h)
    mix.at(mix.actions().index_mix(1, 2), h) = 1.0;
  const auto rm = rate_of(mix, joint);
  CHECK(rm[0] == Approx(0.634069).margin(1e-6));
  CHECK(rm[1] == Approx(0.634069).margin(1e-6));

  const auto rz = rate_of(AlphaPolicy(2), joint);
  CHECK(rz[0] == Approx(0.0).margin(1e-15));
  CHECK(rz[1] == Approx(0.0).margin(1e-15));
}

TEST_CASE("K=2 residual closed form") {
  const auto joint = fig_joint();
  const CounterRng rng(2718);
  const auto p_01 = event_vector(joint, event_single(0b01));
  const auto p_any = event_vector(joint, event_some_received(2));
  const auto p_on1 = event_vector(joint, event_receiver_on(1, 2));
  for (std::uint64_t trial = 0; trial < 20; ++trial) {
    AlphaPolicy alpha(2);
    for (std::uint32_t h = 0; h < 4; ++h) {
      double total = 0.0;
      std::array<double, 4> draw{};
      for (std::size_t a = 0; a < 4; ++a) {
        draw[a] = -std::log(1.0 - rng.uniform(trial * 16 + h * 4 + a));
        total += draw[a];
      }
      for (std::size_t a = 0; a < 4; ++a)
        alpha.at(static_cast<int>(a), h) = draw[a] / total;
    }
    const auto beta = BetaPolicy::ones(2);
    const auto residuals = constraint_residuals(alpha, beta, joint);
    REQUIRE(residuals.size() == 2);
    for (const auto& r : residuals) {
      // residual(k, {1,2}) = alpha_k . p_{0 k-miss} * beta + mix . p_any
      //                      - alpha_common . p_{s_k = 1}
      const int a_k = alpha.actions().index_in(receiver_mask(r.k, 2));
      const int a_common = alpha.actions().index_in(full_mask(2));
      const int a_mix = alpha.actions().index_mix(1, 2);
      const auto p_sk =
          event_vector(joint, event_receiver_on(r.k, 2));
      const auto p_gen = event_vector(
          joint, event_single(r.k == 1 ? 0b01u : 0b10u));
      double expect = 0.0;
      for (std::uint32_t h = 0; h < 4; ++h)
        expect += alpha.at(a_k, h) * p_gen.p[h] + alpha.at(a_mix, h) * p_any.p[h] -
                  alpha.at(a_common, h) * p_sk.p[h];
      CHECK(r.value == Approx(expect).margin(1e-12));
    }
  }
}

TEST_CASE("K=2 residuals with beta=1 equal the two-receiver share constraints") {
  const auto joint = fig_joint();
  const CounterRng rng(1618);
  for (std::uint64_t trial = 0; trial < 100; ++trial) {
    AlphaTriple t;
    for (std::size_t h = 0; h < 4; ++h) {
      // random point with alpha1 + alpha2 + mix <= 1
      double draw[4];
      double total = 0.0;
      for (std::size_t a = 0; a < 4; ++a) {
        draw[a] = -std::log(1.0 - rng.uniform(trial * 16 + h * 4 + a));
        total += draw[a];
      }
      t.alpha1[h] = draw[0] / total;
      t.alpha2[h] = draw[1] / total;
      t.mix[h] = draw[2] / total;
    }
    const auto alpha = to_alpha_policy(t);
    const auto residuals = constraint_residuals(alpha, BetaPolicy::ones(2), joint);
    const auto prop3 = prop3_rates(joint, t);
    for (const auto& r : residuals) {
      const double expected = r.k == 1 ? -prop3.slack_rx1 : -prop3.slack_rx2;
      CHECK(r.value == Approx(expected).margin(1e-12));
    }
  }
}

TEST_CASE("zero policy has zero residuals") {
  const auto joint = fig_joint();
  const auto residuals =
      constraint_residuals(AlphaPolicy(2), BetaPolicy::uniform(2), joint);
  for (const auto& r : residuals) CHECK(r.value == Approx(0.0).margin(1e-15));
}

TEST_CASE("beta policy structure and seeds") {
  const BetaPolicy b3 = BetaPolicy::ones(3);
  CHECK_NOTHROW(b3.validate());
  CHECK_NOTHROW(BetaPolicy::uniform(3).validate());
  CHECK_NOTHROW(BetaPolicy::random(3, CounterRng(9), 0).validate());
  // K=2 has exactly the two forced side-information routes
  const BetaPolicy b2 = BetaPolicy::ones(2);
  CHECK(b2.num_vars() == 2);
  CHECK(b2.get(subset(2, 1), subset(2, 1, 2), 0b01) == Approx(1.0));
  CHECK(b2.get(subset(2, 2), subset(2, 1, 2), 0b10) == Approx(1.0));
  for (const auto& g : b2.groups()) CHECK_FALSE(g.free_mass);
  // at K=3 the everyone-layer groups of two-receiver signals may drop mass
  bool any_free = false;
  for (const auto& g : b3.groups())
    if (g.free_mass) {
      any_free = true;
      CHECK(popcount(g.u) == 2);
      CHECK(g.realized == full_mask(3));
    }
  CHECK(any_free);
}

TEST_CASE("solver reproduces the two-receiver capacity") {
  const auto joint = fig_joint();
  SolveOptions opts;
  opts.random_starts = 2;
  const auto sol = solve(joint, opts);
  CHECK(sol.objective == Approx(0.280707).margin(1e-3));
  CHECK(sol.rates[0] == Approx(sol.rates[1]).margin(1e-6));
  CHECK_NOTHROW(sol.alpha.validate());
  CHECK_NOTHROW(sol.beta.validate());
  for (const auto& r : sol.residuals) CHECK(r.value <= 1e-8);
  CHECK(sol.converged);
}

TEST_CASE("erasure-free solver time-shares to one half") {
  PerVehicleJoint sure;
  sure.at(1, 1) = 1.0;
  const auto joint = product_joint({sure, sure});
  SolveOptions opts;
  opts.random_starts = 1;
  const auto sol = solve(joint, opts);
  CHECK(sol.objective == Approx(0.5).margin(1e-9));
}

TEST_CASE("K=3 feedback-only symmetric value lands in the reference bracket") {
  const auto joint = decouple_estimate(fig_joint(60.0, 3));
  SolveOptions opts;
  opts.k_max = 3;
  opts.random_starts = 2;
  const auto sol = solve(joint, opts);
  const double eps = std::exp(-4.0 * M_PI * 0.04);
  const double lower = (1.0 - eps) / 3.0;
  const double upper =
      1.0 / (1.0 / (1.0 - eps) + 1.0 / (1.0 - eps * eps) + 1.0 / (1.0 - eps * eps * eps));
  CHECK(lower == Approx(0.13169).margin(1e-5));
  CHECK(upper == Approx(0.18544).margin(1e-5));
  CHECK(sol.objective >= lower - 1e-9);
  CHECK(sol.objective <= upper + 1e-9);
  for (const auto& r : sol.residuals) CHECK(r.value <= 1e-8);
}

TEST_CASE("weighted objective favors the weighted receiver") {
  const auto joint = fig_joint();
  SolveOptions opts;
  opts.objective = SolveOptions::Objective::Weighted;
  opts.weights = {1.0, 0.05};
  opts.random_starts = 1;
  const auto sol = solve(joint, opts);
  CHECK(sol.rates[0] > sol.rates[1]);
  CHECK(sol.rates[0] == Approx(0.395077).margin(1e-6));  // single-user cap
}

TEST_CASE("estimate-aware policies beat estimate-blind ones") {
  // enlarging the policy class never hurts: compare against the feedback-only
  // restriction (alpha constant across estimates via the decoupled joint)
  const CounterRng rng(404);
  for (std::uint64_t trial = 0; trial < 50; ++trial) {
    const auto joint = oracle::random_joint(rng, trial, 2);
    SolveOptions opts;
    opts.random_starts = 1;
    const auto mixed = solve(joint, opts);
    const auto blind = solve(decouple_estimate(joint), opts);
    CHECK(mixed.objective >= blind.objective - 1e-7);
  }
}

TEST_CASE("exhausted rounds surface as a no-convergence flag") {
  const auto joint = fig_joint();
  SolveOptions opts;
  opts.random_starts = 0;
  opts.max_rounds = 1;
  const auto sol = solve(joint, opts);
  CHECK_FALSE(sol.converged);
  // the incumbent is still verified feasible
  for (const auto& r : sol.residuals) CHECK(r.value <= 1e-8);
  CHECK(sol.objective == Approx(0.280707).margin(1e-3));
}

TEST_CASE("multistart objective is monotone in the number of starts") {
  const auto joint = fig_joint(60.0, 3);
  double prev = -1.0;
  for (int starts : {0, 2, 5}) {
    SolveOptions opts;
    opts.k_max = 3;
    opts.random_starts = starts;
    opts.max_rounds = 12;
    const auto sol = solve(joint, opts);
    CHECK(sol.objective >= prev - 1e-12);
    prev = sol.objective;
  }
}

TEST_CASE("solver rejects oversized instances") {
  const auto joint = fig_joint(60.0, 3);
  SolveOptions opts;
  opts.k_max = 2;
  CHECK_THROWS_AS(solve(joint, opts), SizeLimitError);
}
