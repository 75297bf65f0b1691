#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <cmath>

#include "ebcast/rng.hpp"
#include "ebcast/simplex.hpp"

using namespace ebcast;
using Catch::Approx;

TEST_CASE("basic maximization") {
  lp::Problem p;
  p.num_vars = 2;
  p.objective = {3.0, 2.0};
  p.add_row({1.0, 1.0}, lp::Rel::Le, 4.0);
  p.add_row({1.0, 3.0}, lp::Rel::Le, 6.0);
  const auto sol = lp::solve(p);
  REQUIRE(sol.status == lp::Status::Optimal);
  CHECK(sol.objective == Approx(12.0));
  CHECK(sol.x[0] == Approx(4.0));
  CHECK(sol.x[1] == Approx(0.0).margin(1e-12));
}

TEST_CASE("equality and ge rows") {
  lp::Problem p;
  p.num_vars = 2;
  p.objective = {1.0, 1.0};
  p.add_row({1.0, 1.0}, lp::Rel::Eq, 2.0);
  p.add_row({1.0, 0.0}, lp::Rel::Le, 1.5);
  p.add_row({0.0, 1.0}, lp::Rel::Ge, 0.25);
  const auto sol = lp::solve(p);
  REQUIRE(sol.status == lp::Status::Optimal);
  CHECK(sol.objective == Approx(2.0));
  CHECK(sol.x[0] + sol.x[1] == Approx(2.0));
  CHECK(sol.x[1] >= 0.25 - 1e-12);
}

TEST_CASE("negative rhs rows are normalized") {
  lp::Problem p;
  p.num_vars = 1;
  p.objective = {-1.0};  // minimize x
  p.add_row({-1.0}, lp::Rel::Le, -2.0);  // x >= 2
  const auto sol = lp::solve(p);
  REQUIRE(sol.status == lp::Status::Optimal);
  CHECK(sol.x[0] == Approx(2.0));
}

TEST_CASE("infeasible detection") {
  lp::Problem p;
  p.num_vars = 1;
  p.objective = {1.0};
  p.add_row({1.0}, lp::Rel::Le, 1.0);
  p.add_row({1.0}, lp::Rel::Ge, 2.0);
  CHECK(lp::solve(p).status == lp::Status::Infeasible);
}

TEST_CASE("unbounded detection") {
  lp::Problem p;
  p.num_vars = 2;
  p.objective = {1.0, 0.0};
  p.add_row({0.0, 1.0}, lp::Rel::Le, 1.0);
  CHECK(lp::solve(p).status == lp::Status::Unbounded);
}

TEST_CASE("beale cycling example terminates under bland") {
  lp::Problem p;
  p.num_vars = 4;
  p.objective = {0.75, -150.0, 0.02, -6.0};
  p.add_row({0.25, -60.0, -1.0 / 25.0, 9.0}, lp::Rel::Le, 0.0);
  p.add_row({0.5, -90.0, -1.0 / 50.0, 3.0}, lp::Rel::Le, 0.0);
  p.add_row({0.0, 0.0, 1.0, 0.0}, lp::Rel::Le, 1.0);
  const auto sol = lp::solve(p);
  REQUIRE(sol.status == lp::Status::Optimal);
  CHECK(sol.objective == Approx(0.05).margin(1e-9));
}

TEST_CASE("redundant equality rows are tolerated") {
  lp::Problem p;
  p.num_vars = 2;
  p.objective = {1.0, 2.0};
  p.add_row({1.0, 1.0}, lp::Rel::Eq, 1.0);
  p.add_row({2.0, 2.0}, lp::Rel::Eq, 2.0);
  const auto sol = lp::solve(p);
  REQUIRE(sol.status == lp::Status::Optimal);
  CHECK(sol.objective == Approx(2.0));
  CHECK(sol.x[1] == Approx(1.0));
}

namespace {

// brute-force LP oracle for <= rows: enumerate all basis pairs including the
// axes, keep feasible intersections, take the best objective
double enumerate_lp2(const std::vector<std::array<double, 3>>& rows,
                     const std::array<double, 2>& c) {
  std::vector<std::array<double, 3>> all = rows;
  all.push_back({1.0, 0.0, 0.0});  // x = 0 boundary (as equality line)
  all.push_back({0.0, 1.0, 0.0});
  const auto feasible = [&](double x, double y) {
    if (x < -1e-9 || y < -1e-9) return false;
    for (const auto& r : rows)
      if (r[0] * x + r[1] * y > r[2] + 1e-9) return false;
    return true;
  };
  double best = -1e300;
  for (std::size_t i = 0; i < all.size(); ++i)
    for (std::size_t j = i + 1; j < all.size(); ++j) {
      const double det = all[i][0] * all[j][1] - all[j][0] * all[i][1];
      if (std::abs(det) < 1e-12) continue;
      const double x = (all[i][2] * all[j][1] - all[j][2] * all[i][1]) / det;
      const double y = (all[i][0] * all[j][2] - all[j][0] * all[i][2]) / det;
      if (feasible(x, y)) best = std::max(best, c[0] * x + c[1] * y);
    }
  return best;
}

}  // namespace

TEST_CASE("random bounded problems match vertex enumeration") {
  const CounterRng rng(24601);
  for (std::uint64_t trial = 0; trial < 100; ++trial) {
    std::vector<std::array<double, 3>> rows;
    const int m = 2 + static_cast<int>(rng.value(trial * 97) % 4);
    for (int r = 0; r < m; ++r) {
      const std::uint64_t base = trial * 97 + 1 + static_cast<std::uint64_t>(3 * r);
      rows.push_back({0.05 + rng.uniform(base), 0.05 + rng.uniform(base + 1),
                      0.2 + rng.uniform(base + 2)});
    }
    const std::array<double, 2> c{rng.uniform(trial * 97 + 90),
                                  rng.uniform(trial * 97 + 91)};
    lp::Problem p;
    p.num_vars = 2;
    p.objective = {c[0], c[1]};
    for (const auto& r : rows) p.add_row({r[0], r[1]}, lp::Rel::Le, r[2]);
    const auto sol = lp::solve(p);
    REQUIRE(sol.status == lp::Status::Optimal);
    CHECK(sol.objective == Approx(enumerate_lp2(rows, c)).margin(1e-7));
  }
}
