#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "ebcast/common.hpp"

// Dense two-phase tableau simplex with Bland's rule.  Problem sizes here are
// at most a few hundred variables, so robustness wins over pivoting speed.
namespace ebcast::lp {

enum class Rel { Le, Ge, Eq };
enum class Status { Optimal, Infeasible, Unbounded };

// maximize c^T x  subject to  a_i x (<=,=,>=) b_i,  x >= 0
struct Problem {
  int num_vars = 0;
  std::vector<double> objective;
  std::vector<std::vector<double>> rows;
  std::vector<Rel> rel;
  std::vector<double> rhs;

  void add_row(std::vector<double> coeffs, Rel r, double b) {
    rows.push_back(std::move(coeffs));
    rel.push_back(r);
    rhs.push_back(b);
  }
};

struct Solution {
  Status status = Status::Infeasible;
  double objective = 0.0;
  std::vector<double> x;
};

class Simplex {
 public:
  static constexpr double kPivotTol = 1e-9;
  static constexpr double kCostTol = 1e-9;
  static constexpr double kFeasTol = 1e-8;

  explicit Simplex(const Problem& prob) : n_(prob.num_vars) {
    const std::size_t m = prob.rows.size();
    std::vector<double> b = prob.rhs;
    std::vector<Rel> rel = prob.rel;
    std::vector<std::vector<double>> a = prob.rows;
    for (std::size_t i = 0; i < m; ++i) {
      if (a[i].size() != static_cast<std::size_t>(n_))
        throw Error("lp row has wrong width");
      if (b[i] < 0.0) {
        for (auto& v : a[i]) v = -v;
        b[i] = -b[i];
        if (rel[i] == Rel::Le)
          rel[i] = Rel::Ge;
        else if (rel[i] == Rel::Ge)
          rel[i] = Rel::Le;
      }
    }
    int n_slack = 0, n_art = 0;
    for (auto r : rel) {
      if (r != Rel::Eq) ++n_slack;
      if (r != Rel::Le) ++n_art;
    }
    cols_ = n_ + n_slack + n_art;
    artificial_begin_ = n_ + n_slack;
    tab_.assign(m, std::vector<double>(static_cast<std::size_t>(cols_) + 1, 0.0));
    basis_.assign(m, -1);
    int slack = n_, art = artificial_begin_;
    for (std::size_t i = 0; i < m; ++i) {
      for (int j = 0; j < n_; ++j) tab_[i][static_cast<std::size_t>(j)] = a[i][static_cast<std::size_t>(j)];
      tab_[i][static_cast<std::size_t>(cols_)] = b[i];
      if (rel[i] == Rel::Le) {
        tab_[i][static_cast<std::size_t>(slack)] = 1.0;
        basis_[i] = slack++;
      } else if (rel[i] == Rel::Ge) {
        tab_[i][static_cast<std::size_t>(slack++)] = -1.0;
        tab_[i][static_cast<std::size_t>(art)] = 1.0;
        basis_[i] = art++;
      } else {
        tab_[i][static_cast<std::size_t>(art)] = 1.0;
        basis_[i] = art++;
      }
    }
    cost_ = prob.objective;
    cost_.resize(static_cast<std::size_t>(n_), 0.0);
  }

  Solution run() {
    Solution out;
    if (artificial_begin_ < cols_) {
      // phase 1: maximize -(sum of artificials); bounded by construction, so
      // a failed ratio test is a numerical stall and the feasibility check
      // below decides
      std::vector<double> phase1(static_cast<std::size_t>(cols_), 0.0);
      for (int j = artificial_begin_; j < cols_; ++j) phase1[static_cast<std::size_t>(j)] = -1.0;
      build_objective(phase1);
      iterate(false);
      if (obj_[static_cast<std::size_t>(cols_)] < -kFeasTol) {
        out.status = Status::Infeasible;
        return out;
      }
      evict_artificials();
    }
    std::vector<double> phase2(static_cast<std::size_t>(cols_), 0.0);
    for (int j = 0; j < n_; ++j) phase2[static_cast<std::size_t>(j)] = cost_[static_cast<std::size_t>(j)];
    build_objective(phase2);
    if (!iterate(true)) {
      out.status = Status::Unbounded;
      return out;
    }
    out.status = Status::Optimal;
    out.x.assign(static_cast<std::size_t>(n_), 0.0);
    for (std::size_t i = 0; i < tab_.size(); ++i)
      if (basis_[i] >= 0 && basis_[i] < n_)
        out.x[static_cast<std::size_t>(basis_[i])] = tab_[i][static_cast<std::size_t>(cols_)];
    out.objective = 0.0;
    for (int j = 0; j < n_; ++j)
      out.objective += cost_[static_cast<std::size_t>(j)] * out.x[static_cast<std::size_t>(j)];
    return out;
  }

 private:
  void build_objective(const std::vector<double>& c) {
    obj_.assign(static_cast<std::size_t>(cols_) + 1, 0.0);
    for (int j = 0; j < cols_; ++j) obj_[static_cast<std::size_t>(j)] = -c[static_cast<std::size_t>(j)];
    for (std::size_t i = 0; i < tab_.size(); ++i) {
      const double cb = c[static_cast<std::size_t>(basis_[i])];
      if (cb == 0.0) continue;
      for (std::size_t j = 0; j <= static_cast<std::size_t>(cols_); ++j)
        obj_[j] += cb * tab_[i][j];
    }
  }

  // Entering rule: most-negative reduced cost with largest-pivot ties for
  // numerical stability; after a long degenerate stall the rule switches to
  // Bland's (lowest indices), which guarantees escape from cycling.
  // Returns false when the ratio test finds no pivot (unbounded direction).
  bool iterate(bool ban_artificials) {
    const long stall_limit =
        2 * static_cast<long>(tab_.size() + static_cast<std::size_t>(cols_)) + 16;
    long stall = 0;
    bool bland = false;
    for (;;) {
      const int limit = ban_artificials ? artificial_begin_ : cols_;
      int enter = -1;
      if (bland) {
        for (int j = 0; j < limit; ++j)
          if (obj_[static_cast<std::size_t>(j)] < -kCostTol) {
            enter = j;
            break;
          }
      } else {
        double most = -kCostTol;
        for (int j = 0; j < limit; ++j)
          if (obj_[static_cast<std::size_t>(j)] < most) {
            most = obj_[static_cast<std::size_t>(j)];
            enter = j;
          }
      }
      if (enter < 0) return true;

      // Harris-style two-pass ratio test: find the tightest ratio with a
      // small feasibility slack, then take the numerically largest pivot
      // inside that window (lowest basis index instead under Bland's rule).
      double theta = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < tab_.size(); ++i) {
        const double piv = tab_[i][static_cast<std::size_t>(enter)];
        if (piv <= kPivotTol) continue;
        const double rhs = std::max(tab_[i][static_cast<std::size_t>(cols_)], 0.0);
        theta = std::min(theta, (rhs + 1e-9) / piv);
      }
      if (!std::isfinite(theta)) return false;
      int leave = -1;
      double best = std::numeric_limits<double>::infinity();
      double best_piv = 0.0;
      for (std::size_t i = 0; i < tab_.size(); ++i) {
        const double piv = tab_[i][static_cast<std::size_t>(enter)];
        if (piv <= kPivotTol) continue;
        const double ratio = std::max(tab_[i][static_cast<std::size_t>(cols_)], 0.0) / piv;
        if (ratio > theta) continue;
        const bool take =
            leave < 0 ||
            (bland ? basis_[i] < basis_[static_cast<std::size_t>(leave)] : piv > best_piv);
        if (take) {
          best_piv = piv;
          leave = static_cast<int>(i);
        }
        best = std::min(best, ratio);
      }
      if (leave < 0) return false;
      if (best <= 1e-12) {
        if (++stall > stall_limit) bland = true;
      } else {
        stall = 0;
      }
      pivot(static_cast<std::size_t>(leave), enter);
    }
  }

  void pivot(std::size_t row, int col) {
    const double piv = tab_[row][static_cast<std::size_t>(col)];
    for (auto& v : tab_[row]) v /= piv;
    for (std::size_t i = 0; i < tab_.size(); ++i) {
      if (i == row) continue;
      const double f = tab_[i][static_cast<std::size_t>(col)];
      if (f == 0.0) continue;
      for (std::size_t j = 0; j <= static_cast<std::size_t>(cols_); ++j) {
        tab_[i][j] -= f * tab_[row][j];
        if (std::abs(tab_[i][j]) <= 1e-12) tab_[i][j] = 0.0;  // stop dirt breeding
      }
      tab_[i][static_cast<std::size_t>(col)] = 0.0;
    }
    const double f = obj_[static_cast<std::size_t>(col)];
    if (f != 0.0)
      for (std::size_t j = 0; j <= static_cast<std::size_t>(cols_); ++j)
        obj_[j] -= f * tab_[row][j];
    obj_[static_cast<std::size_t>(col)] = 0.0;
    basis_[row] = col;
  }

  // Pivot lingering artificial variables out of the basis; rows that cannot
  // pivot are redundant and get cleared.
  void evict_artificials() {
    for (std::size_t i = 0; i < tab_.size(); ++i) {
      if (basis_[i] < artificial_begin_) continue;
      int col = -1;
      for (int j = 0; j < artificial_begin_; ++j)
        if (std::abs(tab_[i][static_cast<std::size_t>(j)]) > kPivotTol) {
          col = j;
          break;
        }
      if (col >= 0) {
        pivot(i, col);
      } else {
        // redundant row; artificial stays basic at value zero
        for (std::size_t j = 0; j <= static_cast<std::size_t>(cols_); ++j) tab_[i][j] = 0.0;
      }
    }
  }

  int n_ = 0;
  int cols_ = 0;
  int artificial_begin_ = 0;
  std::vector<std::vector<double>> tab_;
  std::vector<double> obj_;
  std::vector<int> basis_;
  std::vector<double> cost_;
};

inline Solution solve(const Problem& prob) { return Simplex(prob).run(); }

}  // namespace ebcast::lp
