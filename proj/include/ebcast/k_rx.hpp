#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "ebcast/rng.hpp"
#include "ebcast/simplex.hpp"
#include "ebcast/state_model.hpp"
#include "ebcast/two_rx.hpp"

namespace ebcast {

// Transmission actions: every nonempty receiver group U gets an individual
// (private or common) signal, and every unordered pair {i,j} gets a private
// mixture.
struct Action {
  bool is_mix = false;
  std::uint32_t members = 0;  // Q_in group mask
  int i = 0, j = 0;           // Q_mix pair, i < j

  std::string name(int K) const {
    if (!is_mix) return subset_string(members, K);
    return std::to_string(i) + "x" + std::to_string(j);
  }
};

class ActionSet {
 public:
  explicit ActionSet(int K) : k_(K) {
    for (std::uint32_t u = 1; u <= full_mask(K); ++u)
      list_.push_back(Action{false, u, 0, 0});
    for (int i = 1; i <= K; ++i)
      for (int j = i + 1; j <= K; ++j) list_.push_back(Action{true, 0, i, j});
  }

  int receivers() const { return k_; }
  std::size_t size() const { return list_.size(); }
  const Action& operator[](std::size_t idx) const { return list_[idx]; }

  int index_in(std::uint32_t u) const { return static_cast<int>(u) - 1; }
  int index_mix(int i, int j) const {
    if (i > j) std::swap(i, j);
    int idx = static_cast<int>(full_mask(k_));
    for (int a = 1; a <= k_; ++a)
      for (int b = a + 1; b <= k_; ++b) {
        if (a == i && b == j) return idx;
        ++idx;
      }
    throw SubsetError("invalid-subset: no such mixture pair");
  }

  int find(const std::string& name) const {
    for (std::size_t idx = 0; idx < list_.size(); ++idx)
      if (list_[idx].name(k_) == name) return static_cast<int>(idx);
    return -1;
  }

 private:
  int k_;
  std::vector<Action> list_;
};

// Scheduling policy alpha_q(s_hat): for each estimated state, a probability
// distribution over actions.
class AlphaPolicy {
 public:
  explicit AlphaPolicy(int K) : k_(K), actions_(K), n_(1u << K),
                                value_(actions_.size() * n_, 0.0) {}

  int receivers() const { return k_; }
  const ActionSet& actions() const { return actions_; }

  double at(int action, std::uint32_t s_hat) const {
    return value_[static_cast<std::size_t>(action) * n_ + s_hat];
  }
  double& at(int action, std::uint32_t s_hat) {
    return value_[static_cast<std::size_t>(action) * n_ + s_hat];
  }

  void validate() const {
    for (std::uint32_t h = 0; h < n_; ++h) {
      double sum = 0.0;
      for (std::size_t a = 0; a < actions_.size(); ++a) {
        const double v = at(static_cast<int>(a), h);
        if (v < -1e-12) throw ValidationError("alpha policy has negative mass");
        sum += v;
      }
      if (std::abs(sum - 1.0) > 1e-10)
        throw ValidationError("alpha policy rows must sum to 1");
    }
  }

  // All mass on the everyone-group common signal; always feasible, zero rate.
  static AlphaPolicy all_common(int K) {
    AlphaPolicy p(K);
    const int idx = p.actions().index_in(full_mask(K));
    for (std::uint32_t h = 0; h < p.n_; ++h) p.at(idx, h) = 1.0;
    return p;
  }

 private:
  int k_;
  ActionSet actions_;
  std::uint32_t n_;
  std::vector<double> value_;
};

inline AlphaPolicy to_alpha_policy(const AlphaTriple& triple) {
  AlphaPolicy p(2);
  const int a1 = p.actions().index_in(receiver_mask(1, 2));
  const int a2 = p.actions().index_in(receiver_mask(2, 2));
  const int common = p.actions().index_in(full_mask(2));
  const int mix = p.actions().index_mix(1, 2);
  for (std::uint32_t h = 0; h < 4; ++h) {
    p.at(a1, h) = triple.alpha1[h];
    p.at(a2, h) = triple.alpha2[h];
    p.at(mix, h) = triple.mix[h];
    p.at(common, h) =
        std::max(0.0, 1.0 - triple.alpha1[h] - triple.alpha2[h] - triple.mix[h]);
  }
  return p;
}

inline AlphaTriple to_alpha_triple(const AlphaPolicy& policy) {
  if (policy.receivers() != 2)
    throw SizeLimitError("size-limit: alpha triple view needs K = 2");
  AlphaTriple t;
  for (std::uint32_t h = 0; h < 4; ++h) {
    t.alpha1[h] = policy.at(policy.actions().index_in(receiver_mask(1, 2)), h);
    t.alpha2[h] = policy.at(policy.actions().index_in(receiver_mask(2, 2)), h);
    t.mix[h] = policy.at(policy.actions().index_mix(1, 2), h);
  }
  return t;
}

// S_c(U, J): states where the group-U signal misses at least one member of U,
// is overheard by exactly J \ U, and everyone outside J is erased.
inline std::vector<std::uint32_t> sc_set(std::uint32_t u, std::uint32_t j, int K) {
  const std::uint32_t full = full_mask(K);
  if (u == 0 || (u & j) != u || u == j || (j & ~full))
    throw SubsetError("invalid-subset: need U strictly inside J");
  std::vector<std::uint32_t> out;
  for (std::uint32_t s = 0; s <= full; ++s) {
    if ((s & u) == u) continue;
    if ((s & (j & ~u)) != (j & ~u)) continue;
    if (s & ~j & full) continue;
    out.push_back(s);
  }
  return out;
}

// J_c(U, J): the retransmission layers a (U, J) side-information packet may
// be downgraded to -- one-smaller supersets of U inside J, plus J itself.
inline std::vector<std::uint32_t> jc_set(std::uint32_t u, std::uint32_t j, int K) {
  const std::uint32_t full = full_mask(K);
  if (u == 0 || (u & j) != u || u == j || (j & ~full))
    throw SubsetError("invalid-subset: need U strictly inside J");
  std::vector<std::uint32_t> out;
  for (std::uint32_t jt = 1; jt <= full; ++jt) {
    if ((u & jt) != u || jt == u) continue;
    if ((jt & j) != jt || jt == j) continue;
    if (popcount(jt) != popcount(j) - 1) continue;
    out.push_back(jt);
  }
  out.push_back(j);
  return out;
}

// Downgrading weights beta_{U, J~}^s.  Variables exist per (U, s) pair with a
// nonempty overhearing set; each group is a distribution over J_c(U, J)
// except the everyone-layer groups of (K-1)-sized common signals, whose
// single weight may be anywhere in [0,1] (side information there may be
// dropped without breaking any private-rate accounting).
class BetaPolicy {
 public:
  struct Group {
    std::uint32_t u = 0;
    std::uint32_t s = 0;
    std::uint32_t realized = 0;  // J(U, s) = U | supp(s)
    std::vector<std::uint32_t> choices;
    bool free_mass = false;
    int first_var = 0;
  };

  explicit BetaPolicy(int K) : k_(K) {
    const std::uint32_t full = full_mask(K);
    int var = 0;
    for (std::uint32_t u = 1; u <= full; ++u) {
      for (std::uint32_t s = 0; s <= full; ++s) {
        if ((s & u) == u) continue;
        const std::uint32_t realized = u | s;
        if (realized == u) continue;
        Group g;
        g.u = u;
        g.s = s;
        g.realized = realized;
        g.choices = jc_set(u, realized, K);
        g.free_mass = realized == full && popcount(u) == K - 1 && popcount(u) >= 2;
        g.first_var = var;
        for (std::uint32_t jt : g.choices) {
          index_.emplace(std::make_tuple(u, jt, s), var);
          ++var;
        }
        groups_.push_back(std::move(g));
      }
    }
    value_.assign(static_cast<std::size_t>(var), 0.0);
  }

  int receivers() const { return k_; }
  const std::vector<Group>& groups() const { return groups_; }
  std::size_t num_vars() const { return value_.size(); }

  int var_index(std::uint32_t u, std::uint32_t jt, std::uint32_t s) const {
    auto it = index_.find(std::make_tuple(u, jt, s));
    return it == index_.end() ? -1 : it->second;
  }
  bool has(std::uint32_t u, std::uint32_t jt, std::uint32_t s) const {
    return var_index(u, jt, s) >= 0;
  }
  double get(std::uint32_t u, std::uint32_t jt, std::uint32_t s) const {
    const int idx = var_index(u, jt, s);
    if (idx < 0) throw SubsetError("invalid-subset: no such beta variable");
    return value_[static_cast<std::size_t>(idx)];
  }
  void set(std::uint32_t u, std::uint32_t jt, std::uint32_t s, double v) {
    const int idx = var_index(u, jt, s);
    if (idx < 0) throw SubsetError("invalid-subset: no such beta variable");
    value_[static_cast<std::size_t>(idx)] = v;
  }
  double value_at(int var) const { return value_[static_cast<std::size_t>(var)]; }
  void set_at(int var, double v) { value_[static_cast<std::size_t>(var)] = v; }

  void validate() const {
    for (const auto& g : groups_) {
      double sum = 0.0;
      for (std::size_t c = 0; c < g.choices.size(); ++c) {
        const double v = value_[static_cast<std::size_t>(g.first_var) + c];
        if (v < -1e-10 || v > 1.0 + 1e-10)
          throw ValidationError("beta weights must be in [0,1]");
        sum += v;
      }
      if (!g.free_mass && std::abs(sum - 1.0) > 1e-9)
        throw ValidationError("beta group must sum to 1");
    }
  }

  // No downgrading: all mass on the realized overhearing set.
  static BetaPolicy ones(int K) {
    BetaPolicy b(K);
    for (const auto& g : b.groups_)
      for (std::size_t c = 0; c < g.choices.size(); ++c)
        b.value_[static_cast<std::size_t>(g.first_var) + c] =
            g.choices[c] == g.realized ? 1.0 : 0.0;
    return b;
  }

  static BetaPolicy uniform(int K) {
    BetaPolicy b(K);
    for (const auto& g : b.groups_)
      for (std::size_t c = 0; c < g.choices.size(); ++c)
        b.value_[static_cast<std::size_t>(g.first_var) + c] =
            1.0 / static_cast<double>(g.choices.size());
    return b;
  }

  static BetaPolicy random(int K, const CounterRng& rng, std::uint64_t stream) {
    BetaPolicy b(K);
    std::uint64_t ctr = stream << 32;
    for (const auto& g : b.groups_) {
      if (g.free_mass) {
        b.value_[static_cast<std::size_t>(g.first_var)] = rng.uniform(ctr++);
        continue;
      }
      double total = 0.0;
      for (std::size_t c = 0; c < g.choices.size(); ++c) {
        const double e = -std::log(1.0 - rng.uniform(ctr++));
        b.value_[static_cast<std::size_t>(g.first_var) + c] = e;
        total += e;
      }
      for (std::size_t c = 0; c < g.choices.size(); ++c)
        b.value_[static_cast<std::size_t>(g.first_var) + c] /= total;
    }
    return b;
  }

 private:
  int k_;
  std::vector<Group> groups_;
  std::map<std::tuple<std::uint32_t, std::uint32_t, std::uint32_t>, int> index_;
  std::vector<double> value_;
};

// Achieved rates: R_k = alpha_k^T p_{s != 0} + sum_j alpha_{kxj}^T p_pair.
inline std::vector<double> rate_of(const AlphaPolicy& alpha,
                                   const JointStateTable& joint) {
  const int K = joint.receivers();
  if (alpha.receivers() != K)
    throw SizeLimitError("size-limit: policy and joint receiver counts differ");
  const auto p_any = event_vector(joint, event_some_received(K));
  std::vector<double> rates(static_cast<std::size_t>(K), 0.0);
  for (int k = 1; k <= K; ++k) {
    double r = 0.0;
    const int ak = alpha.actions().index_in(receiver_mask(k, K));
    for (std::uint32_t h = 0; h < joint.states(); ++h)
      r += alpha.at(ak, h) * p_any.p[h];
    for (int j = 1; j <= K; ++j) {
      if (j == k) continue;
      const auto p_pair = event_vector(joint, event_pair_active(k, j, K));
      const int am = alpha.actions().index_mix(k, j);
      for (std::uint32_t h = 0; h < joint.states(); ++h)
        r += alpha.at(am, h) * p_pair.p[h];
    }
    rates[static_cast<std::size_t>(k - 1)] = r;
  }
  return rates;
}

namespace detail {

// One side-information balance constraint, kept in a form usable both for
// direct evaluation and for assembling the two alternating linear programs:
//   residual = sum bilinear sign * (alpha_a . p_s) * beta_var
//            + sum linear (alpha_a . vec)
struct BilinearTerm {
  int action = 0;
  std::uint32_t s = 0;
  int beta_var = 0;
  double sign = 1.0;
};

struct LinearTerm {
  int action = 0;
  std::vector<double> vec;
};

struct ResidualExpr {
  int k = 0;
  std::uint32_t layer = 0;
  std::vector<BilinearTerm> bilinear;
  std::vector<LinearTerm> linear;
};

class Prop2System {
 public:
  Prop2System(const JointStateTable& joint, const BetaPolicy& structure)
      : joint_(joint), K_(joint.receivers()), n_(joint.states()), actions_(K_) {
    const auto p_any = event_vector(joint_, event_some_received(K_));
    p_any_ = p_any.p;
    for (int k = 1; k <= K_; ++k)
      p_on_.push_back(event_vector(joint_, event_receiver_on(k, K_)).p);

    const std::uint32_t full = full_mask(K_);
    for (std::uint32_t layer = 1; layer <= full; ++layer) {
      if (popcount(layer) < 2) continue;
      for (int k = 1; k <= K_; ++k) {
        if (!(layer & receiver_mask(k, K_))) continue;
        exprs_.push_back(build_expr(k, layer, structure));
      }
    }
  }

  const std::vector<ResidualExpr>& exprs() const { return exprs_; }
  const ActionSet& actions() const { return actions_; }
  int receivers() const { return K_; }
  std::uint32_t states() const { return n_; }
  const JointStateTable& joint() const { return joint_; }
  const std::vector<double>& p_any() const { return p_any_; }
  const std::vector<double>& p_on(int k) const {
    return p_on_[static_cast<std::size_t>(k - 1)];
  }

  double alpha_dot_state(const AlphaPolicy& alpha, int action, std::uint32_t s) const {
    double acc = 0.0;
    for (std::uint32_t h = 0; h < n_; ++h) acc += alpha.at(action, h) * joint_(s, h);
    return acc;
  }

  double evaluate(const ResidualExpr& e, const AlphaPolicy& alpha,
                  const BetaPolicy& beta) const {
    double v = 0.0;
    for (const auto& t : e.bilinear)
      v += t.sign * alpha_dot_state(alpha, t.action, t.s) * beta.value_at(t.beta_var);
    for (const auto& t : e.linear)
      for (std::uint32_t h = 0; h < n_; ++h) v += alpha.at(t.action, h) * t.vec[h];
    return v;
  }

 private:
  // supersets of `base` with zero or one extra receiver
  std::vector<std::uint32_t> one_up(std::uint32_t base) const {
    std::vector<std::uint32_t> out{base};
    for (int k = 1; k <= K_; ++k) {
      const std::uint32_t m = receiver_mask(k, K_);
      if (!(base & m)) out.push_back(base | m);
    }
    return out;
  }

  ResidualExpr build_expr(int k, std::uint32_t layer, const BetaPolicy& beta) {
    ResidualExpr e;
    e.k = k;
    e.layer = layer;
    const std::uint32_t uk = receiver_mask(k, K_);

    // private side information generated for this layer (s_k = 0 inside S_c)
    for (std::uint32_t big : one_up(layer))
      for (std::uint32_t s : sc_set(uk, big, K_)) {
        const int var = beta.var_index(uk, layer, s);
        if (var >= 0)
          e.bilinear.push_back({actions_.index_in(uk), s, var, +1.0});
      }

    // common side information routed into this layer; states where receiver k
    // heard the signal itself cost it nothing and are skipped
    for (std::uint32_t group = 1; group <= full_mask(K_); ++group) {
      if (popcount(group) < 2 || (group & layer) != group || !(group & uk)) continue;
      for (std::uint32_t big : one_up(layer)) {
        if ((group & big) != group || group == big) continue;
        for (std::uint32_t s : sc_set(group, big, K_)) {
          if (s & uk) continue;
          const int var = beta.var_index(group, layer, s);
          if (var >= 0)
            e.bilinear.push_back({actions_.index_in(group), s, var, +1.0});
        }
      }
    }

    // direct delivery of this layer to receiver k
    {
      LinearTerm t;
      t.action = actions_.index_in(layer);
      t.vec.assign(n_, 0.0);
      for (std::uint32_t h = 0; h < n_; ++h)
        t.vec[h] = -p_on_[static_cast<std::size_t>(k - 1)][h];
      e.linear.push_back(std::move(t));
    }

    // layer content promoted into strictly larger layers still reaches k
    for (std::uint32_t up = 1; up <= full_mask(K_); ++up) {
      if ((layer & up) != layer || up == layer) continue;
      for (std::uint32_t big : one_up(up)) {
        if ((layer & big) != layer || layer == big) continue;
        for (std::uint32_t s : sc_set(layer, big, K_)) {
          if (s & uk) continue;
          const int var = beta.var_index(layer, up, s);
          if (var >= 0)
            e.bilinear.push_back({actions_.index_in(layer), s, var, -1.0});
        }
      }
    }

    // mixture resolutions load exactly the pair layer
    for (int j = 1; j <= K_; ++j) {
      if (j == k) continue;
      if (layer != (uk | receiver_mask(j, K_))) continue;
      LinearTerm t;
      t.action = actions_.index_mix(k, j);
      t.vec = event_vector(joint_, event_pair_active(k, j, K_)).p;
      e.linear.push_back(std::move(t));
    }
    return e;
  }

  const JointStateTable& joint_;
  int K_;
  std::uint32_t n_;
  ActionSet actions_;
  std::vector<double> p_any_;
  std::vector<std::vector<double>> p_on_;
  std::vector<ResidualExpr> exprs_;
};

}  // namespace detail

struct ResidualValue {
  int k = 0;
  std::uint32_t layer = 0;
  double value = 0.0;
};

// Side-information balance residuals per (receiver, layer); the policy pair
// is feasible iff every residual is <= 0.
inline std::vector<ResidualValue> constraint_residuals(const AlphaPolicy& alpha,
                                                       const BetaPolicy& beta,
                                                       const JointStateTable& joint) {
  detail::Prop2System sys(joint, beta);
  std::vector<ResidualValue> out;
  for (const auto& e : sys.exprs())
    out.push_back({e.k, e.layer, sys.evaluate(e, alpha, beta)});
  return out;
}

struct SolveOptions {
  enum class Objective { Symmetric, Weighted };
  Objective objective = Objective::Symmetric;
  std::vector<double> weights;
  int max_rounds = 200;
  double improvement_tol = 1e-9;
  int random_starts = 8;
  std::uint64_t seed = 1729;  // default multistart seed, documented in the CLI
  int k_max = 4;
};

struct SchedulingSolution {
  int receivers = 0;
  std::string objective_kind;
  std::vector<double> weights;
  double objective = 0.0;
  std::vector<double> rates;
  AlphaPolicy alpha{2};
  BetaPolicy beta{2};
  std::vector<ResidualValue> residuals;
  int iterations = 0;
  bool converged = false;
  int best_start = 0;
};

namespace detail {

struct AlphaLpResult {
  AlphaPolicy alpha;
  double objective = 0.0;
};

inline AlphaLpResult alpha_lp(const Prop2System& sys, const BetaPolicy& beta,
                              const SolveOptions& opts) {
  const int K = sys.receivers();
  const std::uint32_t n = sys.states();
  const std::size_t n_actions = sys.actions().size();
  const bool symmetric = opts.objective == SolveOptions::Objective::Symmetric;
  const int num_alpha = static_cast<int>(n_actions * n);
  const int num_vars = num_alpha + (symmetric ? 1 : 0);
  const auto avar = [&](int action, std::uint32_t h) {
    return action * static_cast<int>(n) + static_cast<int>(h);
  };

  lp::Problem prob;
  prob.num_vars = num_vars;
  prob.objective.assign(static_cast<std::size_t>(num_vars), 0.0);

  // rate expressions per receiver
  std::vector<std::vector<double>> rate_rows(static_cast<std::size_t>(K),
                                             std::vector<double>(static_cast<std::size_t>(num_vars), 0.0));
  for (int k = 1; k <= K; ++k) {
    auto& row = rate_rows[static_cast<std::size_t>(k - 1)];
    const int ak = sys.actions().index_in(receiver_mask(k, K));
    for (std::uint32_t h = 0; h < n; ++h)
      row[static_cast<std::size_t>(avar(ak, h))] += sys.p_any()[h];
    for (int j = 1; j <= K; ++j) {
      if (j == k) continue;
      const auto pv = event_vector(sys.joint(), event_pair_active(k, j, K));
      const int am = sys.actions().index_mix(k, j);
      for (std::uint32_t h = 0; h < n; ++h)
        row[static_cast<std::size_t>(avar(am, h))] += pv.p[h];
    }
  }

  // residual(k, layer) <= 0, linear in alpha for fixed beta
  for (const auto& e : sys.exprs()) {
    std::vector<double> row(static_cast<std::size_t>(num_vars), 0.0);
    for (const auto& t : e.bilinear) {
      const double w = t.sign * beta.value_at(t.beta_var);
      if (w == 0.0) continue;
      for (std::uint32_t h = 0; h < n; ++h)
        row[static_cast<std::size_t>(avar(t.action, h))] += w * sys.joint()(t.s, h);
    }
    for (const auto& t : e.linear)
      for (std::uint32_t h = 0; h < n; ++h)
        row[static_cast<std::size_t>(avar(t.action, h))] += t.vec[h];
    prob.add_row(std::move(row), lp::Rel::Le, 0.0);
  }

  if (symmetric) {
    for (int k = 1; k <= K; ++k) {
      std::vector<double> row(static_cast<std::size_t>(num_vars), 0.0);
      for (int v = 0; v < num_alpha; ++v)
        row[static_cast<std::size_t>(v)] = -rate_rows[static_cast<std::size_t>(k - 1)][static_cast<std::size_t>(v)];
      row[static_cast<std::size_t>(num_alpha)] = 1.0;  // t <= R_k
      prob.add_row(std::move(row), lp::Rel::Le, 0.0);
    }
    prob.objective[static_cast<std::size_t>(num_alpha)] = 1.0;
  } else {
    for (int k = 1; k <= K; ++k)
      for (int v = 0; v < num_alpha; ++v)
        prob.objective[static_cast<std::size_t>(v)] +=
            opts.weights[static_cast<std::size_t>(k - 1)] *
            rate_rows[static_cast<std::size_t>(k - 1)][static_cast<std::size_t>(v)];
  }

  for (std::uint32_t h = 0; h < n; ++h) {
    std::vector<double> row(static_cast<std::size_t>(num_vars), 0.0);
    for (std::size_t a = 0; a < n_actions; ++a)
      row[static_cast<std::size_t>(avar(static_cast<int>(a), h))] = 1.0;
    prob.add_row(std::move(row), lp::Rel::Eq, 1.0);
  }

  const auto sol = lp::solve(prob);
  if (sol.status != lp::Status::Optimal)
    throw Error("alpha LP failed unexpectedly");
  AlphaLpResult out{AlphaPolicy(K), sol.objective};
  for (std::size_t a = 0; a < n_actions; ++a)
    for (std::uint32_t h = 0; h < n; ++h)
      out.alpha.at(static_cast<int>(a), h) =
          std::max(0.0, sol.x[static_cast<std::size_t>(avar(static_cast<int>(a), h))]);
  return out;
}

// For fixed alpha, pick beta minimizing the maximum residual.
inline BetaPolicy beta_lp(const Prop2System& sys, const AlphaPolicy& alpha,
                          const BetaPolicy& structure) {
  const int nb = static_cast<int>(structure.num_vars());
  const int t_plus = nb, t_minus = nb + 1;

  lp::Problem prob;
  prob.num_vars = nb + 2;
  prob.objective.assign(static_cast<std::size_t>(nb) + 2, 0.0);
  prob.objective[static_cast<std::size_t>(t_plus)] = -1.0;
  prob.objective[static_cast<std::size_t>(t_minus)] = 1.0;

  for (const auto& e : sys.exprs()) {
    std::vector<double> row(static_cast<std::size_t>(nb) + 2, 0.0);
    double constant = 0.0;
    for (const auto& t : e.bilinear)
      row[static_cast<std::size_t>(t.beta_var)] +=
          t.sign * sys.alpha_dot_state(alpha, t.action, t.s);
    for (const auto& t : e.linear)
      for (std::uint32_t h = 0; h < sys.states(); ++h)
        constant += alpha.at(t.action, h) * t.vec[h];
    row[static_cast<std::size_t>(t_plus)] = -1.0;
    row[static_cast<std::size_t>(t_minus)] = 1.0;
    prob.add_row(std::move(row), lp::Rel::Le, -constant);
  }

  for (const auto& g : structure.groups()) {
    if (g.free_mass) {
      std::vector<double> row(static_cast<std::size_t>(nb) + 2, 0.0);
      row[static_cast<std::size_t>(g.first_var)] = 1.0;
      prob.add_row(std::move(row), lp::Rel::Le, 1.0);
    } else {
      std::vector<double> row(static_cast<std::size_t>(nb) + 2, 0.0);
      for (std::size_t c = 0; c < g.choices.size(); ++c)
        row[static_cast<std::size_t>(g.first_var) + c] = 1.0;
      prob.add_row(std::move(row), lp::Rel::Eq, 1.0);
    }
  }

  const auto sol = lp::solve(prob);
  if (sol.status != lp::Status::Optimal)
    throw Error("beta LP failed unexpectedly");
  BetaPolicy out = structure;
  for (int v = 0; v < nb; ++v)
    out.set_at(v, std::clamp(sol.x[static_cast<std::size_t>(v)], 0.0, 1.0));
  return out;
}

}  // namespace detail

// Alternating bilinear solver: fix beta, solve the scheduling LP; fix alpha,
// re-balance the downgrading weights; repeat.  Multistart over deterministic
// seeds; the best incumbent by objective wins, earlier seed on ties.  Every
// candidate is re-verified against the constraint residuals before it may
// become the incumbent, so LP round-off can never surface as an infeasible
// answer.
inline SchedulingSolution solve(const JointStateTable& joint, const SolveOptions& opts = {}) {
  joint.validate();
  const int K = joint.receivers();
  if (K > opts.k_max)
    throw SizeLimitError("size-limit: K exceeds configured K_max");
  if (K < 2) throw SizeLimitError("size-limit: solver needs K >= 2");
  if (opts.objective == SolveOptions::Objective::Weighted &&
      static_cast<int>(opts.weights.size()) != K)
    throw ValidationError("weighted objective needs one weight per receiver");

  const BetaPolicy structure(K);
  detail::Prop2System sys(joint, structure);

  std::vector<BetaPolicy> starts;
  starts.push_back(BetaPolicy::ones(K));
  starts.push_back(BetaPolicy::uniform(K));
  const CounterRng rng(opts.seed);
  for (int r = 0; r < opts.random_starts; ++r)
    starts.push_back(BetaPolicy::random(K, rng, static_cast<std::uint64_t>(r)));

  SchedulingSolution best;
  best.receivers = K;
  best.objective_kind =
      opts.objective == SolveOptions::Objective::Symmetric ? "symmetric" : "weighted";
  best.weights = opts.weights;
  best.alpha = AlphaPolicy::all_common(K);
  best.beta = BetaPolicy::ones(K);
  best.objective = -std::numeric_limits<double>::infinity();

  const auto scalar_objective = [&](const std::vector<double>& rates) {
    if (opts.objective == SolveOptions::Objective::Symmetric)
      return *std::min_element(rates.begin(), rates.end());
    double acc = 0.0;
    for (int k = 0; k < K; ++k)
      acc += opts.weights[static_cast<std::size_t>(k)] * rates[static_cast<std::size_t>(k)];
    return acc;
  };

  // clamp LP round-off, renormalize, and re-verify; rejects corrupt bases
  const auto verified_objective = [&](AlphaPolicy& alpha, const BetaPolicy& beta,
                                      std::vector<double>& rates,
                                      std::vector<ResidualValue>& residuals) {
    for (std::uint32_t h = 0; h < joint.states(); ++h) {
      double sum = 0.0;
      for (std::size_t a = 0; a < sys.actions().size(); ++a)
        sum += alpha.at(static_cast<int>(a), h);
      if (sum > 0)
        for (std::size_t a = 0; a < sys.actions().size(); ++a)
          alpha.at(static_cast<int>(a), h) /= sum;
    }
    rates = rate_of(alpha, joint);
    residuals.clear();
    double worst = 0.0;
    for (const auto& e : sys.exprs()) {
      const double v = sys.evaluate(e, alpha, beta);
      residuals.push_back({e.k, e.layer, v});
      worst = std::max(worst, v);
    }
    return worst <= 1e-8 ? scalar_objective(rates)
                         : -std::numeric_limits<double>::infinity();
  };

  for (std::size_t si = 0; si < starts.size(); ++si) {
    BetaPolicy beta = starts[si];
    double prev = -std::numeric_limits<double>::infinity();
    bool converged = false;
    int rounds = 0;
    for (int round = 0; round < opts.max_rounds; ++round) {
      rounds = round + 1;
      auto res = detail::alpha_lp(sys, beta, opts);
      std::vector<double> rates;
      std::vector<ResidualValue> residuals;
      const double value = verified_objective(res.alpha, beta, rates, residuals);
      if (value > best.objective + 1e-12) {
        best.objective = value;
        best.alpha = res.alpha;
        best.beta = beta;
        best.rates = std::move(rates);
        best.residuals = std::move(residuals);
        best.best_start = static_cast<int>(si);
      }
      if (round > 0 && std::abs(res.objective - prev) <
                           opts.improvement_tol * std::max(1.0, std::abs(res.objective))) {
        converged = true;
        break;
      }
      prev = res.objective;
      if (round + 1 < opts.max_rounds)
        beta = detail::beta_lp(sys, res.alpha, structure);
    }
    if (best.best_start == static_cast<int>(si)) {
      best.converged = converged;
      best.iterations = rounds;
    }
  }

  if (!std::isfinite(best.objective)) {
    // no start produced a verifiable point; fall back to the zero-rate policy
    best.alpha = AlphaPolicy::all_common(K);
    best.beta = BetaPolicy::ones(K);
    best.rates = rate_of(best.alpha, joint);
    best.objective = scalar_objective(best.rates);
    best.residuals = constraint_residuals(best.alpha, best.beta, joint);
    best.converged = false;
  }
  return best;
}

}  // namespace ebcast
