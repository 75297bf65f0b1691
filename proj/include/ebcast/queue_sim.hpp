#pragma once

#include <array>
#include <cmath>
#include <cstdio>
#include <deque>
#include <fstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "ebcast/k_rx.hpp"
#include "ebcast/rng.hpp"
#include "ebcast/state_model.hpp"
#include "ebcast/two_rx.hpp"

// Slot-level operational check of the two-receiver scheme: draw (s, s_hat)
// i.i.d. from the joint, schedule one of {P1, P2, MIX, COMMON} from the
// estimate, and account deliveries exactly.
namespace ebcast {

enum class SimAction : int { P1 = 0, P2 = 1, Mix = 2, Common = 3 };

inline const char* sim_action_name(SimAction a) {
  switch (a) {
    case SimAction::P1: return "P1";
    case SimAction::P2: return "P2";
    case SimAction::Mix: return "MIX";
    default: return "COMMON";
  }
}

// Randomized per-estimate action distribution, or a fixed cyclic schedule
// (round-robin baselines such as TDMA).
struct Policy {
  std::array<std::array<double, 4>, 4> prob{};  // [s_hat][action]
  std::vector<SimAction> cycle;                 // nonempty => deterministic

  void validate() const {
    if (!cycle.empty()) return;
    for (const auto& row : prob) {
      double sum = 0.0;
      for (double v : row) {
        if (v < -1e-12) throw ValidationError("policy has negative mass");
        sum += v;
      }
      if (std::abs(sum - 1.0) > 1e-10)
        throw ValidationError("policy rows must sum to 1");
    }
  }

  static Policy round_robin(std::vector<SimAction> actions) {
    Policy p;
    p.cycle = std::move(actions);
    if (p.cycle.empty()) throw ValidationError("round robin needs actions");
    return p;
  }
};

// Policy from the two-receiver scheduling shares: the leftover mass per
// estimate goes to COMMON.  An optional back-off scales the sending actions
// toward COMMON to de-load the side-information queue.
inline Policy policy_from_solution(const AlphaTriple& alpha, double backoff = 0.0) {
  alpha.validate();
  if (backoff < 0.0 || backoff >= 1.0)
    throw ValidationError("backoff must be in [0,1)");
  Policy p;
  for (std::size_t h = 0; h < 4; ++h) {
    const double scale = 1.0 - backoff;
    p.prob[h][0] = scale * alpha.alpha1[h];
    p.prob[h][1] = scale * alpha.alpha2[h];
    p.prob[h][2] = scale * alpha.mix[h];
    p.prob[h][3] = 1.0 - p.prob[h][0] - p.prob[h][1] - p.prob[h][2];
  }
  return p;
}

inline Policy policy_from_solution(const AlphaPolicy& alpha, double backoff = 0.0) {
  return policy_from_solution(to_alpha_triple(alpha), backoff);
}

struct SlotDraw {
  std::uint32_t s = 0;
  std::uint32_t s_hat = 0;
  std::uint64_t slot = 0;
};

enum class PayloadTag : std::uint8_t { Private1, Private2, MixResolution };

// Common queue entry: a unit of side information pending for the receivers
// in `needs` (bit 0 -> receiver 1, bit 1 -> receiver 2).
struct CommonEntry {
  PayloadTag tag = PayloadTag::MixResolution;
  std::uint8_t needs = 0;
};

// Exact integer accounting: created_k = delivered_k + entries still needing k.
// The common queue delivers in order per receiver; complementary pending
// entries ride the same slot (the distributed-compression abstraction), so a
// COMMON slot can serve both receivers at once.
class QueueSystem {
 public:
  std::array<std::uint64_t, 2> created{0, 0};
  std::array<std::uint64_t, 2> delivered{0, 0};

  std::size_t common_backlog() const { return entries_.size(); }
  std::uint64_t pending_for(int rx) const {
    return static_cast<std::uint64_t>(order_[static_cast<std::size_t>(rx - 1)].size());
  }

  bool conservation_holds() const {
    return created[0] == delivered[0] + pending_for(1) &&
           created[1] == delivered[1] + pending_for(2);
  }

  struct StepResult {
    std::array<int, 2> delivered{0, 0};
    bool wasted = false;
    bool queued = false;
  };

  StepResult step(const SlotDraw& slot, SimAction action) {
    const bool s1 = state_bit(slot.s, 1, 2);
    const bool s2 = state_bit(slot.s, 2, 2);
    StepResult out;
    switch (action) {
      case SimAction::P1:
        if (s1) {
          ++created[0];
          ++delivered[0];
          out.delivered[0] = 1;
        } else if (s2) {
          ++created[0];
          push_entry(PayloadTag::Private1, 0b01);
          out.queued = true;
        }
        break;
      case SimAction::P2:
        if (s2) {
          ++created[1];
          ++delivered[1];
          out.delivered[1] = 1;
        } else if (s1) {
          ++created[1];
          push_entry(PayloadTag::Private2, 0b10);
          out.queued = true;
        }
        break;
      case SimAction::Mix:
        if (s1 || s2) {
          ++created[0];
          ++created[1];
          push_entry(PayloadTag::MixResolution, 0b11);
          out.queued = true;
        }
        break;
      case SimAction::Common:
        if (entries_.empty()) {
          out.wasted = true;
          break;
        }
        for (int rx = 1; rx <= 2; ++rx) {
          const bool on = rx == 1 ? s1 : s2;
          auto& order = order_[static_cast<std::size_t>(rx - 1)];
          if (!on || order.empty()) continue;
          const std::uint64_t id = order.front();
          order.pop_front();
          auto it = entries_.find(id);
          it->second.needs &= static_cast<std::uint8_t>(~(1u << (rx - 1)));
          if (it->second.needs == 0) entries_.erase(it);
          ++delivered[static_cast<std::size_t>(rx - 1)];
          out.delivered[rx - 1] = 1;
        }
        break;
    }
    return out;
  }

 private:
  void push_entry(PayloadTag tag, std::uint8_t needs) {
    const std::uint64_t id = next_id_++;
    entries_.emplace(id, CommonEntry{tag, needs});
    if (needs & 0b01) order_[0].push_back(id);
    if (needs & 0b10) order_[1].push_back(id);
  }

  std::uint64_t next_id_ = 0;
  std::unordered_map<std::uint64_t, CommonEntry> entries_;
  std::array<std::deque<std::uint64_t>, 2> order_;
};

struct SimReport {
  std::uint64_t slots = 0;
  std::uint64_t seed = 0;
  std::array<std::uint64_t, 2> delivered{0, 0};
  std::array<std::uint64_t, 2> created{0, 0};
  std::array<std::uint64_t, 2> pending{0, 0};
  std::array<double, 2> rates{0.0, 0.0};
  std::array<double, 2> ci_halfwidth{0.0, 0.0};  // batch-means 95%
  double mean_queue = 0.0;
  std::uint64_t max_queue = 0;
  std::uint64_t wasted_slots = 0;
  int batches = 0;
};

struct SimOptions {
  int batches = 20;
  std::string trace_path;  // nonempty => per-slot CSV trace
};

// Deterministic given (joint, policy, slots, seed): slot i consumes RNG
// counters 2i (state) and 2i+1 (action).
inline SimReport run(const JointStateTable& joint, const Policy& policy,
                     std::uint64_t slots, std::uint64_t seed,
                     const SimOptions& options = {}) {
  if (joint.receivers() != 2)
    throw SizeLimitError("size-limit: simulator needs K = 2");
  if (slots < 1) throw ValidationError("slots must be >= 1");
  policy.validate();
  joint.validate();

  // inverse-CDF tables
  std::array<double, 16> cell_cdf{};
  {
    double acc = 0.0;
    for (std::uint32_t s = 0; s < 4; ++s)
      for (std::uint32_t h = 0; h < 4; ++h) {
        acc += joint(s, h);
        cell_cdf[s * 4 + h] = acc;
      }
    cell_cdf[15] = 1.0;
  }
  std::array<std::array<double, 4>, 4> action_cdf{};
  for (std::size_t h = 0; h < 4; ++h) {
    double acc = 0.0;
    for (std::size_t a = 0; a < 4; ++a) {
      acc += policy.prob[h][a];
      action_cdf[h][a] = acc;
    }
    action_cdf[h][3] = 1.0;
  }

  std::ofstream trace;
  if (!options.trace_path.empty()) {
    trace.open(options.trace_path);
    if (!trace) throw ParseError("parse-error: cannot write '" + options.trace_path + "'");
    trace << "slot,s,shat,action,deliveries,qlen\n";
  }

  const CounterRng rng(seed);
  QueueSystem queues;
  SimReport report;
  report.slots = slots;
  report.seed = seed;
  report.batches = options.batches;

  const std::uint64_t batch_len = std::max<std::uint64_t>(1, slots / static_cast<std::uint64_t>(options.batches));
  std::vector<std::array<std::uint64_t, 2>> batch_delivered;
  batch_delivered.push_back({0, 0});
  double queue_accum = 0.0;

  for (std::uint64_t i = 0; i < slots; ++i) {
    const double u_state = rng.uniform(2 * i);
    std::uint32_t cell = 0;
    while (cell < 15 && u_state >= cell_cdf[cell]) ++cell;
    SlotDraw slot{cell / 4, cell % 4, i};

    SimAction action;
    if (!policy.cycle.empty()) {
      action = policy.cycle[static_cast<std::size_t>(i % policy.cycle.size())];
    } else {
      const double u_action = rng.uniform(2 * i + 1);
      std::uint32_t a = 0;
      while (a < 3 && u_action >= action_cdf[slot.s_hat][a]) ++a;
      action = static_cast<SimAction>(a);
    }

    const auto ev = queues.step(slot, action);
    if (ev.wasted) ++report.wasted_slots;
    auto& bd = batch_delivered.back();
    bd[0] += static_cast<std::uint64_t>(ev.delivered[0]);
    bd[1] += static_cast<std::uint64_t>(ev.delivered[1]);
    if ((i + 1) % batch_len == 0 && i + 1 < slots) batch_delivered.push_back({0, 0});

    queue_accum += static_cast<double>(queues.common_backlog());
    report.max_queue = std::max<std::uint64_t>(report.max_queue, queues.common_backlog());

    if (trace.is_open()) {
      trace << i << ',' << bitstring(slot.s, 2) << ',' << bitstring(slot.s_hat, 2)
            << ',' << sim_action_name(action) << ',' << (ev.delivered[0] + ev.delivered[1])
            << ',' << queues.common_backlog() << '\n';
    }
  }

  report.delivered = queues.delivered;
  report.created = queues.created;
  report.pending = {queues.pending_for(1), queues.pending_for(2)};
  if (!queues.conservation_holds())
    throw Error("queue accounting violated conservation");
  for (int rx = 0; rx < 2; ++rx)
    report.rates[static_cast<std::size_t>(rx)] =
        static_cast<double>(report.delivered[static_cast<std::size_t>(rx)]) /
        static_cast<double>(slots);
  report.mean_queue = queue_accum / static_cast<double>(slots);

  // batch-means confidence halfwidths (normal approximation)
  const std::size_t nb = batch_delivered.size();
  if (nb >= 2) {
    for (int rx = 0; rx < 2; ++rx) {
      double mean = 0.0;
      std::vector<double> rates_rx;
      for (std::size_t b = 0; b < nb; ++b) {
        const std::uint64_t len =
            b + 1 == nb ? slots - batch_len * static_cast<std::uint64_t>(nb - 1) : batch_len;
        rates_rx.push_back(static_cast<double>(batch_delivered[b][static_cast<std::size_t>(rx)]) /
                           static_cast<double>(len));
        mean += rates_rx.back();
      }
      mean /= static_cast<double>(nb);
      double var = 0.0;
      for (double r : rates_rx) var += (r - mean) * (r - mean);
      var /= static_cast<double>(nb - 1);
      report.ci_halfwidth[static_cast<std::size_t>(rx)] =
          1.96 * std::sqrt(var / static_cast<double>(nb));
    }
  }
  return report;
}

struct GapReport {
  std::array<double, 2> gap{0.0, 0.0};  // 1 - measured / target
  double tolerance = 0.02;
  bool pass = false;
};

inline GapReport compare(const SimReport& report, const std::array<double, 2>& targets,
                         double tolerance = 0.02) {
  GapReport out;
  out.tolerance = tolerance;
  for (std::size_t rx = 0; rx < 2; ++rx) {
    if (!(targets[rx] > 0.0)) throw ValidationError("targets must be positive");
    out.gap[rx] = 1.0 - report.rates[rx] / targets[rx];
  }
  out.pass = out.gap[0] <= tolerance && out.gap[1] <= tolerance;
  return out;
}

}  // namespace ebcast
