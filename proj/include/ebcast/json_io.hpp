#pragma once

#include <ctime>
#include <fstream>
#include <string>

#include <json.hpp>

#include "ebcast/experiments.hpp"
#include "ebcast/k_rx.hpp"
#include "ebcast/queue_sim.hpp"
#include "ebcast/two_rx.hpp"

namespace ebcast {

using nlohmann::json;

inline std::string utc_timestamp() {
  std::time_t now = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  return buf;
}

inline void stamp(json& j, bool with_timestamp) {
  if (with_timestamp) j["generated_at"] = utc_timestamp();
}

inline json certificate_to_json(const MuCertificate& cert) {
  json j;
  if (cert.mu_infinite)
    j["mu"] = "inf";
  else
    j["mu"] = cert.mu;
  j["family"] = cert.family;
  j["bound"] = cert.bound;
  return j;
}

inline json solution_to_json(const SchedulingSolution& sol) {
  const int K = sol.receivers;
  json j;
  j["K"] = K;
  j["objective"] = sol.objective_kind;
  if (!sol.weights.empty()) j["weights"] = sol.weights;
  j["value"] = sol.objective;
  j["rates"] = sol.rates;
  json alpha = json::object();
  for (std::size_t a = 0; a < sol.alpha.actions().size(); ++a) {
    std::vector<double> row;
    for (std::uint32_t h = 0; h < (1u << K); ++h)
      row.push_back(sol.alpha.at(static_cast<int>(a), h));
    alpha[sol.alpha.actions()[a].name(K)] = row;
  }
  j["alpha"] = alpha;
  json beta = json::object();
  for (const auto& g : sol.beta.groups())
    for (std::size_t c = 0; c < g.choices.size(); ++c)
      beta[subset_string(g.u, K) + "|" + subset_string(g.choices[c], K) + "|" +
           bitstring(g.s, K)] = sol.beta.value_at(g.first_var + static_cast<int>(c));
  j["beta"] = beta;
  json residuals = json::object();
  for (const auto& r : sol.residuals)
    residuals[std::to_string(r.k) + "|" + subset_string(r.layer, K)] = r.value;
  j["residuals"] = residuals;
  j["iterations"] = sol.iterations;
  j["converged"] = sol.converged;
  j["best_start"] = sol.best_start;
  return j;
}

inline json report_to_json(const SimReport& report) {
  json j;
  j["slots"] = report.slots;
  j["seed"] = report.seed;
  j["delivered"] = report.delivered;
  j["created"] = report.created;
  j["pending"] = report.pending;
  j["rates"] = report.rates;
  j["ci_halfwidth"] = report.ci_halfwidth;
  j["mean_queue"] = report.mean_queue;
  j["max_queue"] = report.max_queue;
  j["wasted_slots"] = report.wasted_slots;
  j["batches"] = report.batches;
  return j;
}

inline json gains_to_json(const GainReport& g) {
  json j;
  j["velocity_kmh"] = g.velocity_kmh;
  j["r_mixed"] = g.r_mixed;
  j["r_fb"] = g.r_fb;
  j["gain_percent"] = g.gain_percent;
  j["target"] = g.target;
  j["lambda_min_mixed"] = g.lambda_min_mixed;
  j["lambda_min_fb"] = g.lambda_min_fb;
  j["savings_percent"] = g.savings_percent;
  return j;
}

// Accepts either a solver solution JSON (K = 2) or a bare triple
// {"alpha1": [...], "alpha2": [...], "mix": [...]} in s_hat order 00,01,10,11.
inline AlphaTriple alpha_triple_from_json(const json& j) {
  AlphaTriple t;
  if (j.contains("alpha1")) {
    for (std::size_t h = 0; h < 4; ++h) {
      t.alpha1[h] = j.at("alpha1").at(h).get<double>();
      t.alpha2[h] = j.at("alpha2").at(h).get<double>();
      t.mix[h] = j.contains("mix") ? j.at("mix").at(h).get<double>() : 0.0;
    }
    t.validate();
    return t;
  }
  if (!j.contains("alpha") || j.at("K").get<int>() != 2)
    throw ParseError("parse-error: policy JSON needs K=2 solution or alpha triple");
  const auto& alpha = j.at("alpha");
  for (std::size_t h = 0; h < 4; ++h) {
    t.alpha1[h] = alpha.at("1").at(h).get<double>();
    t.alpha2[h] = alpha.at("2").at(h).get<double>();
    t.mix[h] = alpha.at("1x2").at(h).get<double>();
  }
  t.validate();
  return t;
}

inline json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("parse-error: cannot open '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ParseError("parse-error: " + std::string(e.what()));
  }
  return j;
}

inline void write_json_file(const json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("parse-error: cannot write '" + path + "'");
  out << j.dump(2) << '\n';
}

}  // namespace ebcast
