#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "ebcast/state_model.hpp"

namespace ebcast {

struct Diagnostic {
  enum class Severity { Warning, Error };
  Severity severity;
  std::string message;
};

// Structural checks on a joint table; returns findings instead of throwing.
inline std::vector<Diagnostic> validate_joint(const JointStateTable& joint) {
  std::vector<Diagnostic> out;
  double sum = 0.0;
  for (std::uint32_t s = 0; s < joint.states(); ++s)
    for (std::uint32_t h = 0; h < joint.states(); ++h) {
      const double v = joint(s, h);
      if (v < 0.0)
        out.push_back({Diagnostic::Severity::Error,
                       "negative mass at (" + bitstring(s, joint.receivers()) + "," +
                           bitstring(h, joint.receivers()) + ")"});
      sum += v;
    }
  if (std::abs(sum - 1.0) > 1e-9) {
    std::ostringstream oss;
    oss << "total mass " << sum << " != 1";
    out.push_back({Diagnostic::Severity::Error, oss.str()});
  }
  const auto ms = joint.state_marginal();
  const auto mh = joint.estimate_marginal();
  for (std::uint32_t i = 0; i < joint.states(); ++i)
    if (std::abs(ms[i] - mh[i]) > 1e-6) {
      std::ostringstream oss;
      oss << "state/estimate marginal mismatch at " << bitstring(i, joint.receivers())
          << ": " << ms[i] << " vs " << mh[i];
      out.push_back({Diagnostic::Severity::Error, oss.str()});
    }
  return out;
}

// CSV format: header "s,shat,p"; K-bit strings (receiver 1 first); decimal
// probabilities.  Rows with zero mass may be omitted; duplicate (s, shat)
// rows accumulate.
inline JointStateTable load_joint(const std::string& path,
                                  bool allow_marginal_mismatch = false,
                                  std::vector<Diagnostic>* diagnostics = nullptr) {
  std::ifstream in(path);
  if (!in) throw ParseError("parse-error: cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw ParseError("parse-error: empty file '" + path + "'");
  if (line.size() && line.back() == '\r') line.pop_back();
  if (line != "s,shat,p")
    throw ParseError("parse-error: expected header 's,shat,p', got '" + line + "'");

  int K = -1;
  std::vector<double> table;
  std::uint32_t n = 0;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.size() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string s_text, h_text, p_text;
    if (!std::getline(row, s_text, ',') || !std::getline(row, h_text, ',') ||
        !std::getline(row, p_text))
      throw ParseError("parse-error: line " + std::to_string(lineno) + " malformed");
    if (K < 0) {
      K = static_cast<int>(s_text.size());
      if (K < 1 || K > JointStateTable::kHardMaxReceivers)
        throw ParseError("parse-error: unsupported bitstring length " + s_text);
      n = 1u << K;
      table.assign(static_cast<std::size_t>(n) * n, 0.0);
    }
    if (s_text.size() != static_cast<std::size_t>(K) ||
        h_text.size() != static_cast<std::size_t>(K))
      throw ParseError("parse-error: line " + std::to_string(lineno) +
                       " has inconsistent bitstring length");
    const std::uint32_t s = parse_bitstring(s_text);
    const std::uint32_t h = parse_bitstring(h_text);
    double p = 0.0;
    try {
      std::size_t used = 0;
      p = std::stod(p_text, &used);
      while (used < p_text.size() && std::isspace(static_cast<unsigned char>(p_text[used]))) ++used;
      if (used != p_text.size()) throw std::invalid_argument(p_text);
    } catch (const std::exception&) {
      throw ParseError("parse-error: line " + std::to_string(lineno) +
                       " has bad probability '" + p_text + "'");
    }
    table[static_cast<std::size_t>(s) * n + h] += p;
  }
  if (K < 0) throw ParseError("parse-error: no data rows in '" + path + "'");

  JointStateTable joint(K, std::move(table));
  auto findings = validate_joint(joint);
  bool fatal = false;
  for (auto& d : findings) {
    const bool marginal = d.message.find("marginal mismatch") != std::string::npos;
    if (d.severity == Diagnostic::Severity::Error && marginal && allow_marginal_mismatch)
      d.severity = Diagnostic::Severity::Warning;
    if (d.severity == Diagnostic::Severity::Error) fatal = true;
  }
  if (diagnostics) *diagnostics = findings;
  if (fatal) {
    std::string msg = "validation-error:";
    for (const auto& d : findings)
      if (d.severity == Diagnostic::Severity::Error) msg += " " + d.message + ";";
    throw ValidationError(msg);
  }
  return joint;
}

inline void store_joint(const JointStateTable& joint, std::ostream& out,
                        bool omit_zero_rows = true) {
  out << "s,shat,p\n";
  char buf[64];
  for (std::uint32_t s = 0; s < joint.states(); ++s)
    for (std::uint32_t h = 0; h < joint.states(); ++h) {
      const double v = joint(s, h);
      if (omit_zero_rows && v == 0.0) continue;
      std::snprintf(buf, sizeof buf, "%.17g", v);
      out << bitstring(s, joint.receivers()) << ',' << bitstring(h, joint.receivers())
          << ',' << buf << '\n';
    }
}

inline void store_joint(const JointStateTable& joint, const std::string& path,
                        bool omit_zero_rows = true) {
  std::ofstream out(path);
  if (!out) throw ParseError("parse-error: cannot write '" + path + "'");
  store_joint(joint, out, omit_zero_rows);
}

}  // namespace ebcast
