#pragma once

#include <bit>
#include <cstdint>
#include <stdexcept>
#include <string>

// Bit conventions used throughout:
//  - A state s in {0,1}^K is stored as an unsigned integer whose K-bit string
//    has receiver 1 as the most significant bit, i.e. receiver k owns bit (K-k).
//  - Receiver subsets share the same layout, so subset/state predicates are
//    plain mask operations: s_U = 1...1  <=>  (s & U) == U.
namespace ebcast {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Thrown for invalid model geometry (non-positive radius, negative density, ...).
class GeometryError : public Error {
 public:
  using Error::Error;
};

// Thrown when a receiver count exceeds the configured K_max.
class SizeLimitError : public Error {
 public:
  using Error::Error;
};

// Thrown for malformed subset arguments (e.g. U not a strict subset of J).
class SubsetError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

// A requested target rate is not reachable within the search bracket.
class TargetError : public Error {
 public:
  using Error::Error;
};

// A map assumed monotone failed the pre-bisection grid check.
class MonotonicityError : public Error {
 public:
  using Error::Error;
};

class DegenerateJointError : public Error {
 public:
  using Error::Error;
};

inline constexpr std::uint32_t receiver_mask(int k, int K) {
  return std::uint32_t{1} << (K - k);
}

inline constexpr bool state_bit(std::uint32_t s, int k, int K) {
  return (s >> (K - k)) & 1u;
}

inline constexpr std::uint32_t full_mask(int K) {
  return (std::uint32_t{1} << K) - 1;
}

inline int popcount(std::uint32_t x) { return std::popcount(x); }

inline std::string bitstring(std::uint32_t s, int K) {
  std::string out(static_cast<std::size_t>(K), '0');
  for (int k = 1; k <= K; ++k)
    if (state_bit(s, k, K)) out[static_cast<std::size_t>(k - 1)] = '1';
  return out;
}

inline std::uint32_t parse_bitstring(const std::string& text) {
  if (text.empty() || text.size() > 31)
    throw ParseError("bad bitstring '" + text + "'");
  std::uint32_t s = 0;
  for (char c : text) {
    if (c != '0' && c != '1') throw ParseError("bad bitstring '" + text + "'");
    s = (s << 1) | static_cast<std::uint32_t>(c - '0');
  }
  return s;
}

// Receiver members of a subset mask, in increasing receiver index.
inline std::string subset_string(std::uint32_t u, int K) {
  std::string out;
  for (int k = 1; k <= K; ++k)
    if (u & receiver_mask(k, K)) out += std::to_string(k);
  return out;
}

}  // namespace ebcast
