#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <vector>

#include "ebcast/common.hpp"

namespace ebcast {

// Half plane a1*R1 + a2*R2 <= b.
struct HalfPlane {
  double a1 = 0.0;
  double a2 = 0.0;
  double b = 0.0;
};

using RatePoint = std::array<double, 2>;

// Convex 2-D rate region: vertex list counterclockwise starting at the
// (max R1, 0) corner, closed under the axes (origin included).  The defining
// half planes are kept for containment tests.
struct RegionPolygon {
  std::vector<RatePoint> vertices;
  std::vector<HalfPlane> constraints;

  bool contains(double r1, double r2, double tol = 1e-9) const {
    for (const auto& h : constraints)
      if (h.a1 * r1 + h.a2 * r2 > h.b + tol) return false;
    return true;
  }
  bool contains(const RatePoint& p, double tol = 1e-9) const {
    return contains(p[0], p[1], tol);
  }

  double max_r1() const {
    double m = 0.0;
    for (const auto& v : vertices) m = std::max(m, v[0]);
    return m;
  }
  double max_r2() const {
    double m = 0.0;
    for (const auto& v : vertices) m = std::max(m, v[1]);
    return m;
  }

  // Largest r with (r, r) in the region, found by walking boundary edges.
  double symmetric_vertex() const {
    if (vertices.size() <= 1) return 0.0;
    double best = 0.0;
    const std::size_t n = vertices.size();
    for (std::size_t i = 0; i < n; ++i) {
      const auto& p = vertices[i];
      const auto& q = vertices[(i + 1) % n];
      const double fp = p[0] - p[1];
      const double fq = q[0] - q[1];
      if (std::abs(fp) < 1e-15) best = std::max(best, p[0]);
      if ((fp < 0) == (fq < 0)) continue;
      const double t = fp / (fp - fq);
      best = std::max(best, p[0] + t * (q[0] - p[0]));
    }
    return best;
  }
};

namespace detail {

inline bool near_point(const RatePoint& a, const RatePoint& b, double tol) {
  return std::abs(a[0] - b[0]) <= tol && std::abs(a[1] - b[1]) <= tol;
}

inline double cross(const RatePoint& o, const RatePoint& a, const RatePoint& b) {
  return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
}

}  // namespace detail

// Intersection of half planes (axes constraints must be included by the
// caller).  Duplicate constraints are merged with lexicographic tie-breaking
// after normalization; vertices are deduplicated at 1e-12.
inline RegionPolygon intersect_half_planes(std::vector<HalfPlane> planes) {
  // normalize and dedupe
  for (auto& h : planes) {
    const double n = std::hypot(h.a1, h.a2);
    if (n > 0) {
      h.a1 /= n;
      h.a2 /= n;
      h.b /= n;
    }
  }
  std::sort(planes.begin(), planes.end(), [](const HalfPlane& x, const HalfPlane& y) {
    if (x.a1 != y.a1) return x.a1 < y.a1;
    if (x.a2 != y.a2) return x.a2 < y.a2;
    return x.b < y.b;
  });
  planes.erase(std::unique(planes.begin(), planes.end(),
                           [](const HalfPlane& x, const HalfPlane& y) {
                             return std::abs(x.a1 - y.a1) < 1e-12 &&
                                    std::abs(x.a2 - y.a2) < 1e-12 &&
                                    std::abs(x.b - y.b) < 1e-12;
                           }),
               planes.end());

  const auto feasible = [&](const RatePoint& p) {
    for (const auto& h : planes)
      if (h.a1 * p[0] + h.a2 * p[1] > h.b + 1e-9) return false;
    return true;
  };

  std::vector<RatePoint> pts;
  const std::size_t m = planes.size();
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j) {
      const double det = planes[i].a1 * planes[j].a2 - planes[j].a1 * planes[i].a2;
      if (std::abs(det) < 1e-12) continue;
      RatePoint p{(planes[i].b * planes[j].a2 - planes[j].b * planes[i].a2) / det,
                  (planes[i].a1 * planes[j].b - planes[j].a1 * planes[i].b) / det};
      for (double& c : p)
        if (std::abs(c) <= 1e-12) c = 0.0;  // snap round-off, avoid "-0"
      if (feasible(p)) pts.push_back(p);
    }

  std::vector<RatePoint> uniq;
  for (const auto& p : pts) {
    bool dup = false;
    for (const auto& u : uniq)
      if (detail::near_point(p, u, 1e-12)) {
        dup = true;
        break;
      }
    if (!dup) uniq.push_back(p);
  }

  RegionPolygon poly;
  poly.constraints = planes;
  if (uniq.empty()) return poly;
  if (uniq.size() <= 2) {
    poly.vertices = uniq;
    return poly;
  }

  // Andrew monotone chain, counterclockwise; collinear points dropped.
  std::sort(uniq.begin(), uniq.end());
  std::vector<RatePoint> hull(2 * uniq.size());
  std::size_t h = 0;
  for (const auto& p : uniq) {
    while (h >= 2 && detail::cross(hull[h - 2], hull[h - 1], p) <= 1e-15) --h;
    hull[h++] = p;
  }
  const std::size_t lower = h + 1;
  for (auto it = uniq.rbegin() + 1; it != uniq.rend(); ++it) {
    while (h >= lower && detail::cross(hull[h - 2], hull[h - 1], *it) <= 1e-15) --h;
    hull[h++] = *it;
  }
  hull.resize(h - 1);

  // start at the rightmost vertex on the R1 axis (max R1, min R2)
  std::size_t start = 0;
  for (std::size_t i = 1; i < hull.size(); ++i)
    if (hull[i][0] > hull[start][0] + 1e-15 ||
        (std::abs(hull[i][0] - hull[start][0]) <= 1e-15 && hull[i][1] < hull[start][1]))
      start = i;
  std::rotate(hull.begin(), hull.begin() + static_cast<std::ptrdiff_t>(start), hull.end());
  poly.vertices = std::move(hull);
  return poly;
}

// Vertex rows "R1,R2", counterclockwise, first row (max R1, 0).
inline void write_region_csv(const RegionPolygon& poly, const std::string& path,
                             int precision = 6) {
  std::ofstream out(path);
  if (!out) throw ParseError("parse-error: cannot write '" + path + "'");
  out << "R1,R2\n";
  char buf[64];
  for (const auto& v : poly.vertices) {
    std::snprintf(buf, sizeof buf, "%.*g,%.*g", precision, v[0], precision, v[1]);
    out << buf << '\n';
  }
}

}  // namespace ebcast
