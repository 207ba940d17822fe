#pragma once

#include "tmgeom/tm_geom.hpp"

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

namespace tmgeom::testing {

inline constexpr double kPi = std::numbers::pi;

inline ScenarioGeometry make_geometry(const std::vector<std::string>& metric, const std::string& alpha,
                                      const std::string& sigma, std::vector<Interval> domain) {
  const int n = static_cast<int>(std::lround(std::sqrt(static_cast<double>(metric.size()))));
  std::vector<ExprAst> g;
  for (const auto& s : metric) g.push_back(parse(s, n));
  return ScenarioGeometry(ChartMetric(n, std::move(g), std::move(domain)),
                          IsotropicParams{parse(alpha, n), parse(sigma, n)});
}

inline ScenarioGeometry flat2(const std::string& alpha = "1", const std::string& sigma = "0") {
  return make_geometry({"1", "0", "0", "1"}, alpha, sigma, {{-2, 2}, {-2, 2}});
}

inline ScenarioGeometry sphere(const std::string& alpha = "1", const std::string& sigma = "0") {
  return make_geometry({"1", "0", "0", "sin(x1)^2"}, alpha, sigma, {{0.3, 2.8}, {-3.1, 3.1}});
}

inline ScenarioGeometry hyperbolic(const std::string& alpha = "1") {
  return make_geometry({"1/x2^2", "0", "0", "1/x2^2"}, alpha, "0", {{-2, 2}, {0.5, 3}});
}

inline Vec vec(std::initializer_list<double> v) {
  Vec r(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double d : v) r[i++] = d;
  return r;
}

inline Vec unit(int n, int i) { return Vec::Unit(n, i); }

inline TangentPoint at(std::initializer_list<double> x, std::initializer_list<double> u) {
  return {vec(x), vec(u)};
}

inline double dist(const LiftVector& a, const LiftVector& b) { return (a.stacked() - b.stacked()).norm(); }

}  // namespace tmgeom::testing
