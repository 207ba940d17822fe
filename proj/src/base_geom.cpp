#include "tmgeom/base_geom.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace tmgeom {

ChartMetric::ChartMetric(int n, std::vector<ExprAst> components, std::vector<Interval> domain)
    : n_(n), g_(std::move(components)), domain_(std::move(domain)) {
  if (n < 1) throw std::invalid_argument("metric dimension must be positive");
  if (static_cast<int>(g_.size()) != n * n) {
    throw std::invalid_argument("metric must have n*n components");
  }
  if (static_cast<int>(domain_.size()) != n) throw std::invalid_argument("domain box must have n intervals");
  for (const auto& iv : domain_) {
    if (!(iv.lo < iv.hi)) throw std::invalid_argument("domain interval must satisfy lo < hi");
  }
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const ExprAst& e = component(i, j);
      if (e.dimension() != n) throw std::invalid_argument("metric component has the wrong dimension");
      if (e.depends_on_fiber()) {
        std::ostringstream msg;
        msg << "metric component g" << i + 1 << j + 1 << " must not depend on fiber variables";
        throw std::invalid_argument(msg.str());
      }
    }
  }
  // Components that differ as expressions must agree numerically on a 3^n
  // lattice of interior points (probes where either side is undefined are
  // skipped; sampling rejects such points later).
  constexpr std::array<double, 3> kProbe{0.5, 0.2113248654051871, 0.8660254037844386};
  std::vector<double> x(static_cast<std::size_t>(n));
  int probes = 1;
  for (int i = 0; i < n; ++i) probes *= static_cast<int>(kProbe.size());
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (component(i, j) == component(j, i)) continue;
      for (int p = 0; p < probes; ++p) {
        for (int k = 0, rest = p; k < n; ++k, rest /= 3) {
          const Interval& iv = domain_[static_cast<std::size_t>(k)];
          x[static_cast<std::size_t>(k)] = iv.lo + kProbe[static_cast<std::size_t>(rest % 3)] * (iv.hi - iv.lo);
        }
        double a = 0.0;
        double b = 0.0;
        try {
          a = eval(component(i, j), x);
          b = eval(component(j, i), x);
        } catch (const DomainError&) {
          continue;
        }
        if (std::abs(a - b) > 1e-12 * std::max({1.0, std::abs(a), std::abs(b)})) {
          std::ostringstream msg;
          msg << "metric is not symmetric: g" << i + 1 << j + 1 << " != g" << j + 1 << i + 1;
          throw std::invalid_argument(msg.str());
        }
      }
    }
  }
}

bool ChartMetric::contains(std::span<const double> x) const {
  if (static_cast<int>(x.size()) < n_) return false;
  for (int i = 0; i < n_; ++i) {
    const auto& iv = domain_[static_cast<std::size_t>(i)];
    const double v = x[static_cast<std::size_t>(i)];
    if (v < iv.lo || v > iv.hi) return false;
  }
  return true;
}

JetMatrix ChartMetric::jets(std::span<const double> x, int order) const {
  const int nvars = static_cast<int>(x.size());
  JetMatrix g(n_, nvars, order);
  for (int i = 0; i < n_; ++i) {
    for (int j = 0; j < n_; ++j) g(i, j) = eval_jet(component(i, j), x, order);
  }
  // Symmetrize exactly; asymmetric input was rejected at construction.
  for (int i = 0; i < n_; ++i) {
    for (int j = i + 1; j < n_; ++j) {
      const double a = g(i, j).value();
      const double b = g(j, i).value();
      if (std::abs(a - b) > 1e-12 * std::max(1.0, std::abs(a))) {
        throw std::invalid_argument("metric is not symmetric at the evaluation point");
      }
      g(j, i) = g(i, j);
    }
  }
  return g;
}

Christoffel::Christoffel(int dim, int nvars, int order)
    : dim_(dim), c_(static_cast<std::size_t>(dim * dim * dim), Jet(nvars, order)) {}

RiemannJets::RiemannJets(int dim, int nvars, int order)
    : dim_(dim), r_(static_cast<std::size_t>(dim * dim * dim * dim), Jet(nvars, order)) {}

Christoffel christoffel_symbols(const JetMatrix& g, const JetMatrix& g_inv) {
  const int n = g.dim();
  const int order = g.order() - 1;
  if (order < 0) throw std::invalid_argument("Christoffel symbols need first derivatives of the metric");
  if (g.nvars() < n) throw std::invalid_argument("metric jets must carry every chart coordinate");
  const JetMatrix inv = g_inv.truncated(order);

  // First-kind symbols [ij, l] = 1/2 (d_i g_jl + d_j g_il - d_l g_ij).
  std::vector<Jet> first(static_cast<std::size_t>(n * n * n), Jet(g.nvars(), order));
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      for (int l = 0; l < n; ++l) {
        Jet s = g(j, l).partial(i) + g(i, l).partial(j) - g(i, j).partial(l);
        s *= 0.5;
        first[static_cast<std::size_t>((i * n + j) * n + l)] = s;
        first[static_cast<std::size_t>((j * n + i) * n + l)] = s;
      }
    }
  }
  Christoffel gamma(n, g.nvars(), order);
  for (int k = 0; k < n; ++k) {
    for (int i = 0; i < n; ++i) {
      for (int j = i; j < n; ++j) {
        Jet acc(g.nvars(), order);
        for (int l = 0; l < n; ++l) acc += inv(k, l) * first[static_cast<std::size_t>((i * n + j) * n + l)];
        gamma(k, i, j) = acc;
        gamma(k, j, i) = acc;
      }
    }
  }
  return gamma;
}

RiemannJets riemann_tensor(const Christoffel& gamma) {
  const int n = gamma.dim();
  const int order = gamma.order() - 1;
  if (order < 0) throw std::invalid_argument("curvature needs first derivatives of the connection");
  const int nvars = gamma(0, 0, 0).nvars();
  RiemannJets r(n, nvars, order);
  for (int l = 0; l < n; ++l) {
    for (int k = 0; k < n; ++k) {
      for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
          Jet acc = gamma(l, j, k).partial(i) - gamma(l, i, k).partial(j);
          for (int m = 0; m < n; ++m) {
            acc += gamma(l, i, m).truncated(order) * gamma(m, j, k).truncated(order);
            acc -= gamma(l, j, m).truncated(order) * gamma(m, i, k).truncated(order);
          }
          r(l, k, i, j) = acc;
          r(l, k, j, i) = -acc;
        }
      }
    }
  }
  return r;
}

Mat gram_schmidt(const Mat& metric) {
  const auto n = metric.rows();
  Mat frame = Mat::Identity(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    Vec v = frame.col(i);
    for (Eigen::Index j = 0; j < i; ++j) {
      const Vec e = frame.col(j);
      v -= e.dot(metric * v) * e;
    }
    const double norm2 = v.dot(metric * v);
    if (!(norm2 > 0.0)) throw std::invalid_argument("Gram-Schmidt: metric is not positive definite");
    frame.col(i) = v / std::sqrt(norm2);
  }
  return frame;
}

bool positive_definite(const Mat& m) {
  const Eigen::SelfAdjointEigenSolver<Mat> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff() > 0.0;
}

BasePoint::BasePoint(const ChartMetric& m, std::span<const double> x) : n_(m.dim()) {
  if (static_cast<int>(x.size()) != n_) throw std::invalid_argument("base point must have n coordinates");
  x_ = Eigen::Map<const Vec>(x.data(), n_);
  g_jets_ = m.jets(x, 3);
  g_ = Mat(n_, n_);
  for (int i = 0; i < n_; ++i) {
    for (int j = 0; j < n_; ++j) g_(i, j) = g_jets_(i, j).value();
  }
  if (!positive_definite(g_)) throw DomainError("metric is not positive definite at the evaluation point");
  g_inv_jets_ = inverse(g_jets_, kMaxMetricCondition);
  g_inv_ = Mat(n_, n_);
  for (int i = 0; i < n_; ++i) {
    for (int j = 0; j < n_; ++j) g_inv_(i, j) = g_inv_jets_(i, j).value();
  }
  gamma_ = christoffel_symbols(g_jets_, g_inv_jets_);
  riemann_ = riemann_tensor(gamma_);

  const int n = n_;
  nabla_r_.assign(static_cast<std::size_t>(n * n * n * n * n), 0.0);
  for (int s = 0; s < n; ++s) {
    for (int l = 0; l < n; ++l) {
      for (int k = 0; k < n; ++k) {
        for (int i = 0; i < n; ++i) {
          for (int j = 0; j < n; ++j) {
            double v = riemann_(l, k, i, j).d(s);
            for (int p = 0; p < n; ++p) {
              v += gamma(l, s, p) * riemann(p, k, i, j) - gamma(p, s, k) * riemann(l, p, i, j) -
                   gamma(p, s, i) * riemann(l, k, p, j) - gamma(p, s, j) * riemann(l, k, i, p);
            }
            nabla_r_[static_cast<std::size_t>((((s * n + l) * n + k) * n + i) * n + j)] = v;
          }
        }
      }
    }
  }

  frame_ = gram_schmidt(g_);
  ricci_ = Mat::Zero(n, n);
  for (int a = 0; a < n; ++a) {
    const Vec X = Vec::Unit(n, a);
    Vec q = Vec::Zero(n);
    for (int i = 0; i < n; ++i) q += curvature(X, frame_.col(i), frame_.col(i));
    ricci_.col(a) = q;
  }
}

double BasePoint::riemann_lowered(int i, int j, int k, int l) const {
  double s = 0.0;
  for (int m = 0; m < n_; ++m) s += riemann(m, k, i, j) * g_(m, l);
  return s;
}

Vec BasePoint::covariant(const Vec& X, const Vec& Y) const {
  Vec r = Vec::Zero(n_);
  for (int k = 0; k < n_; ++k) {
    for (int i = 0; i < n_; ++i) {
      for (int j = 0; j < n_; ++j) r(k) += gamma(k, i, j) * X(i) * Y(j);
    }
  }
  return r;
}

Vec BasePoint::curvature(const Vec& X, const Vec& Y, const Vec& Z) const {
  Vec r = Vec::Zero(n_);
  for (int l = 0; l < n_; ++l) {
    for (int k = 0; k < n_; ++k) {
      if (Z(k) == 0.0) continue;
      for (int i = 0; i < n_; ++i) {
        for (int j = 0; j < n_; ++j) r(l) += riemann(l, k, i, j) * X(i) * Y(j) * Z(k);
      }
    }
  }
  return r;
}

double BasePoint::curvature4(const Vec& X, const Vec& Y, const Vec& Z, const Vec& W) const {
  return inner(curvature(X, Y, Z), W);
}

Vec BasePoint::nabla_curvature(const Vec& Z, const Vec& X, const Vec& Y, const Vec& W) const {
  Vec r = Vec::Zero(n_);
  for (int m = 0; m < n_; ++m) {
    if (Z(m) == 0.0) continue;
    for (int l = 0; l < n_; ++l) {
      for (int k = 0; k < n_; ++k) {
        for (int i = 0; i < n_; ++i) {
          for (int j = 0; j < n_; ++j) r(l) += nabla_riemann(m, l, k, i, j) * Z(m) * X(i) * Y(j) * W(k);
        }
      }
    }
  }
  return r;
}

double BasePoint::sectional(const Vec& X, const Vec& Y) const {
  const double den = inner(X, X) * inner(Y, Y) - inner(X, Y) * inner(X, Y);
  if (den < 1e-12) throw std::invalid_argument("degenerate plane: X and Y are linearly dependent");
  return curvature4(X, Y, Y, X) / den;
}

}  // namespace tmgeom
