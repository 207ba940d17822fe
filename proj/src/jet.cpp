#include "tmgeom/jet.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <sstream>

namespace tmgeom {

namespace {

std::size_t storage_size(int nvars, int order) {
  const auto n = static_cast<std::size_t>(nvars);
  std::size_t size = 1;
  std::size_t block = 1;
  for (int k = 1; k <= order; ++k) {
    block *= n;
    size += block;
  }
  return size;
}

void check_order(int order) {
  if (order < 0 || order > Jet::kMaxOrder) {
    throw std::invalid_argument("jet order must be in [0, 3], got " + std::to_string(order));
  }
}

}  // namespace

Jet::Jet(int nvars, int order) : nvars_(nvars), order_(order) {
  check_order(order);
  if (nvars < 0) throw std::invalid_argument("jet needs a non-negative variable count");
  c_.assign(storage_size(nvars, order), 0.0);
}

Jet Jet::constant(int nvars, int order, double value) {
  Jet j(nvars, order);
  j.c_[0] = value;
  return j;
}

Jet Jet::variable(int nvars, int order, int index, double value) {
  if (index < 0 || index >= nvars) throw std::out_of_range("jet variable index out of range");
  Jet j = constant(nvars, order, value);
  if (order >= 1) j.c_[1 + static_cast<std::size_t>(index)] = 1.0;
  return j;
}

double Jet::d(int i) const {
  if (order_ < 1) throw std::out_of_range("first derivative requested from an order-0 jet");
  if (i < 0 || i >= nvars_) throw std::out_of_range("jet variable index out of range");
  return c_[1 + static_cast<std::size_t>(i)];
}

double Jet::d(int i, int j) const {
  if (order_ < 2) throw std::out_of_range("second derivative requested from a jet of order < 2");
  if (i < 0 || i >= nvars_ || j < 0 || j >= nvars_) throw std::out_of_range("jet variable index out of range");
  return c_[hess_offset() + static_cast<std::size_t>(i * nvars_ + j)];
}

double Jet::d(int i, int j, int k) const {
  if (order_ < 3) throw std::out_of_range("third derivative requested from a jet of order < 3");
  if (i < 0 || i >= nvars_ || j < 0 || j >= nvars_ || k < 0 || k >= nvars_) {
    throw std::out_of_range("jet variable index out of range");
  }
  return c_[third_offset() + static_cast<std::size_t>((i * nvars_ + j) * nvars_ + k)];
}

double Jet::extract(std::span<const int> multi_index) const {
  if (static_cast<int>(multi_index.size()) != nvars_) {
    throw std::out_of_range("multi-index length does not match the jet's variable count");
  }
  std::vector<int> idx;
  for (int var = 0; var < nvars_; ++var) {
    if (multi_index[static_cast<std::size_t>(var)] < 0) throw std::out_of_range("negative multi-index entry");
    for (int r = 0; r < multi_index[static_cast<std::size_t>(var)]; ++r) idx.push_back(var);
  }
  if (static_cast<int>(idx.size()) > order_) {
    throw std::out_of_range("multi-index degree exceeds the jet order");
  }
  switch (idx.size()) {
    case 0: return value();
    case 1: return d(idx[0]);
    case 2: return d(idx[0], idx[1]);
    default: return d(idx[0], idx[1], idx[2]);
  }
}

Jet Jet::partial(int i) const {
  if (order_ < 1) throw std::out_of_range("cannot differentiate an order-0 jet");
  if (i < 0 || i >= nvars_) throw std::out_of_range("jet variable index out of range");
  Jet r(nvars_, order_ - 1);
  r.c_[0] = d(i);
  if (order_ >= 2) {
    for (int a = 0; a < nvars_; ++a) r.c_[1 + static_cast<std::size_t>(a)] = d(i, a);
  }
  if (order_ >= 3) {
    for (int a = 0; a < nvars_; ++a) {
      for (int b = 0; b < nvars_; ++b) r.h(a, b) = d(i, a, b);
    }
  }
  return r;
}

Jet Jet::truncated(int order) const {
  check_order(order);
  if (order > order_) throw std::invalid_argument("cannot raise the order of a jet by truncation");
  Jet r = *this;
  r.order_ = order;
  r.c_.resize(storage_size(nvars_, order));
  return r;
}

Jet Jet::embedded(int nvars) const {
  if (nvars < nvars_) throw std::invalid_argument("embedding must not reduce the variable count");
  Jet r(nvars, order_);
  r.c_[0] = c_[0];
  for (int i = 0; i < nvars_ && order_ >= 1; ++i) {
    r.c_[1 + static_cast<std::size_t>(i)] = d(i);
    for (int j = 0; j < nvars_ && order_ >= 2; ++j) {
      r.h(i, j) = d(i, j);
      for (int k = 0; k < nvars_ && order_ >= 3; ++k) r.t(i, j, k) = d(i, j, k);
    }
  }
  return r;
}

void Jet::require_compatible(const Jet& o, const char* op) const {
  if (nvars_ != o.nvars_ || order_ != o.order_) {
    std::ostringstream msg;
    msg << "jet " << op << ": mismatched operands (nvars " << nvars_ << " vs " << o.nvars_ << ", order "
        << order_ << " vs " << o.order_ << ")";
    throw std::invalid_argument(msg.str());
  }
}

Jet& Jet::operator+=(const Jet& o) {
  require_compatible(o, "add");
  for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
  return *this;
}

Jet& Jet::operator-=(const Jet& o) {
  require_compatible(o, "sub");
  for (std::size_t i = 0; i < c_.size(); ++i) c_[i] -= o.c_[i];
  return *this;
}

Jet& Jet::operator*=(const Jet& o) { return *this = *this * o; }
Jet& Jet::operator/=(const Jet& o) { return *this = *this / o; }

Jet& Jet::operator+=(double s) {
  c_[0] += s;
  return *this;
}

Jet& Jet::operator-=(double s) {
  c_[0] -= s;
  return *this;
}

Jet& Jet::operator*=(double s) {
  for (double& c : c_) c *= s;
  return *this;
}

Jet& Jet::operator/=(double s) {
  if (s == 0.0) throw DomainError("jet division by zero scalar");
  for (double& c : c_) c /= s;
  return *this;
}

Jet operator-(Jet a) {
  for (double& c : a.c_) c = -c;
  return a;
}

Jet operator*(const Jet& a, const Jet& b) {
  a.require_compatible(b, "mul");
  const int n = a.nvars_;
  Jet r(n, a.order_);
  const double a0 = a.c_[0];
  const double b0 = b.c_[0];
  r.c_[0] = a0 * b0;
  if (a.order_ < 1) return r;
  const double* ag = &a.c_[1];
  const double* bg = &b.c_[1];
  for (int i = 0; i < n; ++i) r.c_[1 + static_cast<std::size_t>(i)] = ag[i] * b0 + a0 * bg[i];
  if (a.order_ < 2) return r;
  const double* ah = &a.c_[a.hess_offset()];
  const double* bh = &b.c_[b.hess_offset()];
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const int ij = i * n + j;
      r.h(i, j) = ah[ij] * b0 + ag[i] * bg[j] + ag[j] * bg[i] + a0 * bh[ij];
    }
  }
  if (a.order_ < 3) return r;
  const double* at = &a.c_[a.third_offset()];
  const double* bt = &b.c_[b.third_offset()];
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) {
        const int ijk = (i * n + j) * n + k;
        r.t(i, j, k) = at[ijk] * b0 + ah[i * n + j] * bg[k] + ah[i * n + k] * bg[j] + ah[j * n + k] * bg[i] +
                       ag[i] * bh[j * n + k] + ag[j] * bh[i * n + k] + ag[k] * bh[i * n + j] + a0 * bt[ijk];
      }
    }
  }
  return r;
}

Jet operator/(const Jet& a, const Jet& b) {
  a.require_compatible(b, "div");
  return a * reciprocal(b);
}

Jet operator/(double s, const Jet& a) { return reciprocal(a) * s; }

Jet Jet::compose(const std::array<double, 4>& f) const {
  const int n = nvars_;
  Jet r(n, order_);
  r.c_[0] = f[0];
  if (order_ < 1) return r;
  const double* g = &c_[1];
  for (int i = 0; i < n; ++i) r.c_[1 + static_cast<std::size_t>(i)] = f[1] * g[i];
  if (order_ < 2) return r;
  const double* hs = &c_[hess_offset()];
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) r.h(i, j) = f[2] * g[i] * g[j] + f[1] * hs[i * n + j];
  }
  if (order_ < 3) return r;
  const double* ts = &c_[third_offset()];
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) {
        r.t(i, j, k) = f[3] * g[i] * g[j] * g[k] +
                       f[2] * (hs[i * n + j] * g[k] + hs[i * n + k] * g[j] + hs[j * n + k] * g[i]) +
                       f[1] * ts[(i * n + j) * n + k];
      }
    }
  }
  return r;
}

Jet sin(const Jet& a) {
  const double s = std::sin(a.value());
  const double c = std::cos(a.value());
  return a.compose({s, c, -s, -c});
}

Jet cos(const Jet& a) {
  const double s = std::sin(a.value());
  const double c = std::cos(a.value());
  return a.compose({c, -s, -c, s});
}

Jet tan(const Jet& a) {
  const double c = std::cos(a.value());
  if (std::abs(c) < 1e-300) throw DomainError("tan: argument is a pole");
  const double t = std::tan(a.value());
  const double sec2 = 1.0 + t * t;
  return a.compose({t, sec2, 2.0 * t * sec2, sec2 * (2.0 * sec2 + 4.0 * t * t)});
}

Jet exp(const Jet& a) {
  const double e = std::exp(a.value());
  return a.compose({e, e, e, e});
}

Jet log(const Jet& a) {
  const double x = a.value();
  if (!(x > 0.0)) throw DomainError("log of non-positive value");
  return a.compose({std::log(x), 1.0 / x, -1.0 / (x * x), 2.0 / (x * x * x)});
}

Jet sqrt(const Jet& a) {
  const double x = a.value();
  if (x < 0.0) throw DomainError("sqrt of negative value");
  if (x == 0.0 && a.order() > 0) throw DomainError("sqrt is not differentiable at zero");
  const double s = std::sqrt(x);
  if (a.order() == 0) return Jet::constant(a.nvars(), 0, s);
  return a.compose({s, 0.5 / s, -0.25 / (s * x), 0.375 / (s * x * x)});
}

Jet sinh(const Jet& a) {
  const double sh = std::sinh(a.value());
  const double ch = std::cosh(a.value());
  return a.compose({sh, ch, sh, ch});
}

Jet cosh(const Jet& a) {
  const double sh = std::sinh(a.value());
  const double ch = std::cosh(a.value());
  return a.compose({ch, sh, ch, sh});
}

Jet tanh(const Jet& a) {
  const double t = std::tanh(a.value());
  const double s = 1.0 - t * t;
  return a.compose({t, s, -2.0 * t * s, s * (6.0 * t * t - 2.0)});
}

Jet reciprocal(const Jet& a) {
  const double x = a.value();
  if (x == 0.0) throw DomainError("division by zero");
  const double r = 1.0 / x;
  return a.compose({r, -r * r, 2.0 * r * r * r, -6.0 * r * r * r * r});
}

Jet pow(const Jet& a, int exponent) {
  const double x = a.value();
  if (exponent < 0 && x == 0.0) throw DomainError("division by zero (negative power of zero)");
  std::array<double, 4> f{};
  double coeff = 1.0;
  for (int k = 0; k < 4; ++k) {
    const int e = exponent - k;
    f[static_cast<std::size_t>(k)] = coeff == 0.0 ? 0.0 : coeff * std::pow(x, e);
    coeff *= static_cast<double>(e);
  }
  return a.compose(f);
}

JetMatrix::JetMatrix(int dim, int nvars, int order)
    : dim_(dim), nvars_(nvars), order_(order),
      m_(static_cast<std::size_t>(dim * dim), Jet(nvars, order)) {}

JetMatrix JetMatrix::truncated(int order) const {
  JetMatrix r(dim_, nvars_, order);
  for (std::size_t i = 0; i < m_.size(); ++i) r.m_[i] = m_[i].truncated(order);
  return r;
}

JetMatrix JetMatrix::embedded(int nvars) const {
  JetMatrix r(dim_, nvars, order_);
  for (std::size_t i = 0; i < m_.size(); ++i) r.m_[i] = m_[i].embedded(nvars);
  return r;
}

JetMatrix operator*(const JetMatrix& a, const JetMatrix& b) {
  if (a.dim_ != b.dim_) throw std::invalid_argument("jet matrix product: dimension mismatch");
  JetMatrix r(a.dim_, a.nvars_, a.order_);
  for (int i = 0; i < a.dim_; ++i) {
    for (int j = 0; j < a.dim_; ++j) {
      Jet acc(a.nvars_, a.order_);
      for (int k = 0; k < a.dim_; ++k) acc += a(i, k) * b(k, j);
      r(i, j) = acc;
    }
  }
  return r;
}

JetMatrix inverse(const JetMatrix& a, double max_condition) {
  const int n = a.dim();
  Eigen::MatrixXd value(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) value(i, j) = a(i, j).value();
  }
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(value);
  const auto& sv = svd.singularValues();
  const double smin = sv(n - 1);
  if (!(smin > 0.0) || sv(0) / smin > max_condition) {
    std::ostringstream msg;
    msg << "singular matrix (condition number " << (smin > 0.0 ? sv(0) / smin : INFINITY) << " exceeds "
        << max_condition << ")";
    throw DomainError(msg.str());
  }
  const Eigen::MatrixXd inv = value.inverse();

  JetMatrix b(n, a.nvars(), a.order());
  JetMatrix nil(n, a.nvars(), a.order());
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      b(i, j) = Jet::constant(a.nvars(), a.order(), inv(i, j));
      nil(i, j) = a(i, j) - value(i, j);
    }
  }
  // (B0 + N)^-1 = sum_k (-B N)^k B; N has no value part so the series stops
  // after `order` terms.
  const JetMatrix step = b * nil;
  JetMatrix term = b;
  JetMatrix result = b;
  for (int k = 1; k <= a.order(); ++k) {
    term = step * term;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (k % 2 == 1) {
          result(i, j) -= term(i, j);
        } else {
          result(i, j) += term(i, j);
        }
      }
    }
  }
  return result;
}

}  // namespace tmgeom
