#pragma once

#include <array>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace tmgeom {

/// Raised when a jet operation leaves the domain of an elementary function
/// (log of a non-positive value, division by zero, ...).
class DomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Truncated multivariate Taylor expansion of a smooth function at a point.
///
/// Coefficients are stored as true partial derivatives in dense full tensors:
/// value, gradient (N), Hessian (N*N) and third derivative (N*N*N). The
/// higher blocks are symmetric by construction since every operation below
/// builds them from symmetric expressions. Order is capped at 3.
class Jet {
 public:
  static constexpr int kMaxOrder = 3;

  Jet() = default;
  Jet(int nvars, int order);

  static Jet constant(int nvars, int order, double value);
  /// The coordinate function x_index, evaluated at `value`.
  static Jet variable(int nvars, int order, int index, double value);

  [[nodiscard]] int nvars() const { return nvars_; }
  [[nodiscard]] int order() const { return order_; }

  [[nodiscard]] double value() const { return c_[0]; }
  [[nodiscard]] double d(int i) const;
  [[nodiscard]] double d(int i, int j) const;
  [[nodiscard]] double d(int i, int j, int k) const;

  /// Partial derivative for a multi-index given as per-variable counts,
  /// e.g. {1, 1} is d^2 f / dx0 dx1.
  [[nodiscard]] double extract(std::span<const int> multi_index) const;

  /// d/dx_i as a jet one order lower.
  [[nodiscard]] Jet partial(int i) const;
  /// Drops every coefficient above `order`.
  [[nodiscard]] Jet truncated(int order) const;
  /// Same function viewed in `nvars` >= nvars() variables; the extra
  /// variables are appended and the function does not depend on them.
  [[nodiscard]] Jet embedded(int nvars) const;

  Jet& operator+=(const Jet& o);
  Jet& operator-=(const Jet& o);
  Jet& operator*=(const Jet& o);
  Jet& operator/=(const Jet& o);
  Jet& operator+=(double s);
  Jet& operator-=(double s);
  Jet& operator*=(double s);
  Jet& operator/=(double s);

  friend Jet operator-(Jet a);
  friend Jet operator+(Jet a, const Jet& b) { return a += b; }
  friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
  friend Jet operator*(const Jet& a, const Jet& b);
  friend Jet operator/(const Jet& a, const Jet& b);
  friend Jet operator+(Jet a, double s) { return a += s; }
  friend Jet operator+(double s, Jet a) { return a += s; }
  friend Jet operator-(Jet a, double s) { return a -= s; }
  friend Jet operator-(double s, Jet a) { return (-a) += s; }
  friend Jet operator*(Jet a, double s) { return a *= s; }
  friend Jet operator*(double s, Jet a) { return a *= s; }
  friend Jet operator/(Jet a, double s) { return a /= s; }
  friend Jet operator/(double s, const Jet& a);

  /// Faa di Bruno through order 3 for a univariate function whose value and
  /// first three derivatives at value() are given in `f`.
  [[nodiscard]] Jet compose(const std::array<double, 4>& f) const;

  [[nodiscard]] std::span<const double> raw() const { return c_; }

 private:
  void require_compatible(const Jet& o, const char* op) const;
  [[nodiscard]] std::size_t hess_offset() const { return 1 + static_cast<std::size_t>(nvars_); }
  [[nodiscard]] std::size_t third_offset() const {
    return hess_offset() + static_cast<std::size_t>(nvars_) * static_cast<std::size_t>(nvars_);
  }
  double& h(int i, int j) { return c_[hess_offset() + static_cast<std::size_t>(i * nvars_ + j)]; }
  double& t(int i, int j, int k) {
    return c_[third_offset() + static_cast<std::size_t>((i * nvars_ + j) * nvars_ + k)];
  }

  int nvars_ = 0;
  int order_ = 0;
  std::vector<double> c_{0.0};
};

Jet sin(const Jet& a);
Jet cos(const Jet& a);
Jet tan(const Jet& a);
Jet exp(const Jet& a);
Jet log(const Jet& a);
Jet sqrt(const Jet& a);
Jet sinh(const Jet& a);
Jet cosh(const Jet& a);
Jet tanh(const Jet& a);
Jet reciprocal(const Jet& a);
/// Integer power; negative exponents require a non-zero value.
Jet pow(const Jet& a, int exponent);

/// Row-major square matrix of jets sharing nvars and order.
class JetMatrix {
 public:
  JetMatrix() = default;
  JetMatrix(int dim, int nvars, int order);

  [[nodiscard]] int dim() const { return dim_; }
  [[nodiscard]] int nvars() const { return nvars_; }
  [[nodiscard]] int order() const { return order_; }

  Jet& operator()(int i, int j) { return m_[static_cast<std::size_t>(i * dim_ + j)]; }
  const Jet& operator()(int i, int j) const { return m_[static_cast<std::size_t>(i * dim_ + j)]; }

  [[nodiscard]] JetMatrix truncated(int order) const;
  [[nodiscard]] JetMatrix embedded(int nvars) const;

  friend JetMatrix operator*(const JetMatrix& a, const JetMatrix& b);

 private:
  int dim_ = 0;
  int nvars_ = 0;
  int order_ = 0;
  std::vector<Jet> m_;
};

/// Inverse of a jet matrix whose value part has condition number below
/// `max_condition`. Uses the nilpotent Neumann series
/// A^-1 = B - B N B + B N B N B - ..., with B the inverse of the value part.
JetMatrix inverse(const JetMatrix& a, double max_condition = 1e12);

}  // namespace tmgeom
