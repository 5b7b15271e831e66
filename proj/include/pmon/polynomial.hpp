#pragma once

#include <cstddef>
#include <initializer_list>
#include <optional>
#include <span>
#include <vector>

#include <boost/container/small_vector.hpp>

namespace pmon {

// Dense univariate polynomial, coefficients in increasing degree.
class Polynomial {
 public:
  Polynomial() : coeffs_{0.0} {}
  explicit Polynomial(std::vector<double> coeffs);
  Polynomial(std::initializer_list<double> coeffs);

  static Polynomial constant(double c) { return Polynomial({c}); }

  std::size_t degree() const { return coeffs_.empty() ? 0 : coeffs_.size() - 1; }
  std::span<const double> coefficients() const { return {coeffs_.data(), coeffs_.size()}; }
  double coefficient(std::size_t k) const { return k < coeffs_.size() ? coeffs_[k] : 0.0; }

  double operator()(double x) const;

  Polynomial derivative() const;
  /// Antiderivative vanishing at x = 0.
  Polynomial antiderivative() const;
  /// Integral over [lo, hi].
  double integrate(double lo, double hi) const;

  Polynomial& operator+=(const Polynomial& rhs);
  Polynomial& operator-=(const Polynomial& rhs);
  Polynomial& operator*=(double s);

  friend Polynomial operator+(Polynomial lhs, const Polynomial& rhs) { return lhs += rhs; }
  friend Polynomial operator-(Polynomial lhs, const Polynomial& rhs) { return lhs -= rhs; }
  friend Polynomial operator*(Polynomial lhs, double s) { return lhs *= s; }
  friend Polynomial operator*(double s, Polynomial rhs) { return rhs *= s; }
  friend Polynomial operator*(const Polynomial& lhs, const Polynomial& rhs);

 private:
  using Storage = boost::container::small_vector<double, 6>;
  Storage coeffs_;
};

/// Sign of p just to the right of x: the sign of the first nonzero
/// derivative at x. Returns 0 for the zero polynomial.
int sign_right_of(const Polynomial& p, double x);

/// All real roots of p in [lo, hi], ascending. Roots are isolated on the
/// monotone pieces between critical points (found recursively), then
/// bisected to full double precision. Multiple roots may be reported once.
std::vector<double> roots_in(const Polynomial& p, double lo, double hi);

/// First x in (lo, hi] at which p changes from <= 0 to > 0, given
/// p(lo) <= 0. Returns the right end of the final bisection bracket, so
/// p(result) > 0 whenever a crossing is found.
std::optional<double> first_upcrossing(const Polynomial& p, double lo, double hi);

/// First x in (lo, hi] with p(x) <= 0, given p(lo) > 0. Returns the right
/// end of the final bracket, so p(result) <= 0.
std::optional<double> first_nonpositive(const Polynomial& p, double lo, double hi);

}  // namespace pmon
