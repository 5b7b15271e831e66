#include "pmon/polynomial.hpp"

#include <algorithm>
#include <cmath>

namespace pmon {

namespace {

template <typename C>
void trim(C& c) {
  while (c.size() > 1 && c.back() == 0.0) c.pop_back();
}

// Bisect [left, right] keeping pred(left) false and pred(right) true.
template <typename Pred>
double bisect(double left, double right, Pred pred) {
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (left + right);
    if (mid <= left || mid >= right) break;
    if (pred(mid)) {
      right = mid;
    } else {
      left = mid;
    }
  }
  return right;
}

// Endpoints of the monotone pieces of p on [lo, hi].
std::vector<double> monotone_breaks(const Polynomial& p, double lo, double hi) {
  std::vector<double> breaks{lo};
  if (p.degree() >= 2) {
    for (double c : roots_in(p.derivative(), lo, hi)) {
      if (c > breaks.back() && c < hi) breaks.push_back(c);
    }
  }
  breaks.push_back(hi);
  return breaks;
}

}  // namespace

Polynomial::Polynomial(std::vector<double> coeffs) : coeffs_(coeffs.begin(), coeffs.end()) {
  if (coeffs_.empty()) coeffs_.push_back(0.0);
  trim(coeffs_);
}

Polynomial::Polynomial(std::initializer_list<double> coeffs) : coeffs_(coeffs.begin(), coeffs.end()) {
  if (coeffs_.empty()) coeffs_.push_back(0.0);
  trim(coeffs_);
}

double Polynomial::operator()(double x) const {
  double acc = 0.0;
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * x + *it;
  return acc;
}

Polynomial Polynomial::derivative() const {
  Polynomial d;
  if (coeffs_.size() <= 1) return d;
  d.coeffs_.resize(coeffs_.size() - 1);
  for (std::size_t k = 1; k < coeffs_.size(); ++k) d.coeffs_[k - 1] = static_cast<double>(k) * coeffs_[k];
  trim(d.coeffs_);
  return d;
}

Polynomial Polynomial::antiderivative() const {
  Polynomial a;
  a.coeffs_.assign(coeffs_.size() + 1, 0.0);
  for (std::size_t k = 0; k < coeffs_.size(); ++k) a.coeffs_[k + 1] = coeffs_[k] / static_cast<double>(k + 1);
  trim(a.coeffs_);
  return a;
}

double Polynomial::integrate(double lo, double hi) const {
  const Polynomial a = antiderivative();
  return a(hi) - a(lo);
}

Polynomial& Polynomial::operator+=(const Polynomial& rhs) {
  if (rhs.coeffs_.size() > coeffs_.size()) coeffs_.resize(rhs.coeffs_.size(), 0.0);
  for (std::size_t k = 0; k < rhs.coeffs_.size(); ++k) coeffs_[k] += rhs.coeffs_[k];
  trim(coeffs_);
  return *this;
}

Polynomial& Polynomial::operator-=(const Polynomial& rhs) {
  if (rhs.coeffs_.size() > coeffs_.size()) coeffs_.resize(rhs.coeffs_.size(), 0.0);
  for (std::size_t k = 0; k < rhs.coeffs_.size(); ++k) coeffs_[k] -= rhs.coeffs_[k];
  trim(coeffs_);
  return *this;
}

Polynomial& Polynomial::operator*=(double s) {
  for (double& c : coeffs_) c *= s;
  trim(coeffs_);
  return *this;
}

Polynomial operator*(const Polynomial& lhs, const Polynomial& rhs) {
  Polynomial out;
  out.coeffs_.assign(lhs.coeffs_.size() + rhs.coeffs_.size() - 1, 0.0);
  for (std::size_t i = 0; i < lhs.coeffs_.size(); ++i) {
    for (std::size_t j = 0; j < rhs.coeffs_.size(); ++j) out.coeffs_[i + j] += lhs.coeffs_[i] * rhs.coeffs_[j];
  }
  trim(out.coeffs_);
  return out;
}

int sign_right_of(const Polynomial& p, double x) {
  Polynomial q = p;
  for (std::size_t k = 0; k <= p.degree(); ++k) {
    const double v = q(x);
    if (v > 0.0) return 1;
    if (v < 0.0) return -1;
    q = q.derivative();
  }
  return 0;
}

std::vector<double> roots_in(const Polynomial& p, double lo, double hi) {
  std::vector<double> roots;
  if (!(hi >= lo)) return roots;
  if (p.degree() == 0) return roots;
  if (p.degree() == 1) {
    const double r = -p.coefficient(0) / p.coefficient(1);
    if (r >= lo && r <= hi) roots.push_back(r);
    return roots;
  }
  const auto breaks = monotone_breaks(p, lo, hi);
  for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
    const double a = breaks[k];
    const double b = breaks[k + 1];
    const double fa = p(a);
    const double fb = p(b);
    if (fa == 0.0) {
      if (roots.empty() || roots.back() != a) roots.push_back(a);
      continue;
    }
    if (fb == 0.0) {
      roots.push_back(b);
      continue;
    }
    if ((fa < 0.0) != (fb < 0.0)) {
      const bool rising = fa < 0.0;
      roots.push_back(bisect(a, b, [&](double x) { return rising ? p(x) >= 0.0 : p(x) <= 0.0; }));
    }
  }
  return roots;
}

std::optional<double> first_upcrossing(const Polynomial& p, double lo, double hi) {
  if (!(hi > lo)) return std::nullopt;
  const auto breaks = monotone_breaks(p, lo, hi);
  for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
    const double a = breaks[k];
    const double b = breaks[k + 1];
    if (p(b) > 0.0) {
      if (p(a) > 0.0) return a;
      return bisect(a, b, [&](double x) { return p(x) > 0.0; });
    }
  }
  return std::nullopt;
}

std::optional<double> first_nonpositive(const Polynomial& p, double lo, double hi) {
  if (!(hi > lo)) return std::nullopt;
  const auto breaks = monotone_breaks(p, lo, hi);
  for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
    const double a = breaks[k];
    const double b = breaks[k + 1];
    if (p(b) <= 0.0) {
      if (p(a) <= 0.0) return a;
      return bisect(a, b, [&](double x) { return p(x) <= 0.0; });
    }
  }
  return std::nullopt;
}

}  // namespace pmon
