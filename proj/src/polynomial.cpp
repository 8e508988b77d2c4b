#include "gas/polynomial.hpp"

#include <cmath>
#include <string>

#include "gas/common.hpp"

namespace gas {

Polynomial::Polynomial(std::vector<double> coeffs) : coeffs_(std::move(coeffs)) {
  trim();
  if (degree() > kMaxDegree) {
    throw NumericError("polynomial degree " + std::to_string(degree()) + " exceeds cap of " +
                       std::to_string(kMaxDegree));
  }
}

Polynomial Polynomial::constant(double c) { return Polynomial(std::vector<double>{c}); }

Polynomial Polynomial::monomial(int degree, double scale) {
  if (degree < 0) throw ConfigError("monomial degree must be non-negative");
  std::vector<double> c(static_cast<std::size_t>(degree) + 1, 0.0);
  c.back() = scale;
  return Polynomial(std::move(c));
}

double Polynomial::operator()(double x) const {
  double acc = 0.0;
  for (std::size_t i = coeffs_.size(); i-- > 0;) acc = acc * x + coeffs_[i];
  return acc;
}

Polynomial Polynomial::derivative() const {
  if (coeffs_.size() <= 1) return Polynomial();
  std::vector<double> d(coeffs_.size() - 1);
  for (std::size_t i = 1; i < coeffs_.size(); ++i) d[i - 1] = coeffs_[i] * static_cast<double>(i);
  return Polynomial(std::move(d));
}

Polynomial& Polynomial::operator+=(const Polynomial& other) {
  if (other.coeffs_.size() > coeffs_.size()) coeffs_.resize(other.coeffs_.size(), 0.0);
  for (std::size_t i = 0; i < other.coeffs_.size(); ++i) coeffs_[i] += other.coeffs_[i];
  trim();
  return *this;
}

Polynomial& Polynomial::operator-=(const Polynomial& other) {
  if (other.coeffs_.size() > coeffs_.size()) coeffs_.resize(other.coeffs_.size(), 0.0);
  for (std::size_t i = 0; i < other.coeffs_.size(); ++i) coeffs_[i] -= other.coeffs_[i];
  trim();
  return *this;
}

Polynomial& Polynomial::operator*=(double scale) {
  for (double& c : coeffs_) c *= scale;
  trim();
  return *this;
}

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
  if (a.is_zero() || b.is_zero()) return Polynomial();
  const int product_degree = a.degree() + b.degree();
  if (product_degree > Polynomial::kMaxDegree) {
    throw NumericError("polynomial product degree " + std::to_string(product_degree) +
                       " exceeds cap of " + std::to_string(Polynomial::kMaxDegree));
  }
  std::vector<double> c(static_cast<std::size_t>(product_degree) + 1, 0.0);
  for (std::size_t i = 0; i < a.coeffs_.size(); ++i) {
    for (std::size_t j = 0; j < b.coeffs_.size(); ++j) {
      c[i + j] += a.coeffs_[i] * b.coeffs_[j];
    }
  }
  return Polynomial(std::move(c));
}

void Polynomial::trim() {
  while (!coeffs_.empty() && coeffs_.back() == 0.0) coeffs_.pop_back();
}

std::vector<Polynomial> lagrange_basis(std::span<const double> points) {
  const std::size_t n = points.size();
  if (n < 2) throw ConfigError("lagrange_basis: need at least two points");
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (points[i] == points[j]) {
        throw ConfigError("lagrange_basis: duplicate interpolation point at index " +
                          std::to_string(j));
      }
    }
  }
  std::vector<Polynomial> basis;
  basis.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Polynomial li = Polynomial::constant(1.0);
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const double denom = points[i] - points[j];
      li = li * Polynomial({-points[j] / denom, 1.0 / denom});
    }
    basis.push_back(std::move(li));
  }
  return basis;
}

}  // namespace gas
