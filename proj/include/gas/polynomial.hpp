#pragma once

#include <span>
#include <vector>

namespace gas {

/// Univariate polynomial in monomial form, coefficients ascending by degree.
/// Orders in this project stay at or below the quadrature order, so monomial
/// conditioning is fine; the hard cap guards against misuse.
class Polynomial {
 public:
  static constexpr int kMaxDegree = 32;

  Polynomial() = default;  // zero polynomial
  explicit Polynomial(std::vector<double> coeffs);

  static Polynomial constant(double c);
  static Polynomial monomial(int degree, double scale = 1.0);

  /// Degree of the trimmed form; the zero polynomial reports -1.
  int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
  bool is_zero() const { return coeffs_.empty(); }
  const std::vector<double>& coeffs() const { return coeffs_; }

  double operator()(double x) const;  // Horner evaluation
  Polynomial derivative() const;

  Polynomial& operator+=(const Polynomial& other);
  Polynomial& operator-=(const Polynomial& other);
  Polynomial& operator*=(double scale);

  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
  friend Polynomial operator*(Polynomial a, double s) { return a *= s; }
  friend Polynomial operator*(double s, Polynomial a) { return a *= s; }
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b);

 private:
  void trim();
  std::vector<double> coeffs_;
};

/// Lagrange cardinal polynomials L_i for the given nodes: L_i(x_j) = delta_ij.
/// Requires at least two pairwise distinct points.
std::vector<Polynomial> lagrange_basis(std::span<const double> points);

}  // namespace gas
