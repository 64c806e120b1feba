#pragma once

#include <complex>
#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace troquad {

using Complex = std::complex<double>;

/// Point in logarithmic coordinates y = log x. Projective classes are
/// represented with max_k y_k = 0.
class LogPoint {
 public:
  LogPoint() = default;
  explicit LogPoint(std::vector<double> y);

  std::size_t size() const { return y_.size(); }
  std::span<const double> view() const { return y_; }
  operator std::span<const double>() const { return y_; }  // NOLINT
  double operator[](std::size_t k) const { return y_[k]; }

  /// Shift so that the largest coordinate is zero.
  LogPoint normalized() const;

 private:
  std::vector<double> y_;
};

/// Multivariate polynomial stored as a list of (exponent, coefficient)
/// terms. Exponents are non-negative integers, coefficients nonzero and no
/// exponent appears twice. The Newton polytope is implicit in the support.
class SparsePolynomial {
 public:
  struct Term {
    std::vector<int> exponent;
    Complex coeff;
  };

  explicit SparsePolynomial(std::size_t n_vars) : n_vars_(n_vars) {}

  /// Duplicate exponents are merged and zero coefficients dropped.
  SparsePolynomial(std::size_t n_vars, std::vector<Term> terms);

  std::size_t n_vars() const { return n_vars_; }
  std::size_t size() const { return terms_.size(); }
  bool empty() const { return terms_.empty(); }
  const std::vector<Term>& terms() const { return terms_; }

  bool is_homogeneous() const;
  /// Common coordinate sum of the support; throws if not homogeneous.
  int degree() const;

  std::vector<std::vector<int>> support() const;

 private:
  std::size_t n_vars_;
  std::vector<Term> terms_;
};

/// log p^tr(e^y) = max over the support of <y, l>.
double trop_eval_log(const SparsePolynomial& p, std::span<const double> y);

/// Truncation to the face of the Newton polytope maximizing <y, .>.
/// All support points attaining the maximum are kept.
SparsePolynomial truncate(const SparsePolynomial& p, std::span<const double> y);

/// Sum of |c_l|; bounds |p(x)| <= C p^tr(x) for all positive x.
double upper_bound_constant(const SparsePolynomial& p);

/// Smallest |c_l|.
double min_abs_coefficient(const SparsePolynomial& p);

struct LogValue {
  double log_abs;  // -inf when the value vanishes
  Complex phase;   // unit modulus
  bool vanishes;
};

/// p(e^y) = phase * exp(log_abs), evaluated with the tropical maximum
/// factored out so no term overflows.
LogValue eval_log(const SparsePolynomial& p, std::span<const double> y);

/// Reads the text format: one term per line `re im e1 ... en`, `#` comments.
SparsePolynomial parse_polynomial(std::istream& in);
SparsePolynomial load_polynomial(const std::string& path);
void write_polynomial(std::ostream& out, const SparsePolynomial& p);

}  // namespace troquad
