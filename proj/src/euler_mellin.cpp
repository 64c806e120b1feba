#include "troquad/euler_mellin.hpp"

#include <cmath>
#include <memory>
#include <sstream>

#include "troquad/cones.hpp"
#include "troquad/errors.hpp"

namespace troquad {

std::size_t EulerMellinProblem::n_vars() const {
  if (!denominators.empty()) return denominators.front().n_vars();
  if (!numerators.empty()) return numerators.front().n_vars();
  return 0;
}

void EulerMellinProblem::validate() const {
  if (numerators.size() != numerator_powers.size() ||
      denominators.size() != denominator_powers.size()) {
    throw Error("each polynomial needs exactly one power");
  }
  if (denominators.empty()) throw Error("at least one denominator polynomial is required");
  const std::size_t n = n_vars();
  if (n < 2) throw Error("integrals need at least two variables");
  for (const auto* list : {&numerators, &denominators}) {
    for (const auto& q : *list) {
      if (q.n_vars() != n) throw Error("polynomials have different variable counts");
      if (q.empty()) throw Error("zero polynomial in integrand");
      if (!q.is_homogeneous()) throw Error("polynomials must be homogeneous");
    }
  }
  Complex degree = 0.0;
  for (std::size_t i = 0; i < numerators.size(); ++i) {
    degree += numerator_powers[i] * static_cast<double>(numerators[i].degree());
  }
  for (std::size_t j = 0; j < denominators.size(); ++j) {
    degree -= denominator_powers[j] * static_cast<double>(denominators[j].degree());
  }
  if (std::abs(degree) > 1e-9) {
    std::ostringstream os;
    os << "integrand is not homogeneous of degree 0 (degree " << degree.real() << " + "
       << degree.imag() << "i)";
    throw Error(os.str());
  }
}

namespace {

std::vector<RationalVector> scaled_vertices(const SparsePolynomial& q, const Rational& c) {
  std::vector<RationalVector> pts;
  for (const auto& t : q.terms()) {
    RationalVector v;
    for (int e : t.exponent) v.push_back(c * e);
    pts.push_back(std::move(v));
  }
  return polytope_vertices(std::move(pts));
}

void add_scaled(std::vector<RationalVector>& acc, const SparsePolynomial& q,
                const Rational& c) {
  const auto pts = scaled_vertices(q, c);
  std::vector<RationalVector> out;
  for (const auto& x : acc) {
    for (const auto& y : pts) {
      RationalVector s(x.size());
      for (std::size_t i = 0; i < x.size(); ++i) s[i] = x[i] + y[i];
      out.push_back(std::move(s));
    }
  }
  acc = polytope_vertices(std::move(out));
}

}  // namespace

std::pair<std::vector<RationalVector>, std::vector<RationalVector>>
euler_mellin_point_sets(const EulerMellinProblem& p) {
  p.validate();
  const std::size_t n = p.n_vars();
  std::vector<RationalVector> a{RationalVector(n, Rational(0))};
  std::vector<RationalVector> b{RationalVector(n, Rational(0))};
  auto place = [&](const SparsePolynomial& q, double re, bool numerator) {
    if (re == 0.0) return;
    const Rational c = to_rational(std::abs(re));
    const bool to_a = numerator == (re > 0.0);
    add_scaled(to_a ? a : b, q, c);
  };
  for (std::size_t i = 0; i < p.numerators.size(); ++i) {
    place(p.numerators[i], p.numerator_powers[i].real(), true);
  }
  for (std::size_t j = 0; j < p.denominators.size(); ++j) {
    place(p.denominators[j], p.denominator_powers[j].real(), false);
  }
  return {a, b};
}

EulerMellinIntegrand::EulerMellinIntegrand(const EulerMellinProblem& p,
                                           const SectorTable& t)
    : p_(&p) {
  if (t.n() != p.n_vars()) throw Error("sector table dimension does not match the integrand");
  for (const auto& s : t.sectors()) {
    std::vector<double> w;
    for (const auto& x : s.weight) w.push_back(to_double(x));
    weights_.push_back(std::move(w));
  }
}

bool EulerMellinIntegrand::operator()(const TropicalSample& s, std::span<double> out) const {
  const auto& w = weights_[s.sector];
  Complex log_f(0.0, 0.0);
  for (std::size_t i = 0; i < w.size(); ++i) log_f += w[i] * s.log_x[i];
  for (std::size_t j = 0; j < p_->denominators.size(); ++j) {
    const LogValue v = eval_log(p_->denominators[j], s.log_x);
    if (v.vanishes) return false;
    log_f -= p_->denominator_powers[j] * Complex(v.log_abs, std::arg(v.phase));
  }
  for (std::size_t i = 0; i < p_->numerators.size(); ++i) {
    const LogValue v = eval_log(p_->numerators[i], s.log_x);
    if (v.vanishes) {
      if (p_->numerator_powers[i].real() > 0.0) {
        out[0] = 0.0;
        out[1] = 0.0;
        return true;
      }
      return false;
    }
    log_f += p_->numerator_powers[i] * Complex(v.log_abs, std::arg(v.phase));
  }
  const Complex f = std::exp(log_f);
  out[0] = f.real();
  out[1] = f.imag();
  return std::isfinite(out[0]) && std::isfinite(out[1]);
}

KernelFactory euler_mellin_kernel(const EulerMellinProblem& p, const SectorTable& t) {
  return [&p, &t]() -> Kernel {
    auto f = std::make_shared<EulerMellinIntegrand>(p, t);
    auto s = std::make_shared<TropicalSample>(t.n());
    return [f, s, &t](RandomStream& rng, std::span<double> out) {
      sample_from_table(t, rng, *s);
      return (*f)(*s, out);
    };
  };
}

Complex parse_power(const std::string& text) {
  const auto colon = text.find(':');
  try {
    std::size_t pos = 0;
    if (colon == std::string::npos) {
      const double re = std::stod(text, &pos);
      if (pos != text.size()) throw std::invalid_argument(text);
      return {re, 0.0};
    }
    const std::string a = text.substr(0, colon), b = text.substr(colon + 1);
    const double re = std::stod(a, &pos);
    if (pos != a.size()) throw std::invalid_argument(text);
    const double im = std::stod(b, &pos);
    if (pos != b.size()) throw std::invalid_argument(text);
    return {re, im};
  } catch (const std::logic_error&) {
    throw ParseError("invalid power '" + text + "' (expected re or re:im)");
  }
}

}  // namespace troquad
