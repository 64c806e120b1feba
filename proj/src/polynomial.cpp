#include "troquad/polynomial.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <map>
#include <sstream>

#include "troquad/errors.hpp"

namespace troquad {

namespace {

double dot(std::span<const double> y, const std::vector<int>& l) {
  double s = 0.0;
  for (std::size_t k = 0; k < l.size(); ++k) {
    if (l[k] != 0) s += y[k] * static_cast<double>(l[k]);
  }
  return s;
}

void require_nonempty(const SparsePolynomial& p) {
  if (p.empty()) throw Error("zero polynomial has no tropical approximation");
}

void require_dimension(const SparsePolynomial& p, std::span<const double> y) {
  if (y.size() != p.n_vars()) {
    throw Error("point has " + std::to_string(y.size()) +
                " coordinates, polynomial has " + std::to_string(p.n_vars()) +
                " variables");
  }
}

}  // namespace

LogPoint::LogPoint(std::vector<double> y) : y_(std::move(y)) {
  for (double v : y_) {
    if (!std::isfinite(v)) throw Error("log point has a non-finite coordinate");
  }
}

LogPoint LogPoint::normalized() const {
  if (y_.empty()) return *this;
  const double top = *std::max_element(y_.begin(), y_.end());
  std::vector<double> out(y_);
  for (double& v : out) v -= top;
  return LogPoint(std::move(out));
}

SparsePolynomial::SparsePolynomial(std::size_t n_vars, std::vector<Term> terms)
    : n_vars_(n_vars) {
  if (n_vars == 0) throw Error("polynomial needs at least one variable");
  std::map<std::vector<int>, Complex> merged;
  for (auto& t : terms) {
    if (t.exponent.size() != n_vars) {
      throw Error("exponent vector of length " +
                  std::to_string(t.exponent.size()) + ", expected " +
                  std::to_string(n_vars));
    }
    for (int e : t.exponent) {
      if (e < 0) throw Error("negative exponent in polynomial term");
    }
    if (!std::isfinite(t.coeff.real()) || !std::isfinite(t.coeff.imag())) {
      throw Error("non-finite coefficient");
    }
    merged[t.exponent] += t.coeff;
  }
  for (auto& [exp, c] : merged) {
    if (c != Complex(0.0, 0.0)) terms_.push_back({exp, c});
  }
}

bool SparsePolynomial::is_homogeneous() const {
  if (terms_.empty()) return true;
  auto sum = [](const std::vector<int>& e) {
    int s = 0;
    for (int v : e) s += v;
    return s;
  };
  const int d = sum(terms_.front().exponent);
  return std::all_of(terms_.begin(), terms_.end(),
                     [&](const Term& t) { return sum(t.exponent) == d; });
}

int SparsePolynomial::degree() const {
  if (!is_homogeneous()) throw Error("polynomial is not homogeneous");
  if (terms_.empty()) return 0;
  int s = 0;
  for (int v : terms_.front().exponent) s += v;
  return s;
}

std::vector<std::vector<int>> SparsePolynomial::support() const {
  std::vector<std::vector<int>> out;
  out.reserve(terms_.size());
  for (const auto& t : terms_) out.push_back(t.exponent);
  return out;
}

double trop_eval_log(const SparsePolynomial& p, std::span<const double> y) {
  require_nonempty(p);
  require_dimension(p, y);
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& t : p.terms()) best = std::max(best, dot(y, t.exponent));
  return best;
}

SparsePolynomial truncate(const SparsePolynomial& p, std::span<const double> y) {
  require_nonempty(p);
  require_dimension(p, y);
  std::vector<double> values;
  values.reserve(p.size());
  for (const auto& t : p.terms()) values.push_back(dot(y, t.exponent));
  const double best = *std::max_element(values.begin(), values.end());
  // Dot products of integer exponents with y are exact for integral y and
  // otherwise agree up to rounding; ties within that rounding belong to the face.
  const double tol = 1e-12 * std::max(1.0, std::abs(best));
  std::vector<SparsePolynomial::Term> kept;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] >= best - tol) kept.push_back(p.terms()[i]);
  }
  return SparsePolynomial(p.n_vars(), std::move(kept));
}

double upper_bound_constant(const SparsePolynomial& p) {
  double c = 0.0;
  for (const auto& t : p.terms()) c += std::abs(t.coeff);
  return c;
}

double min_abs_coefficient(const SparsePolynomial& p) {
  require_nonempty(p);
  double c = std::numeric_limits<double>::infinity();
  for (const auto& t : p.terms()) c = std::min(c, std::abs(t.coeff));
  return c;
}

LogValue eval_log(const SparsePolynomial& p, std::span<const double> y) {
  const double top = trop_eval_log(p, y);
  Complex sum(0.0, 0.0);
  for (const auto& t : p.terms()) {
    sum += t.coeff * std::exp(dot(y, t.exponent) - top);
  }
  const double mag = std::abs(sum);
  if (mag == 0.0) {
    return {-std::numeric_limits<double>::infinity(), Complex(1.0, 0.0), true};
  }
  return {top + std::log(mag), sum / mag, false};
}

SparsePolynomial parse_polynomial(std::istream& in) {
  std::vector<SparsePolynomial::Term> terms;
  std::size_t n_vars = 0;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    std::vector<std::string> fields;
    for (std::string f; ls >> f;) fields.push_back(f);
    if (fields.size() < 3) {
      throw ParseError("line " + std::to_string(line_no) +
                       ": expected `re im e1 ... en`");
    }
    if (n_vars == 0) n_vars = fields.size() - 2;
    if (fields.size() - 2 != n_vars) {
      throw ParseError("line " + std::to_string(line_no) + ": expected " +
                       std::to_string(n_vars) + " exponents, found " +
                       std::to_string(fields.size() - 2));
    }
    SparsePolynomial::Term t;
    try {
      std::size_t pos = 0;
      const double re = std::stod(fields[0], &pos);
      if (pos != fields[0].size()) throw std::invalid_argument("re");
      const double im = std::stod(fields[1], &pos);
      if (pos != fields[1].size()) throw std::invalid_argument("im");
      t.coeff = Complex(re, im);
      for (std::size_t k = 2; k < fields.size(); ++k) {
        const int e = std::stoi(fields[k], &pos);
        if (pos != fields[k].size() || e < 0) throw std::invalid_argument("e");
        t.exponent.push_back(e);
      }
    } catch (const std::logic_error&) {
      throw ParseError("line " + std::to_string(line_no) +
                       ": malformed number in polynomial term");
    }
    terms.push_back(std::move(t));
  }
  if (n_vars == 0) throw ParseError("polynomial file has no terms");
  try {
    return SparsePolynomial(n_vars, std::move(terms));
  } catch (const ParseError&) {
    throw;
  } catch (const Error& e) {
    throw ParseError(e.what());
  }
}

SparsePolynomial load_polynomial(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open polynomial file " + path);
  try {
    return parse_polynomial(in);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

void write_polynomial(std::ostream& out, const SparsePolynomial& p) {
  out << std::setprecision(17);
  for (const auto& t : p.terms()) {
    out << t.coeff.real() << ' ' << t.coeff.imag();
    for (int e : t.exponent) out << ' ' << e;
    out << '\n';
  }
}

}  // namespace troquad
