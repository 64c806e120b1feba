#include "troquad/estimator.hpp"

#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <sstream>
#include <thread>

#include "troquad/errors.hpp"

namespace troquad {

EstimatorState::EstimatorState(std::size_t orders, double scale)
    : scale_(scale), mean_(orders, 0.0), m2_(orders, 0.0), m3_(orders, 0.0), m4_(orders, 0.0) {
  if (orders == 0) throw Error("estimator needs at least one order");
}

void EstimatorState::add(std::span<const double> values) {
  ++count_;
  const double n = static_cast<double>(count_);
  for (std::size_t k = 0; k < mean_.size(); ++k) {
    const double delta = values[k] - mean_[k];
    const double dn = delta / n;
    const double term = delta * dn * (n - 1.0);
    mean_[k] += dn;
    m4_[k] += term * dn * dn * (n * n - 3.0 * n + 3.0) + 6.0 * dn * dn * m2_[k] - 4.0 * dn * m3_[k];
    m3_[k] += term * dn * (n - 2.0) - 3.0 * dn * m2_[k];
    m2_[k] += term;
  }
}

void EstimatorState::merge(const EstimatorState& other) {
  if (other.mean_.size() != mean_.size()) {
    throw Error("cannot merge estimator states with different order counts");
  }
  if (other.scale_ != scale_) {
    throw Error("cannot merge estimator states with different scales");
  }
  rejected_ += other.rejected_;
  if (other.count_ == 0) return;
  if (count_ == 0) {
    count_ = other.count_;
    mean_ = other.mean_;
    m2_ = other.m2_;
    m3_ = other.m3_;
    m4_ = other.m4_;
    return;
  }
  const double na = static_cast<double>(count_);
  const double nb = static_cast<double>(other.count_);
  const double n = na + nb;
  for (std::size_t k = 0; k < mean_.size(); ++k) {
    const double delta = other.mean_[k] - mean_[k];
    const double d2 = delta * delta;
    const double ma2 = m2_[k], mb2 = other.m2_[k];
    const double ma3 = m3_[k], mb3 = other.m3_[k];
    mean_[k] += delta * (nb / n);
    m4_[k] += other.m4_[k] + d2 * d2 * na * nb * (na * na - na * nb + nb * nb) / (n * n * n) +
              6.0 * d2 * (na * na * mb2 + nb * nb * ma2) / (n * n) +
              4.0 * delta * (na * mb3 - nb * ma3) / n;
    m3_[k] += mb3 + d2 * delta * na * nb * (na - nb) / (n * n) + 3.0 * delta * (na * mb2 - nb * ma2) / n;
    m2_[k] += mb2 + d2 * (na * nb / n);
  }
  count_ += other.count_;
}

double EstimatorState::std_error(std::size_t k) const {
  if (count_ < 2) return std::numeric_limits<double>::quiet_NaN();
  const double n = static_cast<double>(count_);
  return std::abs(scale_) * std::sqrt(std::max(m2_[k], 0.0) / (n * (n - 1.0)));
}

double EstimatorState::kurtosis(std::size_t k) const {
  if (count_ < 2 || !(m2_[k] > 0.0)) return std::numeric_limits<double>::quiet_NaN();
  return static_cast<double>(count_) * m4_[k] / (m2_[k] * m2_[k]);
}

EstimatorState merge(EstimatorState a, const EstimatorState& b) {
  a.merge(b);
  return a;
}

EstimateReport EstimateReport::from_state(const EstimatorState& s) {
  EstimateReport r;
  r.I_tr = s.scale();
  for (std::size_t k = 0; k < s.orders(); ++k) {
    r.estimate.push_back(s.estimate(k));
    r.std_error.push_back(s.std_error(k));
    r.kurtosis.push_back(s.kurtosis(k));
  }
  r.n_samples = s.count();
  r.n_rejected = s.rejected();
  return r;
}

namespace {

nlohmann::json number_or_null(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

}  // namespace

nlohmann::json EstimateReport::to_json() const {
  nlohmann::json est = nlohmann::json::array();
  nlohmann::json err = nlohmann::json::array();
  for (double v : estimate) est.push_back(number_or_null(v));
  nlohmann::json kurt = nlohmann::json::array();
  for (double v : std_error) err.push_back(number_or_null(v));
  for (double v : kurtosis) kurt.push_back(number_or_null(v));
  return {
      {"I_tr", number_or_null(I_tr)},
      {"estimate", est},
      {"std_error", err},
      {"kurtosis", kurt},
      {"n_samples", n_samples},
      {"n_rejected", n_rejected},
      {"sigma_over_I", number_or_null(sigma_over_I(*this))},
      {"seconds_preprocess", seconds_preprocess},
      {"seconds_sampling", seconds_sampling},
      {"samples_per_second", samples_per_second},
      {"seed", seed},
      {"workers", workers},
  };
}

double sigma_over_I(const EstimateReport& r) {
  if (r.estimate.empty() || r.std_error.empty()) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  const double est = r.estimate.front();
  if (est == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return r.std_error.front() * std::sqrt(static_cast<double>(r.n_samples)) /
         std::abs(est);
}

EstimatorState run_workers(const KernelFactory& factory,
                           const EstimateOptions& opt) {
  if (opt.n_samples < 2) throw Error("need at least 2 samples");
  const unsigned workers = std::max(1u, opt.workers);
  std::vector<EstimatorState> states(workers, EstimatorState(opt.orders, opt.scale));
  std::vector<std::exception_ptr> failures(workers);

  auto work = [&](unsigned w) {
    try {
      const std::uint64_t share =
          opt.n_samples / workers + (w < opt.n_samples % workers ? 1 : 0);
      Kernel kernel = factory();
      RandomStream rng(opt.seed, w);
      std::vector<double> values(opt.orders);
      EstimatorState& st = states[w];
      for (std::uint64_t i = 0; i < share; ++i) {
        if (kernel(rng, values)) {
          bool finite = true;
          for (double v : values) finite = finite && std::isfinite(v);
          if (finite) {
            st.add(values);
            continue;
          }
        }
        st.reject();
      }
    } catch (...) {
      failures[w] = std::current_exception();
    }
  };

  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::thread> threads;
    threads.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) threads.emplace_back(work, w);
    for (auto& t : threads) t.join();
  }
  for (auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }

  EstimatorState total(opt.orders, opt.scale);
  for (const auto& s : states) total.merge(s);

  const std::uint64_t attempted = total.count() + total.rejected();
  if (static_cast<double>(total.rejected()) >
      opt.reject_threshold * static_cast<double>(attempted)) {
    std::ostringstream msg;
    msg << "rejection budget exceeded: " << total.rejected() << " of "
        << attempted << " samples rejected (threshold " << opt.reject_threshold
        << "); the integrand could not be evaluated stably at extreme points";
    throw RejectionBudgetError(msg.str(), total.rejected(), attempted);
  }
  return total;
}

EstimateReport estimate(const KernelFactory& factory, const EstimateOptions& opt) {
  const auto start = std::chrono::steady_clock::now();
  const EstimatorState total = run_workers(factory, opt);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  EstimateReport r = EstimateReport::from_state(total);
  r.seconds_sampling = secs;
  r.samples_per_second =
      secs > 0.0 ? static_cast<double>(total.count() + total.rejected()) / secs : 0.0;
  r.seed = opt.seed;
  r.workers = std::max(1u, opt.workers);
  return r;
}

}  // namespace troquad
