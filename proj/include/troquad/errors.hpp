#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace troquad {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file or invalid field value.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Convergence requirement R1 or R2 fails for an Euler-Mellin input.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, std::vector<double> witness = {})
      : Error(what), witness_(std::move(witness)) {}
  const std::vector<double>& witness() const { return witness_; }

 private:
  std::vector<double> witness_;
};

/// Some non-empty proper subset has r <= 0; carries every offending subset.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, std::vector<std::uint64_t> subsets)
      : Error(what), subsets_(std::move(subsets)) {}
  const std::vector<std::uint64_t>& subsets() const { return subsets_; }

 private:
  std::vector<std::uint64_t> subsets_;
};

/// Subset table would not fit under the configured memory cap.
class MemoryCapError : public Error {
 public:
  MemoryCapError(const std::string& what, std::uint64_t required)
      : Error(what), required_(required) {}
  std::uint64_t required_bytes() const { return required_; }

 private:
  std::uint64_t required_;
};

class RejectionBudgetError : public Error {
 public:
  RejectionBudgetError(const std::string& what, std::uint64_t rejected,
                       std::uint64_t attempted)
      : Error(what), rejected_(rejected), attempted_(attempted) {}
  std::uint64_t rejected() const { return rejected_; }
  std::uint64_t attempted() const { return attempted_; }

 private:
  std::uint64_t rejected_;
  std::uint64_t attempted_;
};

}  // namespace troquad
