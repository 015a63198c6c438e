#pragma once

#include <stdexcept>
#include <string>

namespace bilab {

/// Parameters outside the hypothesis of a lemma, proposition or operation.
/// The CLI maps this to exit code 3.
class HypothesisError : public std::domain_error {
public:
  explicit HypothesisError(const std::string& what) : std::domain_error(what) {}
};

/// Non-finite values, eigensolver failure, diverging iteration. Exit code 4.
class NumericalError : public std::runtime_error {
public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace bilab
