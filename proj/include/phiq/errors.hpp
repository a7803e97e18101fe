#ifndef PHIQ_ERRORS_HPP
#define PHIQ_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace phiq {

struct ArgumentError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Input data is unusable (NaN values, nonpositive prices, unparsable rows).
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

/// A process specification violates a structural requirement.
struct SpecError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A lemma's hypothesis does not hold for the given input (distinct from the
/// lemma's conclusion failing).
struct HypothesisError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct StatisticsError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct FitError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct BudgetError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace phiq

#endif  // PHIQ_ERRORS_HPP
