#ifndef DGOF_ERRORS_HPP_
#define DGOF_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace dgof {

// Bad inputs: out-of-range arguments, malformed specs, inconsistent data.
struct ValidationError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Numerical failures: degenerate laws, invalid intensity paths,
// separation, optimizer breakdown.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace dgof

#endif  // DGOF_ERRORS_HPP_
