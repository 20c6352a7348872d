#pragma once

#include <stdexcept>
#include <string>

namespace adpp {

// A kernel entry exceeded the declared kappa^2 bound.
struct KappaBoundViolated : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A factorization or eigensolve failed beyond what PSD clipping can repair.
struct NumericalFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A dictionary with zero elements where at least one is required.
struct EmptyDictionary : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A rejection/restart budget ran out. `details` carries a serialized trace
// when one is available.
struct BudgetExhausted : std::runtime_error {
  explicit BudgetExhausted(const std::string& msg, std::string details_json = "")
      : std::runtime_error(msg), details(std::move(details_json)) {}
  std::string details;
};

// Requested subset size cannot be produced (k exceeds the kernel rank, or
// the size-rejection patience ran out without seeing a size-k sample).
struct InfeasibleSize : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Invalid or overflowing configuration (e.g. Poisson intensity too large).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Operation outside its supported range (e.g. brute-force enumeration cap).
struct Unsupported : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Dataset could not be read or parsed.
struct IngestError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace adpp
