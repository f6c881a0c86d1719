#pragma once

#include <stdexcept>
#include <string>

namespace ipwcdf {

struct SchemaError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EmptyDataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DegenerateDesignError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Density at the quantile is too small (or the sample has zero spread) for a
// plug-in quantile variance.
struct DegenerateDensityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EstimationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace ipwcdf
