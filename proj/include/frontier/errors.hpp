#pragma once

#include <stdexcept>
#include <string>

namespace frontier {

// Base of everything this library throws. The two direct children split
// errors into the classes the CLI maps to exit codes: bad data or
// configuration (exit 1) versus numerical failure (exit 3).
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ValidationError : Error {
  using Error::Error;
};

struct NumericalError : Error {
  using Error::Error;
};

// dataset
struct FileNotFound : ValidationError { using ValidationError::ValidationError; };
struct SchemaMismatch : ValidationError { using ValidationError::ValidationError; };
struct NonNumericCell : ValidationError { using ValidationError::ValidationError; };
struct NonPositiveInputOutput : ValidationError { using ValidationError::ValidationError; };
struct MissingInputOutput : ValidationError { using ValidationError::ValidationError; };
struct DuplicateDmuName : ValidationError { using ValidationError::ValidationError; };
struct EmptyDataset : ValidationError { using ValidationError::ValidationError; };
struct NoGroupColumn : ValidationError { using ValidationError::ValidationError; };
struct LengthMismatch : ValidationError { using ValidationError::ValidationError; };

// lp
struct DimensionMismatch : ValidationError { using ValidationError::ValidationError; };
struct NumericalBreakdown : NumericalError { using NumericalError::NumericalError; };

// dea
struct InfeasibleModel : NumericalError { using NumericalError::NumericalError; };
struct DatasetMismatch : ValidationError { using ValidationError::ValidationError; };

// tobit
struct AllCensored : ValidationError { using ValidationError::ValidationError; };
struct NonPositiveSigma : ValidationError { using ValidationError::ValidationError; };
struct TooFewObservations : ValidationError { using ValidationError::ValidationError; };
struct NotConverged : NumericalError { using NumericalError::NumericalError; };

}  // namespace frontier
