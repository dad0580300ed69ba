#pragma once

#include <stdexcept>
#include <string>

namespace denom {

// Base for every error the library raises deliberately.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed or unreadable input file (lexicon CSV, index, model file, ...).
struct FormatError : Error {
  using Error::Error;
};

// relative_frequency with a positive count over a zero year total.
struct UndefinedDenominatorError : Error {
  using Error::Error;
};

// Constant columns, single-class targets, too few rows for the requested fit.
struct DegenerateDataError : Error {
  using Error::Error;
};

// Normal-equations matrix singular beyond tolerance.
struct RankDeficientError : Error {
  using Error::Error;
};

// Synthetic plant whose sampled lags cannot fit the interval.
struct InfeasibleSpecError : Error {
  using Error::Error;
};

}  // namespace denom
