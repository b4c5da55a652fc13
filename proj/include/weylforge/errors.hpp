#pragma once

#include <stdexcept>
#include <string>

namespace weylforge {

// Base class for all toolkit errors; the CLI maps subclasses to exit codes.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Input matrix is numerically singular (|det| at or below the singularity gate).
struct SingularInput : Error {
  using Error::Error;
};

// Malformed or inconsistent input data (shape mismatch, non-finite entries, bad schema).
struct InvalidSpec : Error {
  using Error::Error;
};

// The integer-relation search could not decide between a discrete and a dense
// subgroup at the configured denominator bound.
struct AmbiguousCommensurability : Error {
  using Error::Error;
};

// Argument outside its admissible interval.
struct OutOfRange : Error {
  using Error::Error;
};

// Singular values cluster at the rank threshold; the rank decision is ambiguous.
struct RankTolerance : Error {
  using Error::Error;
};

// Metric (or density) fails positive definiteness.
struct DegenerateMetric : Error {
  using Error::Error;
};

// The connection is not a Weyl connection for the given metric: the covariant
// derivative of g is not proportional to g within tolerance.
struct NotWeyl : Error {
  using Error::Error;
};

// A closed 1-form was required but d(theta) exceeds the closedness tolerance.
struct NotClosed : Error {
  using Error::Error;
};

// Two path orderings of the potential integral disagree beyond tolerance.
struct PathDependence : Error {
  using Error::Error;
};

}  // namespace weylforge
