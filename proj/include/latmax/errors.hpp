#pragma once

#include <stdexcept>
#include <string>

namespace latmax {

// Base class for all domain errors thrown by this library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Basis/region dimensions disagree.
struct DimensionMismatch : Error {
  using Error::Error;
};

// Vectors do not span (or a determinant cannot be certified nonzero).
struct DegenerateBasis : Error {
  using Error::Error;
};

// extend_basis: t*v is not in the current lattice.
struct NotInQuotient : Error {
  using Error::Error;
};

// extend_basis: v is already a lattice member (quotient order 1).
struct AlreadyMember : Error {
  using Error::Error;
};

// Exhaustive search region exceeds the enumeration guardrail.
struct RegionTooLarge : Error {
  using Error::Error;
};

// Baby stock would exceed the configured memory cap T.
struct MemoryCapExceeded : Error {
  using Error::Error;
};

// Memory-limited tuning requested although the cap exceeds the unbounded optimum.
struct CapNotBinding : Error {
  using Error::Error;
};

// A certified comparison/decision cannot be made at the current precision.
struct PrecisionExhausted : Error {
  using Error::Error;
};

// certify: the input S is not a positive multiple of the regulator.
struct NotAMultiple : Error {
  using Error::Error;
};

// Ground-truth oracle invoked beyond its intended scale.
struct OracleTooLarge : Error {
  using Error::Error;
};

// Malformed input text (basis files, CLI scalar arguments).
struct ParseError : Error {
  using Error::Error;
};

}  // namespace latmax
