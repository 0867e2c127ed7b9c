#pragma once

#include <stdexcept>
#include <string>

namespace lingd {

// Base class for every recoverable failure this library raises.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Matrix is singular (or close enough that the result would be meaningless).
struct SingularMatrix : Error { using Error::Error; };

// An iterative solver hit its iteration budget without meeting tolerance.
struct NoConvergence : Error { using Error::Error; };

// Input carries no usable signal (e.g. a zero-variance block).
struct DegenerateInput : Error { using Error::Error; };

// The target's column in the demixing matrix has no entries above threshold.
struct EmptySupport : Error { using Error::Error; };

// No row permutation yields full-rank diagonal blocks; upstream grouping failed.
struct NoAdmissible : Error { using Error::Error; };

// An algorithmic assertion failed: the data violates the method's assumptions.
struct AssertionViolated : Error { using Error::Error; };

// Every candidate model was rejected by the stability filter.
struct AllFiltered : Error { using Error::Error; };

// Accept-reject sampling exhausted its attempt budget.
struct RejectionLimit : Error { using Error::Error; };

// Input exceeds the size guard of an enumeration-based routine.
struct TooLarge : Error { using Error::Error; };

// Simple-cycle enumeration exceeded its cycle-count cap.
struct CycleEnumLimit : Error { using Error::Error; };

// An exact enumeration would exceed its combinatorial budget.
struct CombinatorialLimit : Error { using Error::Error; };

}  // namespace lingd
