#pragma once

#include <stdexcept>
#include <string>

namespace rnc {

// Input that violates a documented precondition. Maps to CLI exit code 1.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Numerical failure: factorization, eigensolver, Krylov stagnation. Exit code 2.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class CoercivityError : public SolverError {
 public:
  using SolverError::SolverError;
};

}  // namespace rnc
