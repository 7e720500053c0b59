#pragma once

#include <stdexcept>
#include <string>

namespace mtube {

/// Argument violates a stated admissibility bound (carries the bound in the message).
class ConstraintError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Evaluation requested at a point where the quantity is -infinity.
class SingularityError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A stencil, shell or sublevel set leaves the admissible domain.
class GeometryError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Certification or search procedure failed to produce a valid object.
class ConstructionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace mtube
