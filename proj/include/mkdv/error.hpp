#pragma once

#include <stdexcept>
#include <string>

namespace mkdv {

/// Root of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on user-supplied data was violated.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Two objects of a configuration share a velocity.
class DuplicateVelocity : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

/// A profile does not decay enough at the edge of the periodic box.
class TailsTooLarge : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

/// The configuration lies outside the v2 > 0 regime and no override was given.
class HypothesisViolated : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

/// No m1 satisfies both the interval and the quadratic constraint.
class EmptyAdmissibleInterval : public Error {
 public:
  using Error::Error;
};

class BlowUp : public Error {
 public:
  BlowUp(const std::string& what, double time) : Error(what), time_(time) {}
  double time() const noexcept { return time_; }

 private:
  double time_;
};

class NoConvergence : public Error {
 public:
  NoConvergence(const std::string& what, double time) : Error(what), time_(time) {}
  double time() const noexcept { return time_; }

 private:
  double time_;
};

class SingularJacobian : public Error {
 public:
  using Error::Error;
};

class EigensolveFailure : public Error {
 public:
  using Error::Error;
};

class NonPositiveDistance : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

}  // namespace mkdv
