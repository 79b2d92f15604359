#pragma once

#include <stdexcept>
#include <string>

namespace edgeplace {

/// Root of every error raised by the placement engine.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed document: wrong type, missing or unexpected field.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// A document names an entity that does not exist.
class ReferenceError : public Error {
 public:
  using Error::Error;
};

/// Well-formed input that violates a domain invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Query for an id the graph or application does not know.
class LookupError : public Error {
 public:
  using Error::Error;
};

/// Query on an entity of the wrong kind (e.g. a BS where a site is needed).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Mutation whose precondition does not hold for the current value.
class StateError : public Error {
 public:
  using Error::Error;
};

/// Caller broke an operation contract (index range, episode finished, ...).
class ContractError : public Error {
 public:
  using Error::Error;
};

/// Counts that must add up to a fixed total do not.
class ArityError : public Error {
 public:
  using Error::Error;
};

/// No placement satisfies the hard constraints.
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

/// Training produced a non-finite loss or gradient.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace edgeplace
