#pragma once

#include <stdexcept>
#include <string>

namespace ergoloop {

/// Base class for every failure raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An operation was called outside its stated domain.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// A construction ran out of its iteration or search budget.
class BudgetError : public Error {
 public:
  using Error::Error;
};

/// A proved inequality failed when rechecked; signals a bug upstream.
class CertificateError : public Error {
 public:
  using Error::Error;
};

}  // namespace ergoloop
