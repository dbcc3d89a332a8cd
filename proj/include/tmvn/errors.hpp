#pragma once

#include <stdexcept>
#include <string>

namespace tmvn {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NonFinite : public Error {
 public:
  using Error::Error;
};

class SingularSigma : public Error {
 public:
  using Error::Error;
};

class ThetaNotPd : public Error {
 public:
  using Error::Error;
};

class DivergentParameter : public Error {
 public:
  using Error::Error;
};

class IllConditioned : public Error {
 public:
  using Error::Error;
};

class SingularSampleCovariance : public Error {
 public:
  using Error::Error;
};

class AcceptanceTooLow : public Error {
 public:
  using Error::Error;
};

/// Malformed user input (dimensions, CSV cells, flag values).
class InputError : public Error {
 public:
  using Error::Error;
};

}  // namespace tmvn
