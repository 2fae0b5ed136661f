#ifndef RELPROBE_ERROR_H_
#define RELPROBE_ERROR_H_

#include <stdexcept>
#include <string>

namespace relprobe {

// Malformed or inconsistent input data (files, datasets, tables).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A measure is mathematically undefined for its arguments, e.g. the cosine
// of a zero vector or a singular covariance.
class UndefinedMeasureError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Caller broke a precondition (length mismatch, empty set, bad config).
class InvalidArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace relprobe

#endif  // RELPROBE_ERROR_H_
