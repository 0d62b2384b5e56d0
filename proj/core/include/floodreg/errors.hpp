#pragma once

#include <stdexcept>
#include <string>

namespace floodreg {

// Base class for all library-level failures. Precondition violations use
// std::invalid_argument instead.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class NonConvergence : public Error {
 public:
  explicit NonConvergence(const std::string& msg) : Error(msg) {}
};

class DegenerateSample : public Error {
 public:
  explicit DegenerateSample(const std::string& msg) : Error(msg) {}
};

class RankDeficientCovariates : public Error {
 public:
  explicit RankDeficientCovariates(const std::string& msg) : Error(msg) {}
};

class SchemaMismatch : public Error {
 public:
  explicit SchemaMismatch(const std::string& msg) : Error(msg) {}
};

class ZeroVariance : public Error {
 public:
  explicit ZeroVariance(const std::string& msg) : Error(msg) {}
};

class InsufficientPool : public Error {
 public:
  explicit InsufficientPool(const std::string& msg) : Error(msg) {}
};

class NoConvergedCandidate : public Error {
 public:
  explicit NoConvergedCandidate(const std::string& msg) : Error(msg) {}
};

class ZeroObservation : public Error {
 public:
  explicit ZeroObservation(const std::string& msg) : Error(msg) {}
};

class EmptyRegion : public Error {
 public:
  explicit EmptyRegion(const std::string& msg) : Error(msg) {}
};

class SingularCovariance : public Error {
 public:
  explicit SingularCovariance(const std::string& msg) : Error(msg) {}
};

class NonpositiveArea : public Error {
 public:
  explicit NonpositiveArea(const std::string& msg) : Error(msg) {}
};

class EstimatorFailure : public Error {
 public:
  explicit EstimatorFailure(const std::string& msg) : Error(msg) {}
};

// Row/column-diagnosed failure while ingesting a delimited text file.
class ParseError : public Error {
 public:
  ParseError(std::size_t row, std::string column, std::string reason)
      : Error("row " + std::to_string(row) + ", column '" + column + "': " + reason),
        row_(row),
        column_(std::move(column)),
        reason_(std::move(reason)) {}

  std::size_t row() const { return row_; }
  const std::string& column() const { return column_; }
  const std::string& reason() const { return reason_; }

 private:
  std::size_t row_;
  std::string column_;
  std::string reason_;
};

class SchemaError : public Error {
 public:
  explicit SchemaError(const std::string& msg) : Error(msg) {}
};

}  // namespace floodreg
