#pragma once

#include <stdexcept>
#include <string>

namespace spkret {

/// Base class for all spkret errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input audio has the wrong sample rate, bit depth or channel count.
class UnsupportedFormat : public Error {
 public:
  using Error::Error;
};

/// A container or binary file failed structural validation.
class CorruptFile : public Error {
 public:
  using Error::Error;
};

/// Signal shorter than one analysis window.
class TooShort : public Error {
 public:
  using Error::Error;
};

/// Not enough frames for the requested computation.
class TooFewFrames : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class EmptyCorpus : public Error {
 public:
  using Error::Error;
};

class EmptySegment : public Error {
 public:
  using Error::Error;
};

/// A vector-space measure was asked to normalize an all-zero vector.
class ZeroVector : public Error {
 public:
  using Error::Error;
};

/// Covariance factorization failed with regularization disabled.
class SingularCovariance : public Error {
 public:
  using Error::Error;
};

class DuplicateSegmentId : public Error {
 public:
  using Error::Error;
};

class UnknownSegmentId : public Error {
 public:
  using Error::Error;
};

class EmptyIndex : public Error {
 public:
  using Error::Error;
};

/// Evaluation requires a speaker label on every record.
class MissingLabels : public Error {
 public:
  using Error::Error;
};

class InvalidSpec : public Error {
 public:
  using Error::Error;
};

class UsageError : public Error {
 public:
  using Error::Error;
};

/// Filesystem read/write failure.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace spkret
