#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fz {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
  public:
    using Error::Error;
};

/// The input values cannot be compressed as given (non-finite, out of domain, out of range).
class InvalidInputData : public Error {
  public:
    using Error::Error;
};

/// A NaN or Inf value was found in an input field.
class NonFiniteInput : public InvalidInputData {
  public:
    explicit NonFiniteInput(std::size_t index)
        : InvalidInputData("non-finite input value at index " + std::to_string(index)), index_(index) {}

    std::size_t index() const noexcept { return index_; }

  private:
    std::size_t index_;
};

/// |d / (2 eb)| is too large for exact integer prediction, or float precision at |d| is
/// coarser than the bound.
class QuantizationRangeError : public InvalidInputData {
  public:
    explicit QuantizationRangeError(std::size_t index)
        : InvalidInputData("value at index " + std::to_string(index)
                + " cannot be quantized within the error bound (|q| >= 2^28 or float precision too coarse)"),
          index_(index) {}

    std::size_t index() const noexcept { return index_; }

  private:
    std::size_t index_;
};

/// A Lorenzo delta had to be saturated while strict mode was on.
class QuantizationOverflow : public Error {
  public:
    explicit QuantizationOverflow(std::size_t index)
        : Error("quantization code overflow at index " + std::to_string(index) + " (strict mode)"),
          index_(index) {}

    std::size_t index() const noexcept { return index_; }

  private:
    std::size_t index_;
};

class CorruptStream : public Error {
  public:
    explicit CorruptStream(const std::string &what) : Error("corrupt stream: " + what) {}
};

class IoError : public Error {
  public:
    using Error::Error;
};

} // namespace fz
