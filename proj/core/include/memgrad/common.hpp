#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>

namespace memgrad {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// One engine type everywhere so that seeds mean the same thing across modules.
using Rng = std::mt19937_64;

// Derives an independent stream from a base seed and a stream id.
Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0);

constexpr double kMicro = 1e-6;
inline double to_microsiemens(double siemens) { return siemens / kMicro; }
inline double from_microsiemens(double us) { return us * kMicro; }

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid numeric parameters or configuration values.
class ParameterError : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// Malformed textual input; carries the 1-based line number when known.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Malformed binary input (IDX).
class FormatError : public Error {
 public:
  using Error::Error;
};

// The device has no recorded conductance left; the caller must reinitialize.
class NeedsReinit : public Error {
 public:
  using Error::Error;
};

class EnduranceExceeded : public Error {
 public:
  using Error::Error;
};

// Non-fatal diagnostics. The default sink writes to stderr.
using WarningSink = std::function<void(std::string_view)>;
void set_warning_sink(WarningSink sink);
void warn(std::string_view message);

}  // namespace memgrad
