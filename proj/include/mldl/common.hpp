#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace mldl {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Failure while talking to the filesystem or decoding an on-disk format.
/// Kept distinct from std::invalid_argument so the CLI can map exit codes.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

/// Training produced a non-finite loss.
class DivergenceError : public std::runtime_error {
 public:
  explicit DivergenceError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace mldl
