#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <vector>

namespace phisum {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Error codes shared by the C++ core and the C API.
enum class ErrorCode {
  ok = 0,
  invalid_argument = 1,
  dimension_mismatch = 2,
  not_polyhedral = 3,
  infeasible = 4,
  uncertified = 5,
  parse_error = 6,
  internal = 7,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

namespace tol {
inline constexpr double ball = 1e-9;       // dual-ball membership
inline constexpr double eq = 1e-10;        // VmElement coordinate equality
inline constexpr double gap = 1e-6;        // certified projective norms
inline constexpr double duality = 1e-6;    // LB <= UB slack
inline constexpr double measure = 1e-10;   // probability weights sum
inline constexpr double null_rel = 1e-8;   // seminorm null-space threshold
}  // namespace tol

inline void require_dim(std::size_t got, std::size_t want, const char* what) {
  if (got != want) {
    throw Error(ErrorCode::dimension_mismatch,
                std::string(what) + ": dimension mismatch (got " +
                    std::to_string(got) + ", expected " +
                    std::to_string(want) + ")");
  }
}

inline Vector to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

inline std::vector<double> to_std(const Vector& v) {
  return {v.data(), v.data() + v.size()};
}

}  // namespace phisum
