#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <string>

namespace smeq {

// Weight matrices and state vectors are small (d <= 8 across all models);
// fixed-capacity Eigen types keep the tree traversal off the heap.
constexpr int kMaxDim = 8;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;
using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDim, 1>;
using Complex = std::complex<double>;

/// Violation of a documented precondition or a numerical failure that the
/// caller can act on. The CLI maps these to exit code 1.
class DomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw DomainError(msg);
}

}  // namespace smeq
