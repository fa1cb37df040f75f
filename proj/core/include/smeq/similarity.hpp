#pragma once

#include <complex>
#include <optional>
#include <vector>

#include "smeq/common.hpp"

namespace smeq {

/// Scale multiple of an orthogonal matrix, stored as the pair
/// (scale, rotation) rather than as a dense product. The scale of a product
/// is then an exact product of scales and -log(scale) an exact running sum;
/// only the rotation factor can drift and is periodically re-projected.
class Similarity {
 public:
  Similarity() = default;

  /// Validates that `rotation` is orthogonal to 1e-12 per entry.
  Similarity(double scale, Mat rotation);

  static Similarity identity(int dim);

  int dim() const { return static_cast<int>(rotation_.rows()); }
  double scale() const { return scale_; }
  double log_scale() const { return std::log(scale_); }
  const Mat& rotation() const { return rotation_; }
  Mat dense() const { return scale_ * rotation_; }

  Vec apply(const Vec& x) const { return scale_ * (rotation_ * x); }
  Similarity inverse() const;

  /// Largest |(R R^T - I)_ij| of the rotation factor.
  double orthogonality_defect() const;

  friend Similarity compose(const Similarity& a, const Similarity& b);

 private:
  double scale_ = 1.0;
  Mat rotation_;
  int compositions_ = 0;  // since the last re-orthogonalization

  void reorthogonalize();
};

/// a then b as left-multiplication: compose(a, b) x = a (b x).
Similarity compose(const Similarity& a, const Similarity& b);

/// Multiplication by z on C as a similarity acting on R^2.
Similarity from_complex(Complex z);

/// Inverse of from_complex; requires dim 2 and det(rotation) = +1.
Complex to_complex(const Similarity& a);

/// Scaling-and-squaring matrix exponential, Pade order 13.
Mat matrix_exp(const Mat& a);

enum class GroupKind { continuous, discrete, trivial };

/// The closed similarity group generated by the weights, in the split form
/// A_U x C_U: a one-parameter scale part (continuous {t^Q} or discrete {A^n})
/// and a compact part given by orthogonal generators.
class GroupDescriptor {
 public:
  static GroupDescriptor continuous_group(Mat Q,
                                          std::vector<Mat> compact_generators = {},
                                          bool isotropic = false);
  static GroupDescriptor discrete_group(Similarity A,
                                        std::vector<Mat> compact_generators = {});
  static GroupDescriptor trivial_group(int dim,
                                       std::vector<Mat> compact_generators = {});
  /// Spiral group {e^{lambda t}} on R^2: Q is multiplication by lambda/Re(lambda).
  static GroupDescriptor from_complex_exponent(Complex lambda,
                                               std::vector<Mat> compact_generators = {});

  GroupKind kind() const { return kind_; }
  int dim() const { return dim_; }
  const Mat& Q() const;                  // continuous only
  Mat Q_skew() const;                    // Q - I
  const Similarity& generator() const;   // discrete only
  const std::vector<Mat>& compact_generators() const { return compact_generators_; }
  bool isotropic() const { return isotropic_; }

  /// Rotation frequencies of the skew part (eigenvalues i*omega of Q - I),
  /// with the orthonormal complex eigenbasis; cached on first use.
  struct SkewSpectrum {
    std::vector<double> omega;                       // one per eigenvector
    Eigen::MatrixXcd basis;                          // columns = eigenvectors
  };
  const SkewSpectrum& skew_spectrum() const;

 private:
  GroupDescriptor() = default;
  GroupKind kind_ = GroupKind::trivial;
  int dim_ = 0;
  Mat Q_;
  Similarity A_;
  std::vector<Mat> compact_generators_;
  bool isotropic_ = false;
  mutable std::optional<SkewSpectrum> spectrum_;
};

/// t^Q = exp((ln t) Q) as a Similarity with scale exactly t. Requires the
/// group's Q normalized (Q - I skew-symmetric), which the factories enforce.
Similarity power_Q(const GroupDescriptor& g, double t);

struct PolarCoords {
  Similarity a;  // element of A_U
  Vec s;         // representative: |s| = 1 (continuous), r <= |s| < 1 (discrete)
};

/// Unique factorization x = a s over the group's scale part.
PolarCoords polar_coords(const Vec& x, const GroupDescriptor& g);

struct SymmetricBasis {
  int dim = 0;
  std::vector<Mat> basis;  // orthonormal under the Frobenius inner product
};

/// Basis of {S symmetric : o S o^T = S for every generator o}, computed by a
/// null-space solve over the d(d+1)/2-dimensional symmetric coordinate space.
SymmetricBasis invariant_symmetric_space(const std::vector<Mat>& generators, int dim);

/// Enumerate the finite group generated by orthogonal matrices, up to `cap`
/// elements; empty result if the closure does not stay under the cap.
std::vector<Mat> enumerate_compact_group(const std::vector<Mat>& generators, int dim,
                                         std::size_t cap = 10000);

}  // namespace smeq
