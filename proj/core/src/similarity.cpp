#include "smeq/similarity.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>

namespace smeq {

namespace {

constexpr double kOrthoTol = 1e-12;
constexpr double kDriftTol = 1e-10;
constexpr int kReorthEvery = 64;

double ortho_defect(const Mat& r) {
  Mat g = r * r.transpose();
  g.diagonal().array() -= 1.0;
  return g.cwiseAbs().maxCoeff();
}

}  // namespace

Similarity::Similarity(double scale, Mat rotation)
    : scale_(scale), rotation_(std::move(rotation)) {
  require(scale_ > 0.0, "similarity: scale must be positive");
  require(rotation_.rows() == rotation_.cols(), "similarity: rotation must be square");
  require(ortho_defect(rotation_) < kOrthoTol,
          "similarity: rotation factor is not orthogonal within 1e-12");
}

Similarity Similarity::identity(int dim) {
  Similarity s;
  s.scale_ = 1.0;
  s.rotation_ = Mat::Identity(dim, dim);
  return s;
}

Similarity Similarity::inverse() const {
  Similarity s;
  s.scale_ = 1.0 / scale_;
  s.rotation_ = rotation_.transpose();
  s.compositions_ = compositions_;
  return s;
}

double Similarity::orthogonality_defect() const { return ortho_defect(rotation_); }

void Similarity::reorthogonalize() {
  // polar projection: R <- U V^T from the SVD of R
  Eigen::JacobiSVD<Mat> svd(rotation_, Eigen::ComputeFullU | Eigen::ComputeFullV);
  rotation_ = svd.matrixU() * svd.matrixV().transpose();
  compositions_ = 0;
}

Similarity compose(const Similarity& a, const Similarity& b) {
  require(a.dim() == b.dim(), "compose: dimension mismatch");
  Similarity out;
  out.scale_ = a.scale_ * b.scale_;
  out.rotation_.noalias() = a.rotation_ * b.rotation_;
  out.compositions_ = a.compositions_ + b.compositions_ + 1;
  if (out.compositions_ >= kReorthEvery || ortho_defect(out.rotation_) > kDriftTol) {
    out.reorthogonalize();
  }
  return out;
}

Similarity from_complex(Complex z) {
  require(z != Complex(0.0, 0.0), "from_complex: z must be nonzero");
  const double r = std::abs(z);
  const double c = z.real() / r, s = z.imag() / r;
  Mat rot(2, 2);
  rot << c, -s, s, c;
  return Similarity(r, std::move(rot));
}

Complex to_complex(const Similarity& a) {
  require(a.dim() == 2, "to_complex: requires dim 2");
  require(a.rotation().determinant() > 0.0,
          "to_complex: reflection (det = -1) has no complex representation");
  return a.scale() * Complex(a.rotation()(0, 0), a.rotation()(1, 0));
}

Mat matrix_exp(const Mat& a) {
  // Higham's scaling-and-squaring with the order-13 Pade approximant.
  static const double kPade13[] = {
      64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
      1187353796428800.0,  129060195264000.0,   10559470521600.0,
      670442572800.0,      33522128640.0,       1323241920.0,
      40840800.0,          960960.0,            16380.0,
      182.0,               1.0};
  const int d = static_cast<int>(a.rows());
  const double nrm = a.cwiseAbs().rowwise().sum().maxCoeff();  // inf-norm
  int squarings = 0;
  Mat x = a;
  const double theta13 = 5.371920351148152;
  if (nrm > theta13) {
    squarings = static_cast<int>(std::ceil(std::log2(nrm / theta13)));
    x /= std::ldexp(1.0, squarings);
  }
  const Mat x2 = x * x;
  const Mat x4 = x2 * x2;
  const Mat x6 = x4 * x2;
  const Mat id = Mat::Identity(d, d);
  Mat u = x * (x6 * (kPade13[13] * x6 + kPade13[11] * x4 + kPade13[9] * x2) +
               kPade13[7] * x6 + kPade13[5] * x4 + kPade13[3] * x2 + kPade13[1] * id);
  Mat v = x6 * (kPade13[12] * x6 + kPade13[10] * x4 + kPade13[8] * x2) +
          kPade13[6] * x6 + kPade13[4] * x4 + kPade13[2] * x2 + kPade13[0] * id;
  Mat num = v + u;
  Mat den = v - u;
  Mat r = den.partialPivLu().solve(num);
  for (int i = 0; i < squarings; ++i) r = r * r;
  return r;
}

// ---------------------------------------------------------------------------

namespace {

void check_compact_generators(const std::vector<Mat>& gens, int dim) {
  for (const auto& o : gens) {
    require(o.rows() == dim && o.cols() == dim, "group: generator dimension mismatch");
    require(ortho_defect(o) < kOrthoTol, "group: compact generator is not orthogonal");
  }
}

void check_Q_normalized(const Mat& Q) {
  Mat skew = Q - Mat::Identity(Q.rows(), Q.cols());
  require((skew + skew.transpose()).cwiseAbs().maxCoeff() < kOrthoTol,
          "group: Q is not normalized (Q - I must be skew-symmetric)");
}

}  // namespace

GroupDescriptor GroupDescriptor::continuous_group(Mat Q, std::vector<Mat> gens,
                                                  bool isotropic) {
  check_Q_normalized(Q);
  GroupDescriptor g;
  g.kind_ = GroupKind::continuous;
  g.dim_ = static_cast<int>(Q.rows());
  check_compact_generators(gens, g.dim_);
  g.Q_ = std::move(Q);
  g.compact_generators_ = std::move(gens);
  g.isotropic_ = isotropic;
  return g;
}

GroupDescriptor GroupDescriptor::discrete_group(Similarity A, std::vector<Mat> gens) {
  require(A.scale() < 1.0, "group: discrete generator must have scale < 1");
  GroupDescriptor g;
  g.kind_ = GroupKind::discrete;
  g.dim_ = A.dim();
  check_compact_generators(gens, g.dim_);
  g.A_ = std::move(A);
  g.compact_generators_ = std::move(gens);
  return g;
}

GroupDescriptor GroupDescriptor::trivial_group(int dim, std::vector<Mat> gens) {
  GroupDescriptor g;
  g.kind_ = GroupKind::trivial;
  g.dim_ = dim;
  check_compact_generators(gens, dim);
  g.compact_generators_ = std::move(gens);
  return g;
}

GroupDescriptor GroupDescriptor::from_complex_exponent(Complex lambda,
                                                       std::vector<Mat> gens) {
  require(lambda.real() > 0.0, "group: Re(lambda) must be positive");
  const double w = lambda.imag() / lambda.real();
  Mat Q(2, 2);
  Q << 1.0, -w, w, 1.0;
  return continuous_group(std::move(Q), std::move(gens));
}

const Mat& GroupDescriptor::Q() const {
  require(kind_ == GroupKind::continuous, "group: Q is defined for continuous groups");
  return Q_;
}

Mat GroupDescriptor::Q_skew() const { return Q() - Mat::Identity(dim_, dim_); }

const Similarity& GroupDescriptor::generator() const {
  require(kind_ == GroupKind::discrete, "group: generator is defined for discrete groups");
  return A_;
}

const GroupDescriptor::SkewSpectrum& GroupDescriptor::skew_spectrum() const {
  if (!spectrum_) {
    Eigen::MatrixXd skew = Q_skew();
    Eigen::ComplexEigenSolver<Eigen::MatrixXd> eig(skew);
    SkewSpectrum sp;
    sp.basis = eig.eigenvectors();
    sp.omega.resize(dim_);
    for (int k = 0; k < dim_; ++k) sp.omega[k] = eig.eigenvalues()[k].imag();
    spectrum_ = std::move(sp);
  }
  return *spectrum_;
}

Similarity power_Q(const GroupDescriptor& g, double t) {
  require(t > 0.0, "power_Q: t must be positive");
  check_Q_normalized(g.Q());
  // exp((ln t) Q) = t * exp((ln t)(Q - I)); the second factor is orthogonal,
  // so the scale is t exactly.
  Mat rot = matrix_exp(Mat(std::log(t) * g.Q_skew()));
  return Similarity(t, std::move(rot));
}

PolarCoords polar_coords(const Vec& x, const GroupDescriptor& g) {
  const double nx = x.norm();
  require(nx > 0.0, "polar_coords: x must be nonzero");
  require(g.kind() != GroupKind::trivial, "polar_coords: trivial scale group");
  PolarCoords pc;
  if (g.kind() == GroupKind::continuous) {
    pc.a = power_Q(g, nx);
    pc.s = pc.a.inverse().apply(x);
    return pc;
  }
  const Similarity& A = g.generator();
  const double r = A.scale();
  // unique n with r <= |A^-n x| = r^-n |x| < 1
  double n_real = std::log(nx) / std::log(r);
  long n = static_cast<long>(std::floor(n_real));
  auto rep_norm = [&](long k) { return std::pow(r, -static_cast<double>(k)) * nx; };
  while (rep_norm(n) >= 1.0) ++n;
  while (rep_norm(n) < r) --n;
  Similarity a = Similarity::identity(g.dim());
  const Similarity step = n > 0 ? A : A.inverse();
  for (long i = 0; i < std::labs(n); ++i) a = compose(a, step);
  pc.a = a;
  pc.s = a.inverse().apply(x);
  return pc;
}

namespace {

// orthonormal basis of symmetric matrices under <A,B> = tr(A^T B)
std::vector<Mat> sym_basis(int d) {
  std::vector<Mat> es;
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  for (int i = 0; i < d; ++i) {
    for (int j = i; j < d; ++j) {
      Mat e = Mat::Zero(d, d);
      if (i == j) {
        e(i, i) = 1.0;
      } else {
        e(i, j) = e(j, i) = inv_sqrt2;
      }
      es.push_back(std::move(e));
    }
  }
  return es;
}

}  // namespace

SymmetricBasis invariant_symmetric_space(const std::vector<Mat>& generators, int dim) {
  for (const auto& o : generators) {
    require(o.rows() == dim && o.cols() == dim && ortho_defect(o) < kOrthoTol,
            "invariant_symmetric_space: generators must be orthogonal");
  }
  const auto es = sym_basis(dim);
  const int m = static_cast<int>(es.size());
  Eigen::MatrixXd constraints(std::max<std::size_t>(1, generators.size()) * m, m);
  constraints.setZero();
  int row0 = 0;
  for (const auto& o : generators) {
    for (int k = 0; k < m; ++k) {
      Mat img = o * es[k] * o.transpose() - es[k];
      for (int l = 0; l < m; ++l) {
        constraints(row0 + l, k) = (es[l].array() * img.array()).sum();
      }
    }
    row0 += m;
  }

  SymmetricBasis out;
  out.dim = dim;
  if (generators.empty()) {
    out.basis = es;
    return out;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(constraints, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double thresh = 1e-10 * std::max(1.0, sv.size() ? sv(0) : 0.0);
  for (int k = 0; k < m; ++k) {
    if (k < sv.size() && sv(k) > thresh) continue;
    Mat s = Mat::Zero(dim, dim);
    for (int l = 0; l < m; ++l) s += svd.matrixV()(l, k) * es[l];
    for (const auto& o : generators) {
      require((o * s * o.transpose() - s).cwiseAbs().maxCoeff() < 1e-10,
              "invariant_symmetric_space: candidate basis element failed verification");
    }
    out.basis.push_back(std::move(s));
  }
  return out;
}

std::vector<Mat> enumerate_compact_group(const std::vector<Mat>& generators, int dim,
                                         std::size_t cap) {
  std::vector<Mat> group;
  group.push_back(Mat::Identity(dim, dim));
  auto contains = [&](const Mat& m) {
    for (const auto& g : group) {
      if ((g - m).cwiseAbs().maxCoeff() < 1e-9) return true;
    }
    return false;
  };
  std::size_t frontier = 0;
  while (frontier < group.size()) {
    const Mat cur = group[frontier++];
    for (const auto& o : generators) {
      Mat next = o * cur;
      if (!contains(next)) {
        if (group.size() >= cap) return {};
        group.push_back(std::move(next));
      }
    }
  }
  return group;
}

}  // namespace smeq
