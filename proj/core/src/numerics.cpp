#include "gprobe/numerics.hpp"

#include <cmath>
#include <string>

#include "gprobe/errors.hpp"

namespace gprobe {

double signed_norm(const Vector& v) {
  double pos = 0.0;
  double neg = 0.0;
  for (Index i = 0; i < v.size(); ++i) {
    const double x = v[i];
    if (x > 0.0) {
      pos += x * x;
    } else {
      neg += x * x;
    }
  }
  return std::sqrt(pos) - std::sqrt(neg);
}

Vector signed_norm_grad(const Vector& v) {
  double pos = 0.0;
  double neg = 0.0;
  for (Index i = 0; i < v.size(); ++i) {
    const double x = v[i];
    (x > 0.0 ? pos : neg) += x * x;
  }
  pos = std::sqrt(pos);
  neg = std::sqrt(neg);

  // d/dv_i ||v+|| = v_i / ||v+|| for v_i > 0; d/dv_i (-||v-||) = -v_i / ||v-||
  // for v_i < 0. Both are positive, i.e. |v_i| / ||part||.
  Vector g = Vector::Zero(v.size());
  for (Index i = 0; i < v.size(); ++i) {
    const double x = v[i];
    if (x > 0.0) {
      g[i] = x / pos;
    } else if (x < 0.0) {
      g[i] = -x / neg;
    }
  }
  return g;
}

namespace {

void require_square(const Matrix& m, const char* what) {
  if (m.rows() != m.cols()) {
    throw DimensionError(std::string(what) + ": expected a square matrix, got " +
                         std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
  }
}

}  // namespace

namespace {

// M^T M - I, filled from one triangle.
Matrix gram_minus_identity(const Matrix& m) {
  const Index d = m.cols();
  Matrix a = Matrix::Zero(d, d);
  a.selfadjointView<Eigen::Lower>().rankUpdate(m.transpose());
  a.triangularView<Eigen::StrictlyUpper>() = a.transpose();
  a.diagonal().array() -= 1.0;
  return a;
}

}  // namespace

double orthogonality_defect(const Matrix& m) {
  require_square(m, "orthogonality_defect");
  return gram_minus_identity(m).norm();
}

Matrix orthogonality_defect_grad(const Matrix& m) {
  Matrix g;
  orthogonality_defect_and_grad(m, g);
  return g;
}

double orthogonality_defect_and_grad(const Matrix& m, Matrix& grad) {
  require_square(m, "orthogonality_defect_grad");
  const Matrix a = gram_minus_identity(m);
  const double f = a.norm();
  if (f == 0.0) {
    grad = Matrix::Zero(m.rows(), m.cols());
    return 0.0;
  }
  // d||A||_F = <A, dM^T M + M^T dM> / ||A||_F and A is symmetric.
  grad.noalias() = (2.0 / f) * (m * a);
  return f;
}

Matrix nearest_orthogonal(const Matrix& m) {
  require_square(m, "nearest_orthogonal");
  if (!all_finite(m)) {
    throw NumericalError("nearest_orthogonal: non-finite input");
  }
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vector& s = svd.singularValues();
  const double tol = static_cast<double>(m.rows()) * std::numeric_limits<double>::epsilon() *
                     (s.size() > 0 ? s[0] : 0.0);
  if (s.size() == 0 || s[s.size() - 1] <= tol) {
    throw NumericalError("nearest_orthogonal: matrix is rank deficient");
  }
  return svd.matrixU() * svd.matrixV().transpose();
}

Matrix gaussian_matrix(Index rows, Index cols, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix g(rows, cols);
  // Column-major fill order is part of the seeded contract.
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) {
      g(i, j) = normal(rng);
    }
  }
  return g;
}

Matrix random_orthogonal(Index d, Rng& rng) {
  const Matrix g = gaussian_matrix(d, d, rng);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(d, d);
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Index j = 0; j < d; ++j) {
    if (r(j, j) < 0.0) {
      q.col(j) = -q.col(j);
    }
  }
  return q;
}

bool all_finite(const Vector& v) { return v.allFinite(); }
bool all_finite(const Matrix& m) { return m.allFinite(); }

}  // namespace gprobe
