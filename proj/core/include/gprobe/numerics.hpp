#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Dense>

namespace gprobe {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;
using Rng = std::mt19937_64;

/// Signed dual norm: ||max(0, v)||_2 - ||min(0, v)||_2.
///
/// Coincides with the Euclidean norm on the nonnegative orthant and is an odd
/// function of v.
double signed_norm(const Vector& v);

/// Gradient of signed_norm. A part whose norm is zero contributes nothing, so
/// coordinates equal to zero get a zero subgradient.
Vector signed_norm_grad(const Vector& v);

/// ||M^T M - I||_F. Throws DimensionError for non-square input.
double orthogonality_defect(const Matrix& m);

/// Gradient of orthogonality_defect with respect to M (zero at orthogonal M).
Matrix orthogonality_defect_grad(const Matrix& m);

/// Both of the above from a single Gram product; `grad` is overwritten.
double orthogonality_defect_and_grad(const Matrix& m, Matrix& grad);

/// Polar factor of M: the orthogonal matrix closest to M in Frobenius norm.
/// Throws NumericalError when M is (numerically) rank deficient.
Matrix nearest_orthogonal(const Matrix& m);

/// Haar-distributed random orthogonal matrix (QR of a Gaussian matrix with
/// the sign of R's diagonal folded into Q).
Matrix random_orthogonal(Index d, Rng& rng);

/// Matrix of i.i.d. standard normal entries.
Matrix gaussian_matrix(Index rows, Index cols, Rng& rng);

bool all_finite(const Vector& v);
bool all_finite(const Matrix& m);

}  // namespace gprobe
