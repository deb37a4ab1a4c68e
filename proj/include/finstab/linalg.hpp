// Dense linear-algebra helpers shared by the model, decomposition and
// integrator layers. Everything here works in a metric (Gram-matrix) inner
// product unless the name says otherwise.

#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>

namespace finstab {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Column basis of the null space of `a`, Euclidean-orthonormal. Singular
/// values below `rel_tol * sigma_max` count as zero.
Mat null_space(const Mat& a, double rel_tol);

/// Re-orthonormalises the columns of `x` in the inner product <u, v> = u^T m v
/// (two passes of modified Gram-Schmidt). Columns that collapse below
/// `drop_tol` relative to their original norm are discarded.
Mat metric_orthonormalize(const Mat& m, const Mat& x, double drop_tol = 1e-10);

/// Sine of the largest principal angle between span(u) and span(v) in the
/// metric `m`. Returns 1 when the dimensions differ and 0 when both are empty.
double subspace_distance(const Mat& m, const Mat& u, const Mat& v);

/// Matrix exponential (Pade scaling and squaring).
Mat expm(const Mat& a);

/// Symmetric part (a + a^T) / 2.
inline Mat sym(const Mat& a) { return 0.5 * (a + a.transpose()); }

/// Deterministic generator used everywhere randomness is needed.
using Rng = std::mt19937_64;

/// Vector of i.i.d. standard normals.
Vec random_normal(Rng& rng, Eigen::Index n);

/// Random metric-unit vector in span(basis); basis columns must be
/// metric-orthonormal.
Vec random_unit_in_span(Rng& rng, const Mat& m, const Mat& basis);

}  // namespace finstab
