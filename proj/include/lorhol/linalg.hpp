#pragma once

#include <cstdint>

#include "lorhol/expr.hpp"

namespace lorhol {

/// Orthonormal basis (rows) of the row space of `rows`, keeping singular
/// values above `tol`. All singular values are written to `sv` if given.
Matrix row_space(const Matrix& rows, double tol, Vector* sv = nullptr);

/// Orthonormal basis (columns) of the kernel of `a`.
Matrix null_space(const Matrix& a, double tol);

int numerical_rank(const Matrix& a, double tol);

/// Principal logarithm by power series; requires ||P - I|| < 1.
Matrix log_near_identity(const Matrix& p);

inline Matrix commutator(const Matrix& a, const Matrix& b) { return a * b - b * a; }

Vector flatten(const Matrix& a);
Matrix unflatten(const Vector& v, int rows, int cols);

/// Radical inverse of `index` in the given prime base.
double radical_inverse(std::uint64_t index, int base);

/// SplitMix64 step, used to derive reproducible streams from one seed.
std::uint64_t splitmix64(std::uint64_t& state);
double uniform01(std::uint64_t& state);

}  // namespace lorhol
