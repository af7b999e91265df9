#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lorhol/metric.hpp"
#include "lorhol/transport.hpp"

namespace lorhol {

/// Basis (V, E_1..E_n, Z) stored as the columns of `vectors`.
struct AdaptedFrame {
  Point base;
  Matrix vectors;

  int screen_dim() const { return static_cast<int>(vectors.cols()) - 2; }
  Vector V() const { return vectors.col(0); }
  Vector Z() const { return vectors.col(vectors.cols() - 1); }
  Vector E(int a) const { return vectors.col(1 + a); }
};

/// Walker charts: V = d_x, Z the isotropic complement built from the chart
/// entries, E = Gram-Schmidt of d_y in the screen metric, optionally
/// followed by an orthogonal rotation of the E block.
AdaptedFrame adapted_frame(const MetricChart& M, const Point& p, const std::optional<Matrix>& rotation = std::nullopt);

/// Walker charts: V = d_x, Y_i = d_i - g_{i,z} d_x, Z = d_z - (1/2) g_zz d_x.
/// Null and orthogonal, orthonormal on Y when the screen block is the identity.
AdaptedFrame horizontal_frame(const MetricChart& M, const Point& p);

/// Any chart: adapted frame around a given null vector V.
AdaptedFrame null_frame(const MetricChart& M, const Point& p, const Vector& V);

/// Any chart: a null frame built from a g-orthonormal eigenbasis of g(p).
AdaptedFrame generic_frame(const MetricChart& M, const Point& p);

/// Max deviation of the frame Gram matrix from [[0,0,1],[0,I,0],[1,0,0]].
double frame_residual(const MetricChart& M, const AdaptedFrame& F);

/// Gram matrix of an adapted frame.
Matrix adapted_gram(int n);

struct SamplingStrategy {
  std::vector<double> rect_sizes{0.2, 0.1, 0.05};
  int lasso_targets = 8;
  /// Coordinate planes for rectangle loops; empty means all pairs.
  std::vector<std::pair<int, int>> plane_pairs;
  std::uint64_t seed = 0;
  double margin = 0.1;
  double transport_tol = 1e-11;
  /// Curvature samples below this Frobenius norm are treated as zero.
  double curvature_floor = 1e-6;
  /// Loop logarithms below this Frobenius norm are treated as zero.
  double loop_floor = 1e-3;
};

struct HolonomySample {
  Matrix X;         // in the base frame
  std::string kind;  // "curvature" or "loop"
  Point point;      // where curvature was evaluated or loop corner
  int i = 0, j = 0;  // frame pair (curvature) or coordinate plane (loop)
  double norm = 0.0;
  bool kept = false;
};

/// Curvature operators transported back to the base point along straight
/// lassos, plus logarithms of small rectangle loops at the base point.
std::vector<HolonomySample> ambrose_singer_sample(const MetricChart& M, const AdaptedFrame& frame,
                                                  const SamplingStrategy& strategy);

struct ClosureResult {
  std::vector<Matrix> basis;  // orthonormal in the Frobenius inner product
  Vector singular_values;     // of the normalised input samples
  bool cap_hit = false;
  int commutators_added = 0;
};

/// Span of the (normalised) elements closed under commutators.
ClosureResult lie_closure(const std::vector<Matrix>& elems, double tol_rank = 1e-7, int cap = -1);

struct StabilizerElement {
  double a = 0.0;
  Matrix A;
  Vector w;
};

/// Reads (a, A, w) from [[a, w^T, 0], [0, A, -w], [0, 0, -a]].
std::optional<StabilizerElement> stabilizer_decompose(const Matrix& X, double tol = 1e-8);

enum class TypeLabel { Type1, Type2, Type3, Type4, NotReducible, Decomposable };
std::string to_string(TypeLabel label, int ell = 0);

struct Classification {
  TypeLabel label = TypeLabel::Decomposable;
  int ell = 0;  // translation dimension for Type4
  int g_dim = 0;
  int translation_dim = 0;
  bool a_nonzero = false;
  bool in_stabilizer = true;
  std::vector<StabilizerElement> elements;
  std::vector<std::string> notes;
};

/// Classifies an algebra given by a basis expressed in an adapted frame.
Classification classify_bbi(const std::vector<Matrix>& basis, int n, double tol = 1e-7);

struct HolonomyReport {
  Point base;
  Matrix frame;
  std::vector<Matrix> basis;
  int dim = 0;
  bool in_stabilizer = false;
  std::vector<StabilizerElement> stab_basis;
  int screen_algebra_dim = 0;
  TypeLabel label = TypeLabel::Decomposable;
  int ell = 0;
  Vector singular_values;
  bool cap_hit = false;
  int samples_total = 0;
  int samples_kept = 0;
  std::vector<std::string> notes;
};

/// Full pipeline: frame, sampling, closure, classification.
HolonomyReport holonomy_report(const MetricChart& M, const Point& p, const SamplingStrategy& strategy = {},
                               double tol_rank = 1e-7, const std::optional<Matrix>& rotation = std::nullopt);

struct ScreenHolonomy {
  std::vector<Matrix> basis;  // n x n antisymmetric
  int dim = 0;
  double max_screen_curvature = 0.0;  // max |<R(u,v) E_b, E_a>| in adapted frames at the sample points
  Vector singular_values;
};

/// Holonomy of the screen connection (Walker charts): closure of the screen
/// blocks of the transported curvature and loop samples.
ScreenHolonomy screen_holonomy(const MetricChart& M, const Point& p, const SamplingStrategy& strategy = {},
                               double tol_rank = 1e-7);

}  // namespace lorhol
