#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace ftmixer {

using Shape = std::vector<std::size_t>;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

std::string shape_string(const Shape& shape);
std::size_t shape_size(const Shape& shape);

namespace detail {

struct Node {
  Shape shape;
  std::vector<double> values;
  std::vector<double> grad;
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  // Reads this node's grad and accumulates into parents that require grad.
  std::function<void(Node&)> backward;

  bool is_leaf() const { return !backward; }
  std::vector<double>& ensure_grad();
};

}  // namespace detail

/// Dense row-major array of doubles that can take part in reverse-mode
/// differentiation. Copies share the underlying node.
class DiffArray {
 public:
  DiffArray() = default;
  DiffArray(Shape shape, std::vector<double> values, bool requires_grad = false);

  static DiffArray zeros(Shape shape, bool requires_grad = false);
  static DiffArray full(Shape shape, double value, bool requires_grad = false);
  static DiffArray scalar(double value, bool requires_grad = false);
  static DiffArray from_matrix(const Eigen::Ref<const RowMatrix>& m, bool requires_grad = false);

  bool defined() const { return static_cast<bool>(node_); }
  const Shape& shape() const;
  std::size_t rank() const { return shape().size(); }
  std::size_t dim(std::size_t axis) const;
  std::size_t size() const;

  std::span<const double> values() const;
  /// In-place access; meant for leaves (parameters, inputs), never for
  /// arrays already consumed by a recorded op.
  std::span<double> values_mut();
  double item() const;

  /// Rank-2 view; rank-1 arrays are viewed as a single row.
  Eigen::Map<const RowMatrix> matrix() const;

  bool requires_grad() const;
  void set_requires_grad(bool on);
  bool has_grad() const;
  std::span<const double> grad() const;
  /// Allocates a zeroed buffer first if there is none.
  std::span<double> grad_mut();
  void zero_grad();

  /// Same values, no history, no gradient tracking.
  DiffArray detach() const;

  const std::shared_ptr<detail::Node>& node() const { return node_; }
  explicit DiffArray(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}

 private:
  std::shared_ptr<detail::Node> node_;
};

/// Disables graph recording on this thread for the guard's lifetime.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

bool grad_enabled();

// Elementwise ops. The smaller operand may broadcast when its shape is a
// trailing suffix of the other's shape.
DiffArray add(const DiffArray& a, const DiffArray& b);
DiffArray sub(const DiffArray& a, const DiffArray& b);
DiffArray mul(const DiffArray& a, const DiffArray& b);
DiffArray scale(const DiffArray& a, double s);
DiffArray add_scalar(const DiffArray& a, double s);

inline DiffArray operator+(const DiffArray& a, const DiffArray& b) { return add(a, b); }
inline DiffArray operator-(const DiffArray& a, const DiffArray& b) { return sub(a, b); }
inline DiffArray operator*(const DiffArray& a, const DiffArray& b) { return mul(a, b); }
inline DiffArray operator*(const DiffArray& a, double s) { return scale(a, s); }
inline DiffArray operator*(double s, const DiffArray& a) { return scale(a, s); }
inline DiffArray operator-(const DiffArray& a) { return scale(a, -1.0); }

DiffArray square(const DiffArray& a);
/// Subgradient at exactly zero is 0.
DiffArray abs(const DiffArray& a);
/// Exact (erf-based) GELU.
DiffArray gelu(const DiffArray& a);

DiffArray sum(const DiffArray& a);
DiffArray mean(const DiffArray& a);

DiffArray matmul(const DiffArray& a, const DiffArray& b);

/// Applies a constant linear map along the last axis: y[..., i] = sum_j map(i, j) x[..., j].
DiffArray linear_map_last(const DiffArray& x, std::shared_ptr<const RowMatrix> map);

DiffArray reshape(const DiffArray& a, Shape shape);
/// Swaps the last two axes of a rank-2 or rank-3 array.
DiffArray transpose_last2(const DiffArray& a);
DiffArray concat(std::span<const DiffArray> parts, std::size_t axis);

enum class Padding { Valid, Same };

struct Conv1dOptions {
  Padding padding = Padding::Same;
  std::size_t groups = 1;
};

/// Cross-correlation over the last axis. x is [C_in, L] or [B, C_in, L];
/// kernels are [C_out, C_in / groups, K]; bias, when given, is [C_out].
/// Same padding puts (K - 1) / 2 zeros on the left and the rest on the right.
DiffArray conv1d(const DiffArray& x, const DiffArray& kernels,
                 const std::optional<DiffArray>& bias = std::nullopt,
                 Conv1dOptions options = {});

/// Reverse sweep from a scalar loss. Leaf gradients accumulate across calls.
void backward(const DiffArray& loss);

namespace detail {

/// Builds a result node; history is kept only when grad mode is on and a
/// parent requires grad.
DiffArray make_result(Shape shape, std::vector<double> values,
                      std::vector<std::shared_ptr<Node>> parents,
                      std::function<void(Node&)> backward_fn);

}  // namespace detail

}  // namespace ftmixer
