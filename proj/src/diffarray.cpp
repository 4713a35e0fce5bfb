#include "ftmixer/diffarray.hpp"

#include "ftmixer/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <unordered_set>

namespace ftmixer {

namespace {

thread_local bool g_grad_enabled = true;

using ConstMap = Eigen::Map<const RowMatrix>;
using MutMap = Eigen::Map<RowMatrix>;

bool is_suffix(const Shape& small, const Shape& big) {
  if (small.size() > big.size()) return false;
  return std::equal(small.rbegin(), small.rend(), big.rbegin());
}

void require_defined(const DiffArray& a, const char* op) {
  if (!a.defined()) throw ContractError(std::string(op) + ": undefined array");
}

}  // namespace

std::string shape_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ", ";
    os << shape[i];
  }
  os << ']';
  return os.str();
}

std::size_t shape_size(const Shape& shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

std::vector<double>& detail::Node::ensure_grad() {
  if (grad.size() != values.size()) grad.assign(values.size(), 0.0);
  return grad;
}

DiffArray detail::make_result(Shape shape, std::vector<double> values,
                              std::vector<std::shared_ptr<Node>> parents,
                              std::function<void(Node&)> backward_fn) {
  auto node = std::make_shared<Node>();
  node->shape = std::move(shape);
  node->values = std::move(values);
  bool track = g_grad_enabled &&
               std::any_of(parents.begin(), parents.end(),
                           [](const auto& p) { return p->requires_grad; });
  if (track) {
    node->requires_grad = true;
    node->parents = std::move(parents);
    node->backward = std::move(backward_fn);
  }
  return DiffArray(std::move(node));
}

// ---------------------------------------------------------------------------
// DiffArray

DiffArray::DiffArray(Shape shape, std::vector<double> values, bool requires_grad) {
  for (auto d : shape) {
    if (d == 0) throw DimensionError("DiffArray: zero extent in shape " + shape_string(shape));
  }
  if (values.size() != shape_size(shape)) {
    throw DimensionError("DiffArray: " + std::to_string(values.size()) +
                         " values do not fill shape " + shape_string(shape));
  }
  node_ = std::make_shared<detail::Node>();
  node_->shape = std::move(shape);
  node_->values = std::move(values);
  node_->requires_grad = requires_grad;
}

DiffArray DiffArray::zeros(Shape shape, bool requires_grad) {
  return full(std::move(shape), 0.0, requires_grad);
}

DiffArray DiffArray::full(Shape shape, double value, bool requires_grad) {
  auto n = shape_size(shape);
  return DiffArray(std::move(shape), std::vector<double>(n, value), requires_grad);
}

DiffArray DiffArray::scalar(double value, bool requires_grad) {
  return DiffArray({1}, {value}, requires_grad);
}

DiffArray DiffArray::from_matrix(const Eigen::Ref<const RowMatrix>& m, bool requires_grad) {
  std::vector<double> v(m.data(), m.data() + m.size());
  return DiffArray({static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols())},
                   std::move(v), requires_grad);
}

const Shape& DiffArray::shape() const {
  static const Shape empty;
  return node_ ? node_->shape : empty;
}

std::size_t DiffArray::dim(std::size_t axis) const {
  if (axis >= rank()) {
    throw DimensionError("dim: axis " + std::to_string(axis) + " out of range for " +
                         shape_string(shape()));
  }
  return shape()[axis];
}

std::size_t DiffArray::size() const { return node_ ? node_->values.size() : 0; }

std::span<const double> DiffArray::values() const {
  if (!node_) return {};
  return node_->values;
}

std::span<double> DiffArray::values_mut() {
  if (!node_) return {};
  return node_->values;
}

double DiffArray::item() const {
  if (size() != 1) throw ContractError("item: array of shape " + shape_string(shape()) + " is not scalar");
  return node_->values[0];
}

Eigen::Map<const RowMatrix> DiffArray::matrix() const {
  require_defined(*this, "matrix");
  if (rank() == 1) return ConstMap(node_->values.data(), 1, static_cast<Eigen::Index>(dim(0)));
  if (rank() != 2) throw DimensionError("matrix: expected rank 1 or 2, got " + shape_string(shape()));
  return ConstMap(node_->values.data(), static_cast<Eigen::Index>(dim(0)),
                  static_cast<Eigen::Index>(dim(1)));
}

bool DiffArray::requires_grad() const { return node_ && node_->requires_grad; }

void DiffArray::set_requires_grad(bool on) {
  require_defined(*this, "set_requires_grad");
  if (!node_->is_leaf()) throw ContractError("set_requires_grad: only leaves can change tracking");
  node_->requires_grad = on;
}

bool DiffArray::has_grad() const { return node_ && node_->grad.size() == node_->values.size(); }

std::span<const double> DiffArray::grad() const {
  if (!has_grad()) return {};
  return node_->grad;
}

std::span<double> DiffArray::grad_mut() {
  if (!node_) return {};
  return node_->ensure_grad();
}

void DiffArray::zero_grad() {
  if (node_ && !node_->grad.empty()) std::fill(node_->grad.begin(), node_->grad.end(), 0.0);
}

DiffArray DiffArray::detach() const {
  require_defined(*this, "detach");
  return DiffArray(node_->shape, node_->values, false);
}

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }
bool grad_enabled() { return g_grad_enabled; }

// ---------------------------------------------------------------------------
// Elementwise

namespace {

enum class BinaryKind { Add, Sub, Mul };

DiffArray binary(const DiffArray& a, const DiffArray& b, BinaryKind kind, const char* name) {
  require_defined(a, name);
  require_defined(b, name);
  const bool a_big = is_suffix(b.shape(), a.shape());
  if (!a_big && !is_suffix(a.shape(), b.shape())) {
    throw DimensionError(std::string(name) + ": shapes " + shape_string(a.shape()) + " and " +
                         shape_string(b.shape()) + " are not broadcast-compatible");
  }
  const Shape out_shape = a_big ? a.shape() : b.shape();
  const std::size_t n = shape_size(out_shape);
  const std::size_t na = a.size();
  const std::size_t nb = b.size();
  auto av = a.values();
  auto bv = b.values();
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    double x = av[i % na];
    double y = bv[i % nb];
    switch (kind) {
      case BinaryKind::Add: out[i] = x + y; break;
      case BinaryKind::Sub: out[i] = x - y; break;
      case BinaryKind::Mul: out[i] = x * y; break;
    }
  }
  return detail::make_result(
      out_shape, std::move(out), {a.node(), b.node()},
      [kind, na, nb](detail::Node& self) {
        auto& pa = *self.parents[0];
        auto& pb = *self.parents[1];
        const auto& g = self.grad;
        const std::size_t n = g.size();
        if (pa.requires_grad) {
          auto& ga = pa.ensure_grad();
          for (std::size_t i = 0; i < n; ++i) {
            double d = kind == BinaryKind::Mul ? g[i] * pb.values[i % nb] : g[i];
            ga[i % na] += d;
          }
        }
        if (pb.requires_grad) {
          auto& gb = pb.ensure_grad();
          for (std::size_t i = 0; i < n; ++i) {
            double d = kind == BinaryKind::Add   ? g[i]
                       : kind == BinaryKind::Sub ? -g[i]
                                                 : g[i] * pa.values[i % na];
            gb[i % nb] += d;
          }
        }
      });
}

template <typename F, typename DF>
DiffArray unary(const DiffArray& a, const char* name, F f, DF df) {
  require_defined(a, name);
  auto av = a.values();
  std::vector<double> out(av.size());
  for (std::size_t i = 0; i < av.size(); ++i) out[i] = f(av[i]);
  return detail::make_result(a.shape(), std::move(out), {a.node()}, [df](detail::Node& self) {
    auto& p = *self.parents[0];
    auto& gp = p.ensure_grad();
    for (std::size_t i = 0; i < self.grad.size(); ++i) gp[i] += self.grad[i] * df(p.values[i]);
  });
}

}  // namespace

DiffArray add(const DiffArray& a, const DiffArray& b) { return binary(a, b, BinaryKind::Add, "add"); }
DiffArray sub(const DiffArray& a, const DiffArray& b) { return binary(a, b, BinaryKind::Sub, "sub"); }
DiffArray mul(const DiffArray& a, const DiffArray& b) { return binary(a, b, BinaryKind::Mul, "mul"); }

DiffArray scale(const DiffArray& a, double s) {
  return unary(a, "scale", [s](double x) { return s * x; }, [s](double) { return s; });
}

DiffArray add_scalar(const DiffArray& a, double s) {
  return unary(a, "add_scalar", [s](double x) { return x + s; }, [](double) { return 1.0; });
}

DiffArray square(const DiffArray& a) {
  return unary(a, "square", [](double x) { return x * x; }, [](double x) { return 2.0 * x; });
}

DiffArray abs(const DiffArray& a) {
  return unary(
      a, "abs", [](double x) { return std::abs(x); },
      [](double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); });
}

DiffArray gelu(const DiffArray& a) {
  constexpr double inv_sqrt2 = 0.70710678118654752440;
  const double inv_sqrt_2pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);
  return unary(
      a, "gelu", [](double x) { return 0.5 * x * (1.0 + std::erf(x * inv_sqrt2)); },
      [inv_sqrt_2pi](double x) {
        return 0.5 * (1.0 + std::erf(x * inv_sqrt2)) + x * inv_sqrt_2pi * std::exp(-0.5 * x * x);
      });
}

// ---------------------------------------------------------------------------
// Reductions

DiffArray sum(const DiffArray& a) {
  require_defined(a, "sum");
  double s = 0.0;
  for (double v : a.values()) s += v;
  return detail::make_result({1}, {s}, {a.node()}, [](detail::Node& self) {
    auto& gp = self.parents[0]->ensure_grad();
    const double g = self.grad[0];
    for (auto& v : gp) v += g;
  });
}

DiffArray mean(const DiffArray& a) {
  require_defined(a, "mean");
  const double n = static_cast<double>(a.size());
  double s = 0.0;
  for (double v : a.values()) s += v;
  return detail::make_result({1}, {s / n}, {a.node()}, [n](detail::Node& self) {
    auto& gp = self.parents[0]->ensure_grad();
    const double g = self.grad[0] / n;
    for (auto& v : gp) v += g;
  });
}

// ---------------------------------------------------------------------------
// Linear algebra

DiffArray matmul(const DiffArray& a, const DiffArray& b) {
  require_defined(a, "matmul");
  require_defined(b, "matmul");
  if (a.rank() != 2 || b.rank() != 2 || a.dim(1) != b.dim(0)) {
    throw DimensionError("matmul: cannot multiply " + shape_string(a.shape()) + " by " +
                         shape_string(b.shape()));
  }
  const auto m = static_cast<Eigen::Index>(a.dim(0));
  const auto k = static_cast<Eigen::Index>(a.dim(1));
  const auto n = static_cast<Eigen::Index>(b.dim(1));
  std::vector<double> out(static_cast<std::size_t>(m * n));
  MutMap(out.data(), m, n).noalias() = a.matrix() * b.matrix();
  return detail::make_result(
      {a.dim(0), b.dim(1)}, std::move(out), {a.node(), b.node()},
      [m, k, n](detail::Node& self) {
        auto& pa = *self.parents[0];
        auto& pb = *self.parents[1];
        ConstMap g(self.grad.data(), m, n);
        if (pa.requires_grad) {
          MutMap(pa.ensure_grad().data(), m, k).noalias() +=
              g * ConstMap(pb.values.data(), k, n).transpose();
        }
        if (pb.requires_grad) {
          MutMap(pb.ensure_grad().data(), k, n).noalias() +=
              ConstMap(pa.values.data(), m, k).transpose() * g;
        }
      });
}

DiffArray linear_map_last(const DiffArray& x, std::shared_ptr<const RowMatrix> map) {
  require_defined(x, "linear_map_last");
  if (x.rank() == 0 || static_cast<std::size_t>(map->cols()) != x.shape().back()) {
    throw DimensionError("linear_map_last: map with " + std::to_string(map->cols()) +
                         " columns cannot act on last axis of " + shape_string(x.shape()));
  }
  const auto in = map->cols();
  const auto outw = map->rows();
  const auto rows = static_cast<Eigen::Index>(x.size()) / in;
  Shape out_shape = x.shape();
  out_shape.back() = static_cast<std::size_t>(outw);
  std::vector<double> out(static_cast<std::size_t>(rows * outw));
  MutMap(out.data(), rows, outw).noalias() =
      ConstMap(x.values().data(), rows, in) * map->transpose();
  return detail::make_result(std::move(out_shape), std::move(out), {x.node()},
                             [map, rows, in, outw](detail::Node& self) {
                               auto& p = *self.parents[0];
                               MutMap(p.ensure_grad().data(), rows, in).noalias() +=
                                   ConstMap(self.grad.data(), rows, outw) * (*map);
                             });
}

// ---------------------------------------------------------------------------
// Layout

DiffArray reshape(const DiffArray& a, Shape shape) {
  require_defined(a, "reshape");
  if (shape_size(shape) != a.size()) {
    throw DimensionError("reshape: cannot view " + shape_string(a.shape()) + " as " +
                         shape_string(shape));
  }
  std::vector<double> v(a.values().begin(), a.values().end());
  return detail::make_result(std::move(shape), std::move(v), {a.node()}, [](detail::Node& self) {
    auto& gp = self.parents[0]->ensure_grad();
    for (std::size_t i = 0; i < gp.size(); ++i) gp[i] += self.grad[i];
  });
}

DiffArray transpose_last2(const DiffArray& a) {
  require_defined(a, "transpose_last2");
  if (a.rank() != 2 && a.rank() != 3) {
    throw DimensionError("transpose_last2: expected rank 2 or 3, got " + shape_string(a.shape()));
  }
  const std::size_t batch = a.rank() == 3 ? a.dim(0) : 1;
  const auto r = static_cast<Eigen::Index>(a.shape()[a.rank() - 2]);
  const auto c = static_cast<Eigen::Index>(a.shape()[a.rank() - 1]);
  Shape out_shape = a.shape();
  std::swap(out_shape[out_shape.size() - 1], out_shape[out_shape.size() - 2]);
  std::vector<double> out(a.size());
  const auto block = static_cast<std::size_t>(r * c);
  for (std::size_t b = 0; b < batch; ++b) {
    MutMap(out.data() + b * block, c, r) = ConstMap(a.values().data() + b * block, r, c).transpose();
  }
  return detail::make_result(std::move(out_shape), std::move(out), {a.node()},
                             [batch, r, c, block](detail::Node& self) {
                               auto& gp = self.parents[0]->ensure_grad();
                               for (std::size_t b = 0; b < batch; ++b) {
                                 MutMap(gp.data() + b * block, r, c) +=
                                     ConstMap(self.grad.data() + b * block, c, r).transpose();
                               }
                             });
}

DiffArray concat(std::span<const DiffArray> parts, std::size_t axis) {
  if (parts.empty()) throw ContractError("concat: no inputs");
  const Shape& first = parts[0].shape();
  if (axis >= first.size()) throw DimensionError("concat: axis out of range for " + shape_string(first));
  std::size_t outer = 1;
  for (std::size_t i = 0; i < axis; ++i) outer *= first[i];
  std::size_t inner = 1;
  for (std::size_t i = axis + 1; i < first.size(); ++i) inner *= first[i];

  std::vector<std::size_t> extents;
  std::size_t total = 0;
  std::vector<std::shared_ptr<detail::Node>> nodes;
  for (const auto& p : parts) {
    require_defined(p, "concat");
    const Shape& s = p.shape();
    bool ok = s.size() == first.size();
    for (std::size_t i = 0; ok && i < s.size(); ++i) ok = (i == axis) || s[i] == first[i];
    if (!ok) {
      throw DimensionError("concat: " + shape_string(s) + " does not match " + shape_string(first) +
                           " off axis " + std::to_string(axis));
    }
    extents.push_back(s[axis]);
    total += s[axis];
    nodes.push_back(p.node());
  }
  Shape out_shape = first;
  out_shape[axis] = total;
  std::vector<double> out(shape_size(out_shape));
  const std::size_t row = total * inner;
  std::size_t offset = 0;
  for (std::size_t p = 0; p < parts.size(); ++p) {
    const std::size_t chunk = extents[p] * inner;
    auto src = parts[p].values();
    for (std::size_t o = 0; o < outer; ++o) {
      std::copy_n(src.data() + o * chunk, chunk, out.data() + o * row + offset);
    }
    offset += chunk;
  }
  return detail::make_result(std::move(out_shape), std::move(out), std::move(nodes),
                             [extents, outer, inner, row](detail::Node& self) {
                               std::size_t offset = 0;
                               for (std::size_t p = 0; p < extents.size(); ++p) {
                                 const std::size_t chunk = extents[p] * inner;
                                 auto& node = *self.parents[p];
                                 if (node.requires_grad) {
                                   auto& gp = node.ensure_grad();
                                   for (std::size_t o = 0; o < outer; ++o) {
                                     const double* g = self.grad.data() + o * row + offset;
                                     double* d = gp.data() + o * chunk;
                                     for (std::size_t i = 0; i < chunk; ++i) d[i] += g[i];
                                   }
                                 }
                                 offset += chunk;
                               }
                             });
}

// ---------------------------------------------------------------------------
// Convolution

DiffArray conv1d(const DiffArray& x, const DiffArray& kernels, const std::optional<DiffArray>& bias,
                 Conv1dOptions options) {
  require_defined(x, "conv1d");
  require_defined(kernels, "conv1d");
  if (x.rank() != 2 && x.rank() != 3) {
    throw DimensionError("conv1d: input must be [C_in, L] or [B, C_in, L], got " +
                         shape_string(x.shape()));
  }
  if (kernels.rank() != 3) {
    throw DimensionError("conv1d: kernels must be [C_out, C_in/groups, K], got " +
                         shape_string(kernels.shape()));
  }
  const bool batched = x.rank() == 3;
  const std::size_t batch = batched ? x.dim(0) : 1;
  const std::size_t c_in = x.dim(batched ? 1 : 0);
  const std::size_t len = x.dim(batched ? 2 : 1);
  const std::size_t c_out = kernels.dim(0);
  const std::size_t cin_g = kernels.dim(1);
  const std::size_t k = kernels.dim(2);
  const std::size_t groups = options.groups;
  if (groups == 0 || c_in % groups != 0 || c_out % groups != 0) {
    throw ConfigError("conv1d: groups=" + std::to_string(groups) + " must divide C_in=" +
                      std::to_string(c_in) + " and C_out=" + std::to_string(c_out));
  }
  if (cin_g != c_in / groups) {
    throw DimensionError("conv1d: kernels " + shape_string(kernels.shape()) + " expect " +
                         std::to_string(cin_g * groups) + " input channels, input " +
                         shape_string(x.shape()) + " has " + std::to_string(c_in));
  }
  if (bias && (bias->rank() != 1 || bias->dim(0) != c_out)) {
    throw DimensionError("conv1d: bias " + shape_string(bias->shape()) + " must be [" +
                         std::to_string(c_out) + "]");
  }
  const std::size_t pad_total = options.padding == Padding::Same ? k - 1 : 0;
  const std::size_t pad_left = pad_total / 2;
  if (k > len + pad_total) {
    throw DimensionError("conv1d: kernel size " + std::to_string(k) + " exceeds padded length " +
                         std::to_string(len + pad_total));
  }
  const std::size_t len_out = len + pad_total - k + 1;
  const std::size_t cout_g = c_out / groups;

  Shape out_shape = batched ? Shape{batch, c_out, len_out} : Shape{c_out, len_out};
  std::vector<double> out(batch * c_out * len_out, 0.0);
  const double* xv = x.values().data();
  const double* wv = kernels.values().data();

  // Output range [t0, t1) for which input index t + shift lies in [0, len).
  auto valid_range = [len, len_out](std::ptrdiff_t shift) {
    std::ptrdiff_t t0 = std::max<std::ptrdiff_t>(0, -shift);
    std::ptrdiff_t t1 = std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(len_out),
                                                 static_cast<std::ptrdiff_t>(len) - shift);
    return std::pair{t0, t1};
  };

  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t o = 0; o < c_out; ++o) {
      double* y = out.data() + (b * c_out + o) * len_out;
      if (bias) std::fill(y, y + len_out, bias->values()[o]);
      const std::size_t g = o / cout_g;
      for (std::size_t i = 0; i < cin_g; ++i) {
        const double* xr = xv + (b * c_in + g * cin_g + i) * len;
        const double* wr = wv + (o * cin_g + i) * k;
        for (std::size_t j = 0; j < k; ++j) {
          const auto shift = static_cast<std::ptrdiff_t>(j) - static_cast<std::ptrdiff_t>(pad_left);
          const double w = wr[j];
          auto [t0, t1] = valid_range(shift);
          for (std::ptrdiff_t t = t0; t < t1; ++t) y[t] += w * xr[t + shift];
        }
      }
    }
  }

  std::vector<std::shared_ptr<detail::Node>> parents{x.node(), kernels.node()};
  if (bias) parents.push_back(bias->node());
  const bool has_bias = bias.has_value();

  return detail::make_result(
      std::move(out_shape), std::move(out), std::move(parents),
      [=](detail::Node& self) {
        auto& px = *self.parents[0];
        auto& pw = *self.parents[1];
        const double* gy_all = self.grad.data();
        double* gx = px.requires_grad ? px.ensure_grad().data() : nullptr;
        double* gw = pw.requires_grad ? pw.ensure_grad().data() : nullptr;
        for (std::size_t b = 0; b < batch; ++b) {
          for (std::size_t o = 0; o < c_out; ++o) {
            const double* gy = gy_all + (b * c_out + o) * len_out;
            const std::size_t g = o / cout_g;
            for (std::size_t i = 0; i < cin_g; ++i) {
              const std::size_t xoff = (b * c_in + g * cin_g + i) * len;
              const double* xr = px.values.data() + xoff;
              const std::size_t woff = (o * cin_g + i) * k;
              for (std::size_t j = 0; j < k; ++j) {
                const auto shift =
                    static_cast<std::ptrdiff_t>(j) - static_cast<std::ptrdiff_t>(pad_left);
                auto [t0, t1] = valid_range(shift);
                if (gx) {
                  const double w = pw.values[woff + j];
                  double* gxr = gx + xoff;
                  for (std::ptrdiff_t t = t0; t < t1; ++t) gxr[t + shift] += w * gy[t];
                }
                if (gw) {
                  double acc = 0.0;
                  for (std::ptrdiff_t t = t0; t < t1; ++t) acc += gy[t] * xr[t + shift];
                  gw[woff + j] += acc;
                }
              }
            }
          }
        }
        if (has_bias && self.parents[2]->requires_grad) {
          auto& gb = self.parents[2]->ensure_grad();
          for (std::size_t b = 0; b < batch; ++b) {
            for (std::size_t o = 0; o < c_out; ++o) {
              const double* gy = gy_all + (b * c_out + o) * len_out;
              double acc = 0.0;
              for (std::size_t t = 0; t < len_out; ++t) acc += gy[t];
              gb[o] += acc;
            }
          }
        }
      });
}

// ---------------------------------------------------------------------------
// Reverse sweep

void backward(const DiffArray& loss) {
  require_defined(loss, "backward");
  if (loss.size() != 1) {
    throw ContractError("backward: loss must be scalar, got shape " + shape_string(loss.shape()));
  }
  auto root = loss.node();
  if (!root->requires_grad) return;

  // Post-order DFS gives a topological order; reversed it is the tape.
  std::vector<detail::Node*> order;
  std::unordered_set<detail::Node*> seen;
  std::vector<std::pair<detail::Node*, std::size_t>> stack{{root.get(), 0}};
  seen.insert(root.get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      detail::Node* parent = node->parents[next++].get();
      if (parent->requires_grad && seen.insert(parent).second) stack.emplace_back(parent, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  for (auto* node : order) {
    if (!node->is_leaf()) node->grad.assign(node->values.size(), 0.0);
  }
  root->ensure_grad()[0] += 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    if (!(*it)->is_leaf()) (*it)->backward(**it);
  }
}

}  // namespace ftmixer
