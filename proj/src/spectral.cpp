#include "ftmixer/spectral.hpp"

#include <map>
#include <mutex>

namespace ftmixer {

namespace {

struct BasisCache {
  std::mutex mutex;
  std::map<std::size_t, std::shared_ptr<const RowMatrix>> forward;
  std::map<std::size_t, std::shared_ptr<const RowMatrix>> inverse;
};

BasisCache& cache() {
  static BasisCache c;
  return c;
}

template <typename Build>
std::shared_ptr<const RowMatrix> lookup(std::map<std::size_t, std::shared_ptr<const RowMatrix>>& table,
                                        std::size_t length, Build build) {
  if (length == 0) throw ContractError("spectral basis: length must be at least 1");
  std::lock_guard lock(cache().mutex);
  auto& slot = table[length];
  if (!slot) slot = std::make_shared<const RowMatrix>(build(static_cast<Eigen::Index>(length)));
  return slot;
}

}  // namespace

std::shared_ptr<const RowMatrix> cached_dct_basis(std::size_t length) {
  return lookup(cache().forward, length, dct_basis<double>);
}

std::shared_ptr<const RowMatrix> cached_idct_basis(std::size_t length) {
  return lookup(cache().inverse, length, idct_basis<double>);
}

DiffArray dct_last(const DiffArray& x) {
  if (!x.defined() || x.rank() == 0) throw ContractError("dct_last: empty input");
  return linear_map_last(x, cached_dct_basis(x.shape().back()));
}

DiffArray idct_last(const DiffArray& c) {
  if (!c.defined() || c.rank() == 0) throw ContractError("idct_last: empty input");
  return linear_map_last(c, cached_idct_basis(c.shape().back()));
}

}  // namespace ftmixer
