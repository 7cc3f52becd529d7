#include "mcsd/tree/topology_mask.hpp"

#include <fmt/format.h>

#include <numeric>

#include "mcsd/error.hpp"

namespace mcsd {

TopologyMask::TopologyMask(const TokenTree& tree) : n_(tree.size()), bits_(n_ * n_, 0) {
  for (std::size_t j = 0; j < n_; ++j) {
    for (int cur = static_cast<int>(j); cur >= 0; cur = tree.node(static_cast<std::size_t>(cur)).parent) {
      bits_[j * n_ + static_cast<std::size_t>(cur)] = 1;
    }
  }
}

MaskSlice TopologyMask::full() const {
  std::vector<std::size_t> all(n_);
  std::iota(all.begin(), all.end(), std::size_t{0});
  return MaskSlice(*this, std::move(all));
}

MaskSlice::MaskSlice(const TopologyMask& mask, std::vector<std::size_t> active)
    : mask_(&mask), active_(std::move(active)) {
  for (std::size_t a = 0; a < active_.size(); ++a) {
    if (active_[a] >= mask.size() || (a > 0 && active_[a] <= active_[a - 1])) {
      throw ArgumentError("slice indices must be sorted, unique and inside the mask");
    }
  }
}

TopologyMask build_topology_mask(const TokenTree& tree) { return TopologyMask(tree); }

MaskSlice slice_mask(const TopologyMask& full, int active_depth, const TokenTree& tree) {
  if (active_depth < 1) throw ArgumentError("active_depth must be positive");
  if (active_depth > tree.max_depth()) {
    throw ArgumentError(fmt::format("active_depth {} exceeds tree depth {}", active_depth, tree.max_depth()));
  }
  if (full.size() != tree.size()) throw ConfigError("mask and tree sizes differ");
  std::vector<std::size_t> active(tree.count_up_to_depth(active_depth));
  std::iota(active.begin(), active.end(), std::size_t{0});
  return MaskSlice(full, std::move(active));
}

bool same_cells(const MaskSlice& slice, const TopologyMask& mask) {
  if (slice.size() != mask.size()) return false;
  for (std::size_t r = 0; r < mask.size(); ++r) {
    for (std::size_t c = 0; c < mask.size(); ++c) {
      if (slice(r, c) != mask(r, c)) return false;
    }
  }
  return true;
}

}  // namespace mcsd
