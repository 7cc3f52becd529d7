#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "mcsd/tree/token_tree.hpp"

namespace mcsd {

class MaskSlice;

/// Ancestor-or-self reachability over a token tree: (row j, col i) is set iff
/// node i lies on the root-to-j path.
class TopologyMask {
 public:
  TopologyMask() = default;
  explicit TopologyMask(const TokenTree& tree);

  std::size_t size() const noexcept { return n_; }
  std::size_t cells() const noexcept { return n_ * n_; }
  bool operator()(std::size_t row, std::size_t col) const { return bits_[row * n_ + col] != 0; }

  /// A view over every node.
  MaskSlice full() const;

 private:
  std::size_t n_ = 0;
  std::vector<std::uint8_t> bits_;
};

/// Index-mapped view into a TopologyMask: slice(a, b) = mask(active[a], active[b]).
/// The slice does not own the mask; it must not outlive it.
class MaskSlice {
 public:
  MaskSlice(const TopologyMask& mask, std::vector<std::size_t> active);

  std::size_t size() const noexcept { return active_.size(); }
  bool operator()(std::size_t row, std::size_t col) const { return (*mask_)(active_[row], active_[col]); }
  std::span<const std::size_t> active() const noexcept { return active_; }
  const TopologyMask& mask() const noexcept { return *mask_; }

 private:
  const TopologyMask* mask_;
  std::vector<std::size_t> active_;
};

TopologyMask build_topology_mask(const TokenTree& tree);

/// Submask over nodes with depth <= active_depth. Throws ArgumentError for
/// depth 0 or beyond the tree's maximum depth.
MaskSlice slice_mask(const TopologyMask& full, int active_depth, const TokenTree& tree);

/// Cell-for-cell equality between a slice and a standalone mask.
bool same_cells(const MaskSlice& slice, const TopologyMask& mask);

}  // namespace mcsd
