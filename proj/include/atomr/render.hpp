#pragma once

#include "atomr/tree.hpp"

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace atomr {

/// Every truncated chain carries exactly one line starting with this.
inline constexpr std::string_view kElisionMarker = "[... elided ";

inline constexpr std::size_t kUnlimitedBudget = static_cast<std::size_t>(-1);

/// Deterministic outline of the whole tree: the problem, then every chain in
/// creation order with its status. Non-active chains show their summary when
/// one exists. When the text exceeds `budget` bytes, nodes are elided
/// oldest-first, non-active chains before the active one, and the active
/// chain always keeps its last three nodes.
std::string render_tree(const AtomicTree& tree, std::size_t budget = kUnlimitedBudget);

/// The given nodes as consecutive "Step k" blocks (k one-based).
std::string render_steps(const AtomicTree& tree, const std::vector<NodeId>& path);

/// One-based step number of the first node of `chain` on its own path.
std::size_t first_step_number(const AtomicTree& tree, ChainId chain);

}  // namespace atomr
