#pragma once

#include <span>
#include <stdexcept>
#include <vector>

#include "slicer.hpp"

namespace bpfopt {

// Signals an ordering contradiction between optimized slices; impossible for
// untouched slices of one block, and treated as an internal error upstream.
struct CyclicDependencyError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RecomposeInput {
    const Slice* slice = nullptr;          // extraction metadata
    std::span<const Instruction> insns;    // current body (original or rewritten)
    bool optimized = false;
};

// Def-use-aware recomposition: builds intra- and cross-slice dependency
// edges, deduplicates identical instructions across slices (origin identity
// first, structural identity with matching producers otherwise), and emits a
// stable topological order. `block` is the original block the slices came
// from; it anchors the ordering of synthesized instructions.
std::vector<Instruction> recompose(std::span<const RecomposeInput> slices,
                                   std::span<const Instruction> block);

}  // namespace bpfopt
