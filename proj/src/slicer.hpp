#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "footprint.hpp"
#include "isa.hpp"
#include "machine.hpp"

namespace bpfopt {

struct MalformedBlockError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Packed destination identifier for store instructions:
// (offset << 8) | (width << 4) | base register.
int64_t mem_id(uint8_t base, int16_t off, uint8_t width_bytes);

// An optimization unit: the computation chain of one register or memory
// destination, dependency-closed over the enclosing block.
struct Slice {
    int64_t key = 0;        // destination register id, or mem_id for stores
    bool mem_keyed = false;
    std::vector<Instruction> insns;
    Footprint live_out;
    RegTypeMap entry_types;
    int32_t window_index = 0;  // chunk ordinal after window partitioning
    int32_t window_size = 0;
    int32_t first_pos = 0;  // block-local position of the first/last original
    int32_t last_pos = 0;   // instruction; orders slices and hazard edges

    std::vector<uint8_t> reg_universe() const;  // registers the slice mentions
};

// Per-position backward liveness over one block. live_at(i) describes what is
// observable at the program point *before* instruction i; live_at(size)
// equals the block's live-out.
struct BlockLiveness {
    std::vector<Footprint> at;
    const Footprint& after(int32_t pos) const { return at[pos + 1]; }
};

BlockLiveness compute_block_liveness(std::span<const Instruction> block,
                                     const Footprint& block_live_out,
                                     const RegTypeMap& entry_types);

// Conservative block-end default: r0..r9 live plus every byte the block
// writes (whole region when a store offset is not statically known).
Footprint default_block_live_out(std::span<const Instruction> block,
                                 const RegTypeMap& entry_types);

// Instruction slice extraction: builds per-destination computation chains,
// merges stores to adjacent byte ranges off the same base register, drops
// chains subsumed by a larger chain, then partitions by window size.
// Throws MalformedBlockError if the block contains control flow.
std::vector<Slice> extract_slices(std::span<const Instruction> block,
                                  const Footprint& block_live_out,
                                  const RegTypeMap& entry_types, int window);

}  // namespace bpfopt
