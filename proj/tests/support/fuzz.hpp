#pragma once

#include <random>
#include <vector>

#include "footprint.hpp"
#include "isa.hpp"
#include "machine.hpp"
#include "slicer.hpp"

namespace bpfopt::fuzz {

// Random straight-line blocks over scalars r0..r5 and the stack, built so
// the interpreter never faults from an all-scalar entry: stack loads only
// read offsets written earlier in the block.
std::vector<Instruction> random_block(std::mt19937_64& rng, int min_len, int max_len,
                                      bool with_memory = true);

// Random input state matching entry types, materializing the region windows
// a block can touch. Scalars mix special values and full-range randoms.
MachineState random_state(std::mt19937_64& rng, const RegTypeMap& entry,
                          std::span<const Instruction> insns);

uint64_t interesting_u64(std::mt19937_64& rng);

}  // namespace bpfopt::fuzz
