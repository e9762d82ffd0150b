#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "footprint.hpp"
#include "isa.hpp"
#include "machine.hpp"

namespace bpfopt {

// Byte windows a piece of code can touch, per region; sizes the materialized
// memory of generated input states.
struct RegionWindows {
    struct Window {
        int16_t region;
        int64_t lo, hi;
    };
    std::vector<Window> windows;

    void widen(int16_t region, int64_t lo, int64_t hi);
    const Window* find(int16_t region) const;
};

// Windows covering the accesses of `insns` (variable offsets padded by
// `var_margin`) and the live-out bytes. Stack windows are clamped to the
// architectural [-512, 0).
RegionWindows derive_windows(std::span<const Instruction> insns, const RegTypeMap& entry,
                             const Footprint& live_out, int64_t var_margin = 64);

// Scalar registers that flow into pointer arithmetic; generated states keep
// them small so accesses stay inside materialized windows.
std::vector<uint8_t> addressing_scalars(std::span<const Instruction> insns,
                                        const RegTypeMap& entry);

// Seeded generator of input machine states.
class StateGen {
  public:
    explicit StateGen(uint64_t seed) : rng_(seed) {}

    uint64_t interesting_u64();
    MachineState make(const RegTypeMap& entry, const RegionWindows& windows,
                      std::span<const uint8_t> addressing_regs);

    std::mt19937_64& rng() { return rng_; }

  private:
    std::mt19937_64 rng_;
};

}  // namespace bpfopt
