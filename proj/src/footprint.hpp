#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "machine.hpp"

namespace bpfopt {

// Live-out byte set of one region. `whole_region` marks regions whose live
// bytes cannot be bounded statically (variable-offset accesses).
struct MemFootprint {
    int16_t region = 0;
    bool whole_region = false;
    std::vector<int64_t> offsets;  // sorted, unique; unused when whole_region

    bool operator==(const MemFootprint&) const = default;
};

// Live-out descriptor: the registers and memory bytes observed after a slice
// or block. Equivalence and the distance metric are both relative to this.
struct Footprint {
    uint16_t reg_mask = 0;
    std::vector<MemFootprint> mem;  // sorted by region id

    void add_reg(uint8_t r) { reg_mask |= uint16_t(1) << r; }
    bool has_reg(uint8_t r) const { return reg_mask & (uint16_t(1) << r); }
    void add_mem_byte(int16_t region, int64_t off);
    void add_mem_range(int16_t region, int64_t off, int64_t len);
    void mark_whole_region(int16_t region);
    bool empty() const { return reg_mask == 0 && mem.empty(); }
    std::vector<uint8_t> regs() const;
    std::string to_string() const;

    bool operator==(const Footprint&) const = default;
};

// Projection equality over the footprint. Register equality requires matching
// init flags, values, and pointer tags; byte equality requires matching init
// flags and values.
bool footprint_equal(const Footprint& fp, const MachineState& a, const RegTypeMap& ta,
                     const MachineState& b, const RegTypeMap& tb);

// Describes the first differing footprint element, for diagnostics.
std::string footprint_diff(const Footprint& fp, const MachineState& a, const RegTypeMap& ta,
                           const MachineState& b, const RegTypeMap& tb);

// Admissible lower bound on the number of instructions needed to transform
// `s` into `t` over the footprint: one per differing register plus, per
// region, the minimal number of 8-byte store windows covering all differing
// bytes (ceil(len/8) for a contiguous run).
int distance(const MachineState& s, const RegTypeMap& ts, const MachineState& t,
             const RegTypeMap& tt, const Footprint& fp);

}  // namespace bpfopt
