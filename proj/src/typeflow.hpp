#pragma once

#include <array>
#include <cstdint>
#include <optional>

#include "isa.hpp"
#include "machine.hpp"

namespace bpfopt {

// Flow-sensitive static register facts over straight-line code: pointer tag,
// region, accumulated constant offset and whether a runtime-variable amount
// has been folded in. Path-insensitive is enough with no branches.
struct TypeFlow {
    struct RegInfo {
        RegType type = RegType::Uninit;
        int16_t region = -1;
        int64_t const_off = 0;  // statically known offset displacement
        bool var_off = false;   // a scalar with unknown value was added
        bool init = false;
    };

    std::array<RegInfo, kNumRegs> regs;

    static TypeFlow from_entry(const RegTypeMap& entry);
    RegTypeMap reg_types() const;

    bool is_pointer(uint8_t r) const {
        RegType t = regs[r].type;
        return t == RegType::PtrStack || t == RegType::PtrCtx || t == RegType::PtrMem;
    }

    struct Access {
        int16_t region = -1;   // -1 when the base is not a known pointer
        int64_t const_off = 0; // base const_off + instruction offset
        bool var_off = false;
        uint8_t width = 0;
        bool is_store = false;
    };

    // Static view of a memory instruction's access, before applying it.
    std::optional<Access> access(const Instruction& insn) const;

    // Updates facts as if the instruction executed.
    void apply(const Instruction& insn);
};

}  // namespace bpfopt
