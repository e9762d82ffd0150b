#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "isa.hpp"

namespace bpfopt {

// Memory region identifiers. Region ids are anchored to the entry pointer
// registers: the stack for r10, the context for r1, and numbered regions for
// other entry pointers.
constexpr int16_t kStackRegion = 0;
constexpr int16_t kCtxRegion = 1;
constexpr int16_t kFirstMemRegion = 2;

constexpr int64_t kStackLo = -512;
constexpr int64_t kStackHi = 0;
constexpr int64_t kDefaultRegionExtent = 4096;

std::string region_name(int16_t id);
std::optional<int16_t> region_id_from_name(std::string_view name);

enum class RegType : uint8_t { Uninit, Scalar, PtrStack, PtrCtx, PtrMem };

struct RegTypeMap {
    std::array<RegType, kNumRegs> type{};
    std::array<int16_t, kNumRegs> region{};  // meaningful for pointer types

    RegTypeMap() {
        type.fill(RegType::Uninit);
        region.fill(-1);
        set(kFramePointer, RegType::PtrStack);
    }

    void set(uint8_t r, RegType t, int16_t reg_region = -1) {
        type[r] = t;
        switch (t) {
        case RegType::PtrStack: region[r] = kStackRegion; break;
        case RegType::PtrCtx: region[r] = kCtxRegion; break;
        case RegType::PtrMem: region[r] = reg_region; break;
        default: region[r] = -1; break;
        }
    }
    bool is_pointer(uint8_t r) const {
        return type[r] == RegType::PtrStack || type[r] == RegType::PtrCtx ||
               type[r] == RegType::PtrMem;
    }
    bool operator==(const RegTypeMap&) const = default;

    // All registers scalar except the frame pointer; the common fuzzing entry.
    static RegTypeMap all_scalar();
    // r1 context pointer, r10 stack, the rest scalar; the default program entry.
    static RegTypeMap default_entry();
};

// A dense byte window [lo, hi) of one region. Bytes outside the window are
// out of bounds for the interpreter even if the architectural region is
// larger; test generation sizes windows to cover everything a program can
// legally touch.
struct MemRegion {
    int16_t id = 0;
    int64_t lo = 0;
    int64_t hi = 0;
    std::vector<uint8_t> bytes;
    std::vector<uint8_t> init;

    static MemRegion make(int16_t id, int64_t lo, int64_t hi);
    bool contains(int64_t off, int64_t len = 1) const { return off >= lo && off + len <= hi; }
    uint8_t byte(int64_t off) const { return bytes[static_cast<size_t>(off - lo)]; }
    bool is_init(int64_t off) const { return init[static_cast<size_t>(off - lo)] != 0; }
    void set_byte(int64_t off, uint8_t v) {
        bytes[static_cast<size_t>(off - lo)] = v;
        init[static_cast<size_t>(off - lo)] = 1;
    }
    bool operator==(const MemRegion&) const = default;
};

struct MachineState {
    std::array<uint64_t, kNumRegs> regs{};
    std::array<uint8_t, kNumRegs> reg_init{};
    std::vector<MemRegion> mem;

    MemRegion* find_region(int16_t id);
    const MemRegion* find_region(int16_t id) const;
    MemRegion& ensure_region(int16_t id, int64_t lo, int64_t hi);
    void set_reg(uint8_t r, uint64_t v) {
        regs[r] = v;
        reg_init[r] = 1;
    }
    bool operator==(const MachineState&) const = default;
};

struct Fault {
    enum class Kind : uint8_t { UninitRead, OutOfBounds, BadRegion };
    Kind kind;
    int pc;
    std::string to_string() const;
};

struct RunResult {
    std::optional<Fault> fault;
    MachineState state;
    RegTypeMap types;  // final register types; forced-scalar results included
    bool ok() const { return !fault.has_value(); }
};

// Executes one instruction in place. Returns a fault or nullopt.
// `types` tracks dynamic register tags and is updated alongside the state.
std::optional<Fault> step(MachineState& s, RegTypeMap& types, const Instruction& insn, int pc);

// Reference interpreter over straight-line subset instructions.
RunResult interpret(std::span<const Instruction> insns, MachineState s0, RegTypeMap entry_types);

// State snapshot text format:
//   rN = 0xHEX
//   type rN = scalar|stack|ctx|memK
//   mem REGION[LO..HI) = hexbytes
std::string state_to_text(const MachineState& s, const RegTypeMap& types);
void state_from_text(std::string_view text, MachineState& s, RegTypeMap& types);

}  // namespace bpfopt
