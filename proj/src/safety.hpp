#pragma once

#include <span>
#include <string>
#include <vector>

#include "isa.hpp"
#include "machine.hpp"

namespace bpfopt {

// Verifier rule identifiers; the registry is open for extension.
namespace safety_rule {
inline constexpr const char* kAlignment = "alignment";
inline constexpr const char* kCtxImmStore = "ctx-imm-store";
inline constexpr const char* kUninitRead = "uninit-read";
inline constexpr const char* kFrameWrite = "frame-pointer-write";
inline constexpr const char* kStackOob = "stack-oob";
inline constexpr const char* kPtrArith = "pointer-arith";
inline constexpr const char* kScalarDeref = "scalar-deref";
inline constexpr const char* kOpcode = "opcode";
}  // namespace safety_rule

struct SafetyViolation {
    std::string rule;
    int pc;
    std::string message;
};

struct SafetyVerdict {
    std::vector<SafetyViolation> violations;
    bool ok() const { return violations.empty(); }
    std::string to_string() const;
};

// Static checks mirroring the kernel verifier's per-instruction validation
// over straight-line code: natural alignment of memory accesses, no
// immediate stores through context pointers, initialized reads only, no
// frame pointer writes, stack bounds, pointer arithmetic discipline, and
// opcode legality. Flow-sensitive over a forward type/init dataflow.
SafetyVerdict check_safety(std::span<const Instruction> insns, const RegTypeMap& entry_types);

}  // namespace bpfopt
