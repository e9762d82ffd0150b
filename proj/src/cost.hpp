#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <string>

#include "isa.hpp"

namespace bpfopt {

// Instruction classes for latency accounting.
enum class OpClass : uint8_t { Alu64, Alu32, Ldx, Stx, St };

const char* op_class_name(OpClass c);
OpClass op_class(const Instruction& insn);

struct MissingLatencyError : std::runtime_error {
    explicit MissingLatencyError(OpClass c)
        : std::runtime_error(std::string("latency table has no entry for ") + op_class_name(c)) {}
};

// Size mode charges one unit per instruction; latency mode sums per-class
// latencies. Latencies are held in integer picoseconds so comparisons and
// totals are exact.
struct CostModel {
    enum class Mode : uint8_t { Size, Latency };
    Mode mode = Mode::Size;
    std::map<OpClass, int64_t> latency_ps;

    static CostModel size();
    static CostModel latency(std::map<OpClass, int64_t> table);
    // Parses lines `OPCLASS <nanoseconds>`; comments start with '#'.
    static CostModel latency_from_file(const std::string& path);

    int64_t insn_cost(const Instruction& insn) const;
    int64_t min_insn_cost() const;
};

int64_t cost_of(std::span<const Instruction> insns, const CostModel& cost);

std::string format_cost(int64_t cost, const CostModel& cost_model);

}  // namespace bpfopt
