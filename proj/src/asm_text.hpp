#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include "isa.hpp"

namespace bpfopt {

// Malformed statement: the line cannot be read as any known shape.
struct AsmSyntaxError : std::runtime_error {
    int line;
    AsmSyntaxError(int line_, const std::string& reason)
        : std::runtime_error("line " + std::to_string(line_) + ": " + reason), line(line_) {}
};

// Recognized instruction shape outside the supported subset (lddw, atomics, byte swap).
struct AsmUnsupportedError : std::runtime_error {
    int line;
    AsmUnsupportedError(int line_, const std::string& what)
        : std::runtime_error("line " + std::to_string(line_) + ": unsupported instruction: " + what),
          line(line_) {}
};

// Parses kernel-disassembly style assembly. Statements are newline separated;
// comments start with '#' or ';'. Jumps, calls and exit are stored opaquely and
// delimit basic blocks. Assigns origin provenance by statement order.
Program parse_asm(std::string_view text);

std::string print_insn(const Instruction& insn);
std::string print_asm(const Program& p);

}  // namespace bpfopt
