#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "isa.hpp"

namespace bpfopt {

struct UnknownOpcodeError : std::runtime_error {
    uint8_t opcode;
    explicit UnknownOpcodeError(uint8_t op)
        : std::runtime_error("unknown opcode 0x" + [](uint8_t b) {
              const char* hex = "0123456789abcdef";
              return std::string{hex[b >> 4], hex[b & 0xf]};
          }(op)),
          opcode(op) {}
};

struct EncodeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Standard 8-byte eBPF wire layout: opcode u8, dst|src packed nibbles,
// off i16 LE, imm i32 LE.
std::array<uint8_t, 8> encode(const Instruction& insn);
Instruction decode(std::span<const uint8_t, 8> bytes);

// Whole-program forms. Jump/call/exit records decode as opaque block
// delimiters with their raw bits preserved for byte-identical re-encoding.
std::vector<uint8_t> encode_program(const Program& p);
Program decode_program(std::span<const uint8_t> bytes);

}  // namespace bpfopt
