#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace bpfopt {

constexpr uint8_t kNumRegs = 11;
constexpr uint8_t kFramePointer = 10;

enum class InsnKind : uint8_t {
    Alu64,
    Alu32,
    Load,      // LDX: rD = *(uW *)(rS + off)
    Store,     // STX: *(uW *)(rD + off) = rS
    StoreImm,  // ST:  *(uW *)(rD + off) = imm
    Opaque,    // control flow kept as a block delimiter, passed through untouched
};

enum class AluOp : uint8_t {
    Mov,
    Add,
    Sub,
    Mul,
    Div,
    Mod,
    And,
    Or,
    Xor,
    Lsh,
    Rsh,
    Arsh,
    Neg,
};

const char* alu_op_name(AluOp op);

struct Instruction {
    InsnKind kind = InsnKind::Alu64;
    AluOp alu = AluOp::Mov;
    bool src_is_imm = false;  // ALU/MOV source form; NEG is always immediate-form
    uint8_t dst = 0;          // destination register, or base register for stores
    uint8_t src = 0;          // source register (register forms, load base)
    int16_t off = 0;          // byte offset, memory ops only
    uint8_t width = 0;        // access width in bytes {1,2,4,8}, memory ops only
    int32_t imm = 0;          // immediate payload (ALU imm forms and ST)
    int32_t origin = -1;      // index into the original program; -1 for synthesized
    uint64_t raw = 0;         // raw wire bits for opaque instructions read from binary
    std::string opaque_text;  // source text for opaque instructions read from assembly

    bool is_alu() const { return kind == InsnKind::Alu64 || kind == InsnKind::Alu32; }
    bool is_mem() const {
        return kind == InsnKind::Load || kind == InsnKind::Store || kind == InsnKind::StoreImm;
    }
    bool is_store() const { return kind == InsnKind::Store || kind == InsnKind::StoreImm; }
    bool is_opaque() const { return kind == InsnKind::Opaque; }

    // Register written by this instruction, if any (stores and opaques write none).
    std::optional<uint8_t> def_reg() const;
    // Registers read, in operand order. NEG and non-MOV ALU ops read dst.
    void read_regs(std::array<uint8_t, 3>& out, int& n) const;
    bool reads_reg(uint8_t r) const;

    // Structural equality; origin provenance is not part of instruction identity.
    bool operator==(const Instruction& other) const;

    // Returns a description of the first violated invariant, or nullopt if valid.
    std::optional<std::string> invalid_reason() const;
};

// Validating factories: throw std::invalid_argument when an invariant is violated.
Instruction make_alu64(AluOp op, uint8_t dst, uint8_t src);
Instruction make_alu64_imm(AluOp op, uint8_t dst, int32_t imm);
Instruction make_alu32(AluOp op, uint8_t dst, uint8_t src);
Instruction make_alu32_imm(AluOp op, uint8_t dst, int32_t imm);
Instruction make_neg64(uint8_t dst);
Instruction make_neg32(uint8_t dst);
Instruction make_load(uint8_t width, uint8_t dst, uint8_t base, int16_t off);
Instruction make_store(uint8_t width, uint8_t base, int16_t off, uint8_t src);
Instruction make_store_imm(uint8_t width, uint8_t base, int16_t off, int32_t imm);
Instruction make_opaque(std::string text);

struct Block {
    int32_t start = 0;  // first instruction index
    int32_t end = 0;    // one past the last instruction index
    int32_t size() const { return end - start; }
};

struct Program {
    std::vector<Instruction> insns;
    std::vector<Block> blocks;  // disjoint, ordered, cover all non-opaque instructions

    static Program from_instructions(std::vector<Instruction> insns);
    bool operator==(const Program& other) const;
};

uint64_t hash_instruction(const Instruction& insn, uint64_t seed = 0x9e3779b97f4a7c15ull);
uint64_t hash_instructions(std::span<const Instruction> insns);

}  // namespace bpfopt
