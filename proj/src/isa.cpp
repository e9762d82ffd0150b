#include "isa.hpp"

#include <stdexcept>

namespace bpfopt {

const char* alu_op_name(AluOp op) {
    switch (op) {
    case AluOp::Mov: return "MOV";
    case AluOp::Add: return "ADD";
    case AluOp::Sub: return "SUB";
    case AluOp::Mul: return "MUL";
    case AluOp::Div: return "DIV";
    case AluOp::Mod: return "MOD";
    case AluOp::And: return "AND";
    case AluOp::Or: return "OR";
    case AluOp::Xor: return "XOR";
    case AluOp::Lsh: return "LSH";
    case AluOp::Rsh: return "RSH";
    case AluOp::Arsh: return "ARSH";
    case AluOp::Neg: return "NEG";
    }
    return "?";
}

std::optional<uint8_t> Instruction::def_reg() const {
    switch (kind) {
    case InsnKind::Alu64:
    case InsnKind::Alu32:
    case InsnKind::Load: return dst;
    default: return std::nullopt;
    }
}

void Instruction::read_regs(std::array<uint8_t, 3>& out, int& n) const {
    n = 0;
    switch (kind) {
    case InsnKind::Alu64:
    case InsnKind::Alu32:
        if (alu == AluOp::Neg) {
            out[n++] = dst;
        } else {
            if (alu != AluOp::Mov) out[n++] = dst;
            if (!src_is_imm) out[n++] = src;
        }
        break;
    case InsnKind::Load: out[n++] = src; break;
    case InsnKind::Store:
        out[n++] = dst;
        out[n++] = src;
        break;
    case InsnKind::StoreImm: out[n++] = dst; break;
    case InsnKind::Opaque: break;
    }
}

bool Instruction::reads_reg(uint8_t r) const {
    std::array<uint8_t, 3> rs;
    int n = 0;
    read_regs(rs, n);
    for (int i = 0; i < n; i++) {
        if (rs[i] == r) return true;
    }
    return false;
}

bool Instruction::operator==(const Instruction& other) const {
    if (kind != other.kind) return false;
    if (kind == InsnKind::Opaque) return opaque_text == other.opaque_text && raw == other.raw;
    if (is_alu()) {
        if (alu != other.alu || dst != other.dst) return false;
        if (alu == AluOp::Neg) return true;
        if (src_is_imm != other.src_is_imm) return false;
        return src_is_imm ? imm == other.imm : src == other.src;
    }
    if (width != other.width || off != other.off || dst != other.dst) return false;
    if (kind == InsnKind::StoreImm) return imm == other.imm;
    return src == other.src;
}

std::optional<std::string> Instruction::invalid_reason() const {
    if (kind == InsnKind::Opaque) return std::nullopt;
    if (dst >= kNumRegs) return "dst register out of range";
    if (is_alu()) {
        if (dst == kFramePointer) return "r10 is read-only";
        if (alu == AluOp::Neg) return std::nullopt;
        if (!src_is_imm && src >= kNumRegs) return "src register out of range";
        if (src_is_imm && (alu == AluOp::Lsh || alu == AluOp::Rsh || alu == AluOp::Arsh)) {
            const int32_t max = kind == InsnKind::Alu64 ? 63 : 31;
            if (imm < 0 || imm > max) return "shift immediate out of range";
        }
        return std::nullopt;
    }
    if (width != 1 && width != 2 && width != 4 && width != 8) return "bad access width";
    if (kind == InsnKind::Load) {
        if (dst == kFramePointer) return "r10 is read-only";
        if (src >= kNumRegs) return "base register out of range";
    }
    if (kind == InsnKind::Store && src >= kNumRegs) return "src register out of range";
    return std::nullopt;
}

namespace {

Instruction checked(Instruction insn) {
    if (auto reason = insn.invalid_reason()) throw std::invalid_argument(*reason);
    return insn;
}

}  // namespace

Instruction make_alu64(AluOp op, uint8_t dst, uint8_t src) {
    Instruction i;
    i.kind = InsnKind::Alu64;
    i.alu = op;
    i.dst = dst;
    i.src = src;
    return checked(i);
}

Instruction make_alu64_imm(AluOp op, uint8_t dst, int32_t imm) {
    Instruction i;
    i.kind = InsnKind::Alu64;
    i.alu = op;
    i.src_is_imm = true;
    i.dst = dst;
    i.imm = imm;
    return checked(i);
}

Instruction make_alu32(AluOp op, uint8_t dst, uint8_t src) {
    Instruction i;
    i.kind = InsnKind::Alu32;
    i.alu = op;
    i.dst = dst;
    i.src = src;
    return checked(i);
}

Instruction make_alu32_imm(AluOp op, uint8_t dst, int32_t imm) {
    Instruction i;
    i.kind = InsnKind::Alu32;
    i.alu = op;
    i.src_is_imm = true;
    i.dst = dst;
    i.imm = imm;
    return checked(i);
}

Instruction make_neg64(uint8_t dst) {
    Instruction i;
    i.kind = InsnKind::Alu64;
    i.alu = AluOp::Neg;
    i.src_is_imm = true;
    i.dst = dst;
    return checked(i);
}

Instruction make_neg32(uint8_t dst) {
    Instruction i;
    i.kind = InsnKind::Alu32;
    i.alu = AluOp::Neg;
    i.src_is_imm = true;
    i.dst = dst;
    return checked(i);
}

Instruction make_load(uint8_t width, uint8_t dst, uint8_t base, int16_t off) {
    Instruction i;
    i.kind = InsnKind::Load;
    i.width = width;
    i.dst = dst;
    i.src = base;
    i.off = off;
    return checked(i);
}

Instruction make_store(uint8_t width, uint8_t base, int16_t off, uint8_t src) {
    Instruction i;
    i.kind = InsnKind::Store;
    i.width = width;
    i.dst = base;
    i.off = off;
    i.src = src;
    return checked(i);
}

Instruction make_store_imm(uint8_t width, uint8_t base, int16_t off, int32_t imm) {
    Instruction i;
    i.kind = InsnKind::StoreImm;
    i.width = width;
    i.dst = base;
    i.off = off;
    i.imm = imm;
    return checked(i);
}

Instruction make_opaque(std::string text) {
    Instruction i;
    i.kind = InsnKind::Opaque;
    i.opaque_text = std::move(text);
    return i;
}

Program Program::from_instructions(std::vector<Instruction> insns) {
    Program p;
    p.insns = std::move(insns);
    int32_t start = -1;
    for (int32_t i = 0; i < static_cast<int32_t>(p.insns.size()); i++) {
        if (p.insns[i].is_opaque()) {
            if (start >= 0) p.blocks.push_back({start, i});
            start = -1;
        } else if (start < 0) {
            start = i;
        }
    }
    if (start >= 0) p.blocks.push_back({start, static_cast<int32_t>(p.insns.size())});
    return p;
}

bool Program::operator==(const Program& other) const {
    return insns == other.insns;
}

namespace {

uint64_t mix64(uint64_t x) {
    x ^= x >> 33;
    x *= 0xff51afd7ed558ccdull;
    x ^= x >> 33;
    x *= 0xc4ceb9fe1a85ec53ull;
    x ^= x >> 33;
    return x;
}

}  // namespace

uint64_t hash_instruction(const Instruction& insn, uint64_t seed) {
    uint64_t h = seed;
    auto fold = [&h](uint64_t v) { h = mix64(h ^ mix64(v + 0x9e3779b97f4a7c15ull)); };
    fold(static_cast<uint64_t>(insn.kind));
    if (insn.kind == InsnKind::Opaque) {
        for (char c : insn.opaque_text) fold(static_cast<uint64_t>(static_cast<uint8_t>(c)));
        fold(insn.raw);
        return h;
    }
    if (insn.is_alu()) {
        fold(static_cast<uint64_t>(insn.alu));
        fold(insn.dst);
        if (insn.alu != AluOp::Neg) {
            fold(insn.src_is_imm);
            fold(insn.src_is_imm ? static_cast<uint64_t>(static_cast<uint32_t>(insn.imm))
                                 : insn.src);
        }
        return h;
    }
    fold(insn.dst);
    fold(insn.width);
    fold(static_cast<uint64_t>(static_cast<uint16_t>(insn.off)));
    if (insn.kind == InsnKind::StoreImm) {
        fold(static_cast<uint64_t>(static_cast<uint32_t>(insn.imm)));
    } else if (insn.kind == InsnKind::Store) {
        fold(insn.src);
    } else {
        fold(insn.src);
    }
    return h;
}

uint64_t hash_instructions(std::span<const Instruction> insns) {
    uint64_t h = 0x2545f4914f6cdd1dull;
    for (const auto& i : insns) h = hash_instruction(i, h);
    return h;
}

}  // namespace bpfopt
