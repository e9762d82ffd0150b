#include "encoding.hpp"

namespace bpfopt {

namespace {

constexpr uint8_t kClassLdx = 0x01;
constexpr uint8_t kClassSt = 0x02;
constexpr uint8_t kClassStx = 0x03;
constexpr uint8_t kClassAlu32 = 0x04;
constexpr uint8_t kClassJmp = 0x05;
constexpr uint8_t kClassJmp32 = 0x06;
constexpr uint8_t kClassAlu64 = 0x07;
constexpr uint8_t kModeMem = 0x60;
constexpr uint8_t kSrcReg = 0x08;

uint8_t alu_code(AluOp op) {
    switch (op) {
    case AluOp::Add: return 0x00;
    case AluOp::Sub: return 0x10;
    case AluOp::Mul: return 0x20;
    case AluOp::Div: return 0x30;
    case AluOp::Or: return 0x40;
    case AluOp::And: return 0x50;
    case AluOp::Lsh: return 0x60;
    case AluOp::Rsh: return 0x70;
    case AluOp::Neg: return 0x80;
    case AluOp::Mod: return 0x90;
    case AluOp::Xor: return 0xa0;
    case AluOp::Mov: return 0xb0;
    case AluOp::Arsh: return 0xc0;
    }
    return 0xff;
}

uint8_t size_code(uint8_t width) {
    switch (width) {
    case 4: return 0x00;  // BPF_W
    case 2: return 0x08;  // BPF_H
    case 1: return 0x10;  // BPF_B
    case 8: return 0x18;  // BPF_DW
    }
    return 0xff;
}

uint8_t width_of_size_code(uint8_t code) {
    switch (code & 0x18) {
    case 0x00: return 4;
    case 0x08: return 2;
    case 0x10: return 1;
    default: return 8;
    }
}

std::array<uint8_t, 8> pack(uint8_t opcode, uint8_t dst, uint8_t src, int16_t off, int32_t imm) {
    std::array<uint8_t, 8> b{};
    b[0] = opcode;
    b[1] = static_cast<uint8_t>((dst & 0x0f) | (src << 4));
    const auto uoff = static_cast<uint16_t>(off);
    b[2] = static_cast<uint8_t>(uoff & 0xff);
    b[3] = static_cast<uint8_t>(uoff >> 8);
    const auto uimm = static_cast<uint32_t>(imm);
    b[4] = static_cast<uint8_t>(uimm & 0xff);
    b[5] = static_cast<uint8_t>((uimm >> 8) & 0xff);
    b[6] = static_cast<uint8_t>((uimm >> 16) & 0xff);
    b[7] = static_cast<uint8_t>((uimm >> 24) & 0xff);
    return b;
}

}  // namespace

std::array<uint8_t, 8> encode(const Instruction& insn) {
    switch (insn.kind) {
    case InsnKind::Alu64:
    case InsnKind::Alu32: {
        uint8_t cls = insn.kind == InsnKind::Alu64 ? kClassAlu64 : kClassAlu32;
        uint8_t op = static_cast<uint8_t>(cls | alu_code(insn.alu));
        if (insn.alu == AluOp::Neg) return pack(op, insn.dst, 0, 0, 0);
        if (insn.src_is_imm) return pack(op, insn.dst, 0, 0, insn.imm);
        return pack(static_cast<uint8_t>(op | kSrcReg), insn.dst, insn.src, 0, 0);
    }
    case InsnKind::Load:
        return pack(static_cast<uint8_t>(kClassLdx | kModeMem | size_code(insn.width)), insn.dst,
                    insn.src, insn.off, 0);
    case InsnKind::Store:
        return pack(static_cast<uint8_t>(kClassStx | kModeMem | size_code(insn.width)), insn.dst,
                    insn.src, insn.off, 0);
    case InsnKind::StoreImm:
        return pack(static_cast<uint8_t>(kClassSt | kModeMem | size_code(insn.width)), insn.dst, 0,
                    insn.off, insn.imm);
    case InsnKind::Opaque: {
        if (insn.raw == 0) throw EncodeError("opaque instruction has no wire representation");
        std::array<uint8_t, 8> b{};
        uint64_t v = insn.raw;
        for (int i = 0; i < 8; i++) b[i] = static_cast<uint8_t>(v >> (8 * i));
        return b;
    }
    }
    throw EncodeError("unreachable");
}

Instruction decode(std::span<const uint8_t, 8> b) {
    const uint8_t opcode = b[0];
    const uint8_t cls = opcode & 0x07;
    const uint8_t dst = b[1] & 0x0f;
    const uint8_t src = b[1] >> 4;
    const auto off = static_cast<int16_t>(static_cast<uint16_t>(b[2] | (b[3] << 8)));
    const auto imm = static_cast<int32_t>(static_cast<uint32_t>(b[4]) | (static_cast<uint32_t>(b[5]) << 8) |
                                          (static_cast<uint32_t>(b[6]) << 16) |
                                          (static_cast<uint32_t>(b[7]) << 24));

    auto checked = [&](Instruction insn) {
        if (auto reason = insn.invalid_reason()) throw UnknownOpcodeError(opcode);
        return insn;
    };

    if (cls == kClassAlu64 || cls == kClassAlu32) {
        AluOp op;
        switch (opcode & 0xf0) {
        case 0x00: op = AluOp::Add; break;
        case 0x10: op = AluOp::Sub; break;
        case 0x20: op = AluOp::Mul; break;
        case 0x30: op = AluOp::Div; break;
        case 0x40: op = AluOp::Or; break;
        case 0x50: op = AluOp::And; break;
        case 0x60: op = AluOp::Lsh; break;
        case 0x70: op = AluOp::Rsh; break;
        case 0x80: op = AluOp::Neg; break;
        case 0x90: op = AluOp::Mod; break;
        case 0xa0: op = AluOp::Xor; break;
        case 0xb0: op = AluOp::Mov; break;
        case 0xc0: op = AluOp::Arsh; break;
        default: throw UnknownOpcodeError(opcode);  // 0xd0 is END (byte swap)
        }
        Instruction insn;
        insn.kind = cls == kClassAlu64 ? InsnKind::Alu64 : InsnKind::Alu32;
        insn.alu = op;
        insn.dst = dst;
        if (op == AluOp::Neg) {
            insn.src_is_imm = true;
            return checked(insn);
        }
        if (opcode & kSrcReg) {
            insn.src = src;
        } else {
            insn.src_is_imm = true;
            insn.imm = imm;
        }
        return checked(insn);
    }
    if ((cls == kClassLdx || cls == kClassStx || cls == kClassSt) && (opcode & 0xe0) == kModeMem) {
        const uint8_t w = width_of_size_code(opcode);
        Instruction insn;
        insn.width = w;
        insn.off = off;
        if (cls == kClassLdx) {
            insn.kind = InsnKind::Load;
            insn.dst = dst;
            insn.src = src;
        } else if (cls == kClassStx) {
            insn.kind = InsnKind::Store;
            insn.dst = dst;
            insn.src = src;
        } else {
            insn.kind = InsnKind::StoreImm;
            insn.dst = dst;
            insn.imm = imm;
        }
        return checked(insn);
    }
    throw UnknownOpcodeError(opcode);
}

std::vector<uint8_t> encode_program(const Program& p) {
    std::vector<uint8_t> out;
    out.reserve(p.insns.size() * 8);
    for (const auto& insn : p.insns) {
        auto b = encode(insn);
        out.insert(out.end(), b.begin(), b.end());
    }
    return out;
}

Program decode_program(std::span<const uint8_t> bytes) {
    if (bytes.size() % 8 != 0) throw EncodeError("program length is not a multiple of 8");
    std::vector<Instruction> insns;
    for (size_t i = 0; i < bytes.size(); i += 8) {
        std::span<const uint8_t, 8> rec(bytes.data() + i, 8);
        const uint8_t cls = rec[0] & 0x07;
        Instruction insn;
        if (cls == kClassJmp || cls == kClassJmp32) {
            uint64_t raw = 0;
            for (int k = 0; k < 8; k++) raw |= static_cast<uint64_t>(rec[k]) << (8 * k);
            insn = make_opaque("raw 0x" + [](uint64_t v) {
                char buf[17];
                for (int j = 15; j >= 0; j--) {
                    buf[15 - j] = "0123456789abcdef"[(v >> (4 * j)) & 0xf];
                }
                buf[16] = 0;
                return std::string(buf);
            }(raw));
            insn.raw = raw;
        } else {
            insn = decode(rec);
        }
        insn.origin = static_cast<int32_t>(insns.size());
        insns.push_back(std::move(insn));
    }
    return Program::from_instructions(std::move(insns));
}

}  // namespace bpfopt
