#include "fuzz.hpp"

#include <algorithm>

#include "testgen.hpp"

namespace bpfopt::fuzz {

uint64_t interesting_u64(std::mt19937_64& rng) {
    StateGen g(rng());
    return g.interesting_u64();
}

std::vector<Instruction> random_block(std::mt19937_64& rng, int min_len, int max_len,
                                      bool with_memory) {
    const int len = min_len + static_cast<int>(rng() % (max_len - min_len + 1));
    std::vector<Instruction> out;
    std::vector<int64_t> written_stack;  // aligned offsets holding u64 values

    auto reg = [&rng]() { return static_cast<uint8_t>(rng() % 6); };
    const AluOp ops[] = {AluOp::Mov, AluOp::Add, AluOp::Sub, AluOp::Mul,  AluOp::Div,
                         AluOp::Mod, AluOp::And, AluOp::Or,  AluOp::Xor,  AluOp::Lsh,
                         AluOp::Rsh, AluOp::Arsh};

    for (int i = 0; i < len; i++) {
        int kind = static_cast<int>(rng() % (with_memory ? 8 : 5));
        switch (kind) {
        case 0: out.push_back(make_alu64(ops[rng() % 12], reg(), reg())); break;
        case 1: {
            AluOp op = ops[rng() % 12];
            int32_t imm = static_cast<int32_t>(rng());
            if (op == AluOp::Lsh || op == AluOp::Rsh || op == AluOp::Arsh) imm &= 63;
            out.push_back(make_alu64_imm(op, reg(), imm));
            break;
        }
        case 2: {
            AluOp op = ops[rng() % 12];
            int32_t imm = static_cast<int32_t>(rng());
            if (op == AluOp::Lsh || op == AluOp::Rsh || op == AluOp::Arsh) imm &= 31;
            out.push_back(make_alu32_imm(op, reg(), imm));
            break;
        }
        case 3: out.push_back(make_alu32(ops[rng() % 12], reg(), reg())); break;
        case 4: out.push_back(rng() % 2 ? make_neg64(reg()) : make_neg32(reg())); break;
        case 5:
        case 6: {  // store to an aligned stack slot
            const uint8_t widths[] = {1, 2, 4, 8};
            uint8_t w = widths[rng() % 4];
            int64_t off = -8 * (1 + static_cast<int64_t>(rng() % 8));
            if (rng() % 2) {
                out.push_back(make_store(w, kFramePointer, static_cast<int16_t>(off), reg()));
            } else {
                out.push_back(make_store_imm(w, kFramePointer, static_cast<int16_t>(off),
                                             static_cast<int32_t>(rng())));
            }
            if (w == 8) written_stack.push_back(off);
            break;
        }
        case 7: {  // load, only from a fully written slot
            if (written_stack.empty()) {
                out.push_back(make_alu64_imm(AluOp::Mov, reg(), static_cast<int32_t>(rng())));
                break;
            }
            int64_t off = written_stack[rng() % written_stack.size()];
            const uint8_t widths[] = {1, 2, 4, 8};
            out.push_back(make_load(widths[rng() % 4], reg(), kFramePointer,
                                    static_cast<int16_t>(off)));
            break;
        }
        }
    }
    for (size_t i = 0; i < out.size(); i++) out[i].origin = static_cast<int32_t>(i);
    return out;
}

MachineState random_state(std::mt19937_64& rng, const RegTypeMap& entry,
                          std::span<const Instruction> insns) {
    StateGen gen(rng());
    Footprint none;
    RegionWindows win = derive_windows(insns, entry, none);
    return gen.make(entry, win, addressing_scalars(insns, entry));
}

}  // namespace bpfopt::fuzz
