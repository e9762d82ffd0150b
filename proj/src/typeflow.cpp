#include "typeflow.hpp"

namespace bpfopt {

TypeFlow TypeFlow::from_entry(const RegTypeMap& entry) {
    TypeFlow tf;
    for (uint8_t r = 0; r < kNumRegs; r++) {
        tf.regs[r].type = entry.type[r];
        tf.regs[r].region = entry.region[r];
        tf.regs[r].init = entry.type[r] != RegType::Uninit;
    }
    return tf;
}

RegTypeMap TypeFlow::reg_types() const {
    RegTypeMap m;
    for (uint8_t r = 0; r < kNumRegs; r++) m.set(r, regs[r].type, regs[r].region);
    return m;
}

std::optional<TypeFlow::Access> TypeFlow::access(const Instruction& insn) const {
    if (!insn.is_mem()) return std::nullopt;
    const uint8_t base = insn.kind == InsnKind::Load ? insn.src : insn.dst;
    Access a;
    a.width = insn.width;
    a.is_store = insn.is_store();
    if (is_pointer(base)) {
        a.region = regs[base].region;
        a.const_off = regs[base].const_off + insn.off;
        a.var_off = regs[base].var_off;
    }
    return a;
}

void TypeFlow::apply(const Instruction& insn) {
    switch (insn.kind) {
    case InsnKind::Opaque:
    case InsnKind::Store:
    case InsnKind::StoreImm: return;

    case InsnKind::Load:
        regs[insn.dst] = {RegType::Scalar, -1, 0, false, true};
        return;

    case InsnKind::Alu32:
        regs[insn.dst] = {RegType::Scalar, -1, 0, false, true};
        return;

    case InsnKind::Alu64: {
        RegInfo& d = regs[insn.dst];
        if (insn.alu == AluOp::Neg) {
            d = {RegType::Scalar, -1, 0, false, true};
            return;
        }
        if (insn.alu == AluOp::Mov) {
            if (insn.src_is_imm) {
                d = {RegType::Scalar, -1, 0, false, true};
            } else {
                d = regs[insn.src];
                d.init = true;
            }
            return;
        }
        const bool dptr = is_pointer(insn.dst);
        const bool sptr = !insn.src_is_imm && is_pointer(insn.src);
        if (insn.alu == AluOp::Add && dptr && !sptr) {
            if (insn.src_is_imm) {
                d.const_off += insn.imm;
            } else {
                d.var_off = true;
            }
            d.init = true;
            return;
        }
        if (insn.alu == AluOp::Add && !dptr && sptr) {
            RegInfo s = regs[insn.src];
            s.var_off = true;  // the old scalar dst folds in as a variable amount
            s.init = true;
            d = s;
            return;
        }
        if (insn.alu == AluOp::Sub && dptr && !sptr) {
            if (insn.src_is_imm) {
                d.const_off -= insn.imm;
            } else {
                d.var_off = true;
            }
            d.init = true;
            return;
        }
        d = {RegType::Scalar, -1, 0, false, true};
        return;
    }
    }
}

}  // namespace bpfopt
