#include "safety.hpp"

#include <sstream>

#include "asm_text.hpp"
#include "typeflow.hpp"

namespace bpfopt {

std::string SafetyVerdict::to_string() const {
    if (ok()) return "safe";
    std::ostringstream out;
    for (size_t i = 0; i < violations.size(); i++) {
        if (i) out << "; ";
        out << violations[i].rule << " at pc " << violations[i].pc << ": "
            << violations[i].message;
    }
    return out.str();
}

SafetyVerdict check_safety(std::span<const Instruction> insns, const RegTypeMap& entry_types) {
    SafetyVerdict verdict;
    TypeFlow tf = TypeFlow::from_entry(entry_types);

    auto violate = [&verdict](const char* rule, int pc, std::string msg) {
        verdict.violations.push_back({rule, pc, std::move(msg)});
    };

    for (int pc = 0; pc < static_cast<int>(insns.size()); pc++) {
        const Instruction& insn = insns[pc];

        if (insn.is_opaque()) {
            violate(safety_rule::kOpcode, pc, "control flow inside a rewrite unit");
            continue;
        }
        if (auto reason = insn.invalid_reason()) {
            violate(safety_rule::kOpcode, pc, *reason);
            continue;
        }

        // (c) reads of uninitialized registers; writes to r10.
        std::array<uint8_t, 3> rs;
        int n = 0;
        insn.read_regs(rs, n);
        for (int i = 0; i < n; i++) {
            if (!tf.regs[rs[i]].init) {
                violate(safety_rule::kUninitRead, pc,
                        "r" + std::to_string(rs[i]) + " read while uninitialized");
            }
        }
        if (auto d = insn.def_reg(); d && *d == kFramePointer) {
            violate(safety_rule::kFrameWrite, pc, "write to the frame pointer");
        }

        // (e) pointer arithmetic discipline: pointers may only be offset
        // by scalars, with 64-bit add/sub.
        if (insn.is_alu() && insn.alu != AluOp::Mov) {
            const bool dptr = tf.is_pointer(insn.dst);
            const bool sptr = !insn.src_is_imm && tf.is_pointer(insn.src);
            if (dptr || sptr) {
                const bool offsetting = insn.kind == InsnKind::Alu64 &&
                                        ((insn.alu == AluOp::Add && !(dptr && sptr)) ||
                                         (insn.alu == AluOp::Sub && dptr && !sptr));
                if (!offsetting) {
                    violate(safety_rule::kPtrArith, pc,
                            std::string(alu_op_name(insn.alu)) + " on a pointer");
                }
            }
        }

        if (insn.is_mem()) {
            const uint8_t base = insn.kind == InsnKind::Load ? insn.src : insn.dst;
            const TypeFlow::RegInfo& bi = tf.regs[base];
            if (bi.type == RegType::Scalar) {
                violate(safety_rule::kScalarDeref, pc,
                        "r" + std::to_string(base) + " dereferenced as a scalar");
            } else if (bi.type != RegType::Uninit) {
                const int64_t addr = bi.const_off + insn.off;
                // (a) natural alignment of the statically known address part.
                if (insn.width > 1 && addr % insn.width != 0) {
                    std::ostringstream msg;
                    msg << "address " << addr << " is not " << int(insn.width) << "-byte aligned";
                    violate(safety_rule::kAlignment, pc, msg.str());
                }
                // (b) immediate stores must not target the context.
                if (insn.kind == InsnKind::StoreImm && bi.type == RegType::PtrCtx) {
                    violate(safety_rule::kCtxImmStore, pc,
                            "immediate store through a context pointer");
                }
                // (d) stack accesses stay within the frame, statically.
                if (bi.type == RegType::PtrStack) {
                    if (bi.var_off) {
                        violate(safety_rule::kStackOob, pc, "variable stack offset");
                    } else if (addr < kStackLo || addr + insn.width > kStackHi) {
                        std::ostringstream msg;
                        msg << "stack access [" << addr << ".." << addr + insn.width
                            << ") outside [-512, 0)";
                        violate(safety_rule::kStackOob, pc, msg.str());
                    }
                }
            }
        }

        tf.apply(insn);
    }
    return verdict;
}

}  // namespace bpfopt
