#include "testgen.hpp"

#include <algorithm>

#include "typeflow.hpp"

namespace bpfopt {

void RegionWindows::widen(int16_t region, int64_t lo, int64_t hi) {
    if (region == kStackRegion) {
        lo = std::max(lo, kStackLo);
        hi = std::min(hi, kStackHi);
    } else {
        lo = std::max<int64_t>(lo, 0);
        hi = std::min<int64_t>(hi, kDefaultRegionExtent);
    }
    if (lo >= hi) return;
    for (auto& w : windows) {
        if (w.region == region) {
            w.lo = std::min(w.lo, lo);
            w.hi = std::max(w.hi, hi);
            return;
        }
    }
    windows.push_back({region, lo, hi});
}

const RegionWindows::Window* RegionWindows::find(int16_t region) const {
    for (const auto& w : windows) {
        if (w.region == region) return &w;
    }
    return nullptr;
}

RegionWindows derive_windows(std::span<const Instruction> insns, const RegTypeMap& entry,
                             const Footprint& live_out, int64_t var_margin) {
    RegionWindows out;
    TypeFlow tf = TypeFlow::from_entry(entry);
    for (const auto& insn : insns) {
        if (auto a = tf.access(insn); a && a->region >= 0) {
            const int64_t pad = a->var_off ? var_margin : 0;
            out.widen(a->region, a->const_off, a->const_off + a->width + pad);
        }
        tf.apply(insn);
    }
    for (const auto& m : live_out.mem) {
        if (m.whole_region) continue;  // compared over the union of windows
        for (int64_t off : m.offsets) out.widen(m.region, off, off + 1);
    }
    return out;
}

std::vector<uint8_t> addressing_scalars(std::span<const Instruction> insns,
                                        const RegTypeMap& entry) {
    std::vector<uint8_t> out;
    TypeFlow tf = TypeFlow::from_entry(entry);
    for (const auto& insn : insns) {
        if (insn.kind == InsnKind::Alu64 && !insn.src_is_imm &&
            (insn.alu == AluOp::Add || insn.alu == AluOp::Sub)) {
            const bool dptr = tf.is_pointer(insn.dst);
            const bool sptr = tf.is_pointer(insn.src);
            if (dptr && !sptr && std::find(out.begin(), out.end(), insn.src) == out.end()) {
                out.push_back(insn.src);
            }
            if (!dptr && sptr && std::find(out.begin(), out.end(), insn.dst) == out.end()) {
                out.push_back(insn.dst);
            }
        }
        tf.apply(insn);
    }
    return out;
}

uint64_t StateGen::interesting_u64() {
    switch (rng_() % 8) {
    case 0: return 0;
    case 1: return 1;
    case 2: return rng_() % 256;
    case 3: return ~uint64_t(0);
    case 4: return uint64_t(1) << (rng_() % 64);
    case 5: return static_cast<uint64_t>(-static_cast<int64_t>(rng_() % 1024));
    default: return rng_();
    }
}

MachineState StateGen::make(const RegTypeMap& entry, const RegionWindows& windows,
                            std::span<const uint8_t> addressing_regs) {
    MachineState s;
    for (uint8_t r = 0; r < kNumRegs; r++) {
        switch (entry.type[r]) {
        case RegType::Uninit: break;
        case RegType::Scalar: s.set_reg(r, interesting_u64()); break;
        default: s.set_reg(r, 0); break;  // entry pointers sit at region offset 0
        }
    }
    for (uint8_t r : addressing_regs) {
        if (entry.type[r] == RegType::Scalar) s.set_reg(r, rng_() % 16);
    }
    for (const auto& w : windows.windows) {
        MemRegion region = MemRegion::make(w.region, w.lo, w.hi);
        for (int64_t off = w.lo; off < w.hi; off++) {
            region.set_byte(off, static_cast<uint8_t>(rng_()));
        }
        s.mem.push_back(std::move(region));
    }
    return s;
}

}  // namespace bpfopt
