#include "machine.hpp"

#include <charconv>
#include <sstream>
#include <stdexcept>

namespace bpfopt {

std::string region_name(int16_t id) {
    if (id == kStackRegion) return "stack";
    if (id == kCtxRegion) return "ctx";
    return "mem" + std::to_string(id - kFirstMemRegion);
}

std::optional<int16_t> region_id_from_name(std::string_view name) {
    if (name == "stack") return kStackRegion;
    if (name == "ctx") return kCtxRegion;
    if (name.starts_with("mem")) {
        int v = 0;
        auto [p, ec] = std::from_chars(name.data() + 3, name.data() + name.size(), v);
        if (ec == std::errc() && p == name.data() + name.size())
            return static_cast<int16_t>(kFirstMemRegion + v);
    }
    return std::nullopt;
}

RegTypeMap RegTypeMap::all_scalar() {
    RegTypeMap m;
    for (uint8_t r = 0; r < kNumRegs; r++) {
        if (r != kFramePointer) m.set(r, RegType::Scalar);
    }
    return m;
}

RegTypeMap RegTypeMap::default_entry() {
    RegTypeMap m = all_scalar();
    m.set(1, RegType::PtrCtx);
    return m;
}

MemRegion MemRegion::make(int16_t id, int64_t lo, int64_t hi) {
    MemRegion r;
    r.id = id;
    r.lo = lo;
    r.hi = hi;
    r.bytes.assign(static_cast<size_t>(hi - lo), 0);
    r.init.assign(static_cast<size_t>(hi - lo), 0);
    return r;
}

MemRegion* MachineState::find_region(int16_t id) {
    for (auto& r : mem) {
        if (r.id == id) return &r;
    }
    return nullptr;
}

const MemRegion* MachineState::find_region(int16_t id) const {
    for (const auto& r : mem) {
        if (r.id == id) return &r;
    }
    return nullptr;
}

MemRegion& MachineState::ensure_region(int16_t id, int64_t lo, int64_t hi) {
    if (auto* r = find_region(id)) return *r;
    mem.push_back(MemRegion::make(id, lo, hi));
    return mem.back();
}

std::string Fault::to_string() const {
    const char* k = kind == Kind::UninitRead  ? "uninit-read"
                    : kind == Kind::OutOfBounds ? "out-of-bounds"
                                                : "bad-region";
    return std::string(k) + " at pc " + std::to_string(pc);
}

namespace {

uint64_t alu64_apply(AluOp op, uint64_t x, uint64_t y) {
    switch (op) {
    case AluOp::Mov: return y;
    case AluOp::Add: return x + y;
    case AluOp::Sub: return x - y;
    case AluOp::Mul: return x * y;
    case AluOp::Div: return y == 0 ? 0 : x / y;
    case AluOp::Mod: return y == 0 ? x : x % y;
    case AluOp::And: return x & y;
    case AluOp::Or: return x | y;
    case AluOp::Xor: return x ^ y;
    case AluOp::Lsh: return x << (y & 63);
    case AluOp::Rsh: return x >> (y & 63);
    case AluOp::Arsh: return static_cast<uint64_t>(static_cast<int64_t>(x) >> (y & 63));
    case AluOp::Neg: return 0 - x;
    }
    return 0;
}

uint32_t alu32_apply(AluOp op, uint32_t x, uint32_t y) {
    switch (op) {
    case AluOp::Mov: return y;
    case AluOp::Add: return x + y;
    case AluOp::Sub: return x - y;
    case AluOp::Mul: return x * y;
    case AluOp::Div: return y == 0 ? 0 : x / y;
    case AluOp::Mod: return y == 0 ? x : x % y;
    case AluOp::And: return x & y;
    case AluOp::Or: return x | y;
    case AluOp::Xor: return x ^ y;
    case AluOp::Lsh: return x << (y & 31);
    case AluOp::Rsh: return x >> (y & 31);
    case AluOp::Arsh: return static_cast<uint32_t>(static_cast<int32_t>(x) >> (y & 31));
    case AluOp::Neg: return 0 - x;
    }
    return 0;
}

}  // namespace

std::optional<Fault> step(MachineState& s, RegTypeMap& types, const Instruction& insn, int pc) {
    auto uninit = [pc]() { return Fault{Fault::Kind::UninitRead, pc}; };
    auto oob = [pc]() { return Fault{Fault::Kind::OutOfBounds, pc}; };
    auto bad_region = [pc]() { return Fault{Fault::Kind::BadRegion, pc}; };

    switch (insn.kind) {
    case InsnKind::Opaque: return bad_region();  // opaques never execute inside a block

    case InsnKind::Alu64: {
        if (insn.alu == AluOp::Neg) {
            if (!s.reg_init[insn.dst]) return uninit();
            s.regs[insn.dst] = 0 - s.regs[insn.dst];
            types.set(insn.dst, RegType::Scalar);
            return std::nullopt;
        }
        uint64_t y;
        RegType ytype = RegType::Scalar;
        int16_t yregion = -1;
        if (insn.src_is_imm) {
            y = static_cast<uint64_t>(static_cast<int64_t>(insn.imm));
        } else {
            if (!s.reg_init[insn.src]) return uninit();
            y = s.regs[insn.src];
            ytype = types.type[insn.src];
            yregion = types.region[insn.src];
        }
        if (insn.alu == AluOp::Mov) {
            s.set_reg(insn.dst, y);
            types.set(insn.dst, insn.src_is_imm ? RegType::Scalar : ytype, yregion);
            return std::nullopt;
        }
        if (!s.reg_init[insn.dst]) return uninit();
        const uint64_t x = s.regs[insn.dst];
        s.regs[insn.dst] = alu64_apply(insn.alu, x, y);

        // Pointer arithmetic keeps the pointer tag only for ptr +/- scalar
        // (and scalar + ptr); everything else degrades to scalar.
        const bool xptr = types.is_pointer(insn.dst);
        const bool yptr = !insn.src_is_imm && (ytype == RegType::PtrStack ||
                                               ytype == RegType::PtrCtx || ytype == RegType::PtrMem);
        if (insn.alu == AluOp::Add && xptr && !yptr) {
            // keep dst tag
        } else if (insn.alu == AluOp::Add && !xptr && yptr) {
            types.set(insn.dst, ytype, yregion);
        } else if (insn.alu == AluOp::Sub && xptr && !yptr) {
            // keep dst tag
        } else {
            types.set(insn.dst, RegType::Scalar);
        }
        return std::nullopt;
    }

    case InsnKind::Alu32: {
        if (insn.alu == AluOp::Neg) {
            if (!s.reg_init[insn.dst]) return uninit();
            s.regs[insn.dst] = static_cast<uint32_t>(0 - static_cast<uint32_t>(s.regs[insn.dst]));
            types.set(insn.dst, RegType::Scalar);
            return std::nullopt;
        }
        uint32_t y;
        if (insn.src_is_imm) {
            y = static_cast<uint32_t>(insn.imm);
        } else {
            if (!s.reg_init[insn.src]) return uninit();
            y = static_cast<uint32_t>(s.regs[insn.src]);
        }
        if (insn.alu == AluOp::Mov) {
            s.set_reg(insn.dst, y);
            types.set(insn.dst, RegType::Scalar);
            return std::nullopt;
        }
        if (!s.reg_init[insn.dst]) return uninit();
        const auto x = static_cast<uint32_t>(s.regs[insn.dst]);
        s.regs[insn.dst] = alu32_apply(insn.alu, x, y);
        types.set(insn.dst, RegType::Scalar);
        return std::nullopt;
    }

    case InsnKind::Load: {
        if (!s.reg_init[insn.src]) return uninit();
        if (!types.is_pointer(insn.src)) return bad_region();
        MemRegion* region = s.find_region(types.region[insn.src]);
        if (!region) return oob();
        const int64_t off = static_cast<int64_t>(s.regs[insn.src]) + insn.off;
        if (!region->contains(off, insn.width)) return oob();
        uint64_t v = 0;
        for (int i = 0; i < insn.width; i++) {
            if (!region->is_init(off + i)) return uninit();
            v |= static_cast<uint64_t>(region->byte(off + i)) << (8 * i);
        }
        s.set_reg(insn.dst, v);
        types.set(insn.dst, RegType::Scalar);
        return std::nullopt;
    }

    case InsnKind::Store:
    case InsnKind::StoreImm: {
        if (!s.reg_init[insn.dst]) return uninit();
        if (!types.is_pointer(insn.dst)) return bad_region();
        uint64_t v;
        if (insn.kind == InsnKind::Store) {
            if (!s.reg_init[insn.src]) return uninit();
            v = s.regs[insn.src];
        } else {
            v = static_cast<uint64_t>(static_cast<int64_t>(insn.imm));
        }
        MemRegion* region = s.find_region(types.region[insn.dst]);
        if (!region) return oob();
        const int64_t off = static_cast<int64_t>(s.regs[insn.dst]) + insn.off;
        if (!region->contains(off, insn.width)) return oob();
        for (int i = 0; i < insn.width; i++) {
            region->set_byte(off + i, static_cast<uint8_t>(v >> (8 * i)));
        }
        return std::nullopt;
    }
    }
    return bad_region();
}

RunResult interpret(std::span<const Instruction> insns, MachineState s0, RegTypeMap entry_types) {
    RunResult r;
    r.state = std::move(s0);
    r.types = entry_types;
    // Entry pointer registers hold offset 0 into their regions.
    for (uint8_t reg = 0; reg < kNumRegs; reg++) {
        if (entry_types.is_pointer(reg) && !r.state.reg_init[reg]) r.state.set_reg(reg, 0);
        if (entry_types.type[reg] == RegType::Uninit) r.state.reg_init[reg] = 0;
    }
    for (int pc = 0; pc < static_cast<int>(insns.size()); pc++) {
        if (auto f = step(r.state, r.types, insns[pc], pc)) {
            r.fault = f;
            return r;
        }
    }
    return r;
}

namespace {

std::string hex64(uint64_t v) {
    bool started = false;
    std::string out = "0x";
    for (int i = 15; i >= 0; i--) {
        char c = "0123456789abcdef"[(v >> (4 * i)) & 0xf];
        if (c != '0' || started || i == 0) {
            started = true;
            out += c;
        }
    }
    return out;
}

}  // namespace

std::string state_to_text(const MachineState& s, const RegTypeMap& types) {
    std::ostringstream out;
    for (uint8_t r = 0; r < kNumRegs; r++) {
        if (!s.reg_init[r]) continue;
        out << "r" << int(r) << " = " << hex64(s.regs[r]) << "\n";
        switch (types.type[r]) {
        case RegType::PtrStack: out << "type r" << int(r) << " = stack\n"; break;
        case RegType::PtrCtx: out << "type r" << int(r) << " = ctx\n"; break;
        case RegType::PtrMem:
            out << "type r" << int(r) << " = " << region_name(types.region[r]) << "\n";
            break;
        default: break;
        }
    }
    for (const auto& region : s.mem) {
        // Emit maximal initialized runs as separate lines.
        int64_t off = region.lo;
        while (off < region.hi) {
            if (!region.is_init(off)) {
                off++;
                continue;
            }
            int64_t end = off;
            while (end < region.hi && region.is_init(end)) end++;
            out << "mem " << region_name(region.id) << "[" << off << ".." << end << ") = ";
            for (int64_t i = off; i < end; i++) {
                out << "0123456789abcdef"[region.byte(i) >> 4]
                    << "0123456789abcdef"[region.byte(i) & 0xf];
            }
            out << "\n";
            off = end;
        }
    }
    return out.str();
}

void state_from_text(std::string_view text, MachineState& s, RegTypeMap& types) {
    std::istringstream in{std::string(text)};
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        lineno++;
        size_t cut = line.find_first_of("#;");
        if (cut != std::string::npos) line = line.substr(0, cut);
        std::istringstream ls(line);
        std::string tok;
        if (!(ls >> tok)) continue;
        auto fail = [&](const std::string& why) {
            throw std::runtime_error("state line " + std::to_string(lineno) + ": " + why);
        };
        if (tok == "type") {
            std::string regtok, eq, ty;
            if (!(ls >> regtok >> eq >> ty) || eq != "=" || regtok.size() < 2 || regtok[0] != 'r')
                fail("malformed type line");
            int r = std::stoi(regtok.substr(1));
            if (r < 0 || r >= kNumRegs) fail("register out of range");
            if (ty == "scalar") {
                types.set(static_cast<uint8_t>(r), RegType::Scalar);
            } else if (ty == "stack") {
                types.set(static_cast<uint8_t>(r), RegType::PtrStack);
            } else if (ty == "ctx") {
                types.set(static_cast<uint8_t>(r), RegType::PtrCtx);
            } else if (auto id = region_id_from_name(ty)) {
                types.set(static_cast<uint8_t>(r), RegType::PtrMem, *id);
            } else {
                fail("unknown register type " + ty);
            }
        } else if (tok == "mem") {
            std::string spec, eq, hex;
            if (!(ls >> spec >> eq >> hex) || eq != "=") fail("malformed mem line");
            size_t lb = spec.find('[');
            size_t dots = spec.find("..");
            size_t rb = spec.find(')');
            if (lb == std::string::npos || dots == std::string::npos || rb == std::string::npos)
                fail("malformed mem range");
            auto id = region_id_from_name(spec.substr(0, lb));
            if (!id) fail("unknown region " + spec.substr(0, lb));
            int64_t lo = std::stoll(spec.substr(lb + 1, dots - lb - 1));
            int64_t hi = std::stoll(spec.substr(dots + 2, rb - dots - 2));
            if (hi - lo != static_cast<int64_t>(hex.size() / 2) || hex.size() % 2 != 0)
                fail("byte count does not match range");
            int64_t rlo = *id == kStackRegion ? kStackLo : 0;
            int64_t rhi = *id == kStackRegion ? kStackHi : std::max<int64_t>(hi, kDefaultRegionExtent);
            if (lo < rlo || hi > rhi) fail("range outside region bounds");
            auto& region = s.ensure_region(*id, rlo, rhi);
            for (int64_t i = lo; i < hi; i++) {
                auto nib = [&](char c) -> int {
                    if (c >= '0' && c <= '9') return c - '0';
                    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
                    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
                    fail("bad hex digit");
                    return 0;
                };
                size_t k = static_cast<size_t>(i - lo) * 2;
                region.set_byte(i, static_cast<uint8_t>(nib(hex[k]) * 16 + nib(hex[k + 1])));
            }
        } else if (tok.size() >= 2 && tok[0] == 'r') {
            int r = std::stoi(tok.substr(1));
            if (r < 0 || r >= kNumRegs) fail("register out of range");
            std::string eq, val;
            if (!(ls >> eq >> val) || eq != "=") fail("malformed register line");
            uint64_t v = std::stoull(val, nullptr, 0);
            s.set_reg(static_cast<uint8_t>(r), v);
            if (types.type[r] == RegType::Uninit) types.set(static_cast<uint8_t>(r), RegType::Scalar);
        } else {
            fail("unrecognized line");
        }
    }
}

}  // namespace bpfopt
