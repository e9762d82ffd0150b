#include "cost.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace bpfopt {

const char* op_class_name(OpClass c) {
    switch (c) {
    case OpClass::Alu64: return "ALU64";
    case OpClass::Alu32: return "ALU32";
    case OpClass::Ldx: return "LDX";
    case OpClass::Stx: return "STX";
    case OpClass::St: return "ST";
    }
    return "?";
}

OpClass op_class(const Instruction& insn) {
    switch (insn.kind) {
    case InsnKind::Alu64: return OpClass::Alu64;
    case InsnKind::Alu32: return OpClass::Alu32;
    case InsnKind::Load: return OpClass::Ldx;
    case InsnKind::Store: return OpClass::Stx;
    case InsnKind::StoreImm: return OpClass::St;
    case InsnKind::Opaque: break;
    }
    throw std::invalid_argument("opaque instructions have no cost class");
}

CostModel CostModel::size() { return CostModel{}; }

CostModel CostModel::latency(std::map<OpClass, int64_t> table) {
    CostModel m;
    m.mode = Mode::Latency;
    m.latency_ps = std::move(table);
    for (const auto& [cls, ps] : m.latency_ps) {
        if (ps <= 0) throw std::invalid_argument("latency costs must be positive");
    }
    return m;
}

CostModel CostModel::latency_from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open latency table " + path);
    std::map<OpClass, int64_t> table;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        lineno++;
        size_t cut = line.find('#');
        if (cut != std::string::npos) line = line.substr(0, cut);
        std::istringstream ls(line);
        std::string cls, ns;
        if (!(ls >> cls)) continue;
        if (!(ls >> ns))
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": missing latency");

        OpClass c;
        if (cls == "ALU64") {
            c = OpClass::Alu64;
        } else if (cls == "ALU32") {
            c = OpClass::Alu32;
        } else if (cls == "LDX") {
            c = OpClass::Ldx;
        } else if (cls == "STX") {
            c = OpClass::Stx;
        } else if (cls == "ST") {
            c = OpClass::St;
        } else {
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": unknown class " + cls);
        }

        // Decimal nanoseconds to integer picoseconds, no floating point.
        size_t dot = ns.find('.');
        std::string whole = dot == std::string::npos ? ns : ns.substr(0, dot);
        std::string frac = dot == std::string::npos ? "" : ns.substr(dot + 1);
        frac.resize(3, '0');
        if (frac.size() > 3) frac = frac.substr(0, 3);
        try {
            int64_t ps = std::stoll(whole) * 1000 + std::stoll(frac.empty() ? "0" : frac);
            table[c] = ps;
        } catch (const std::exception&) {
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": bad latency " + ns);
        }
    }
    return latency(std::move(table));
}

int64_t CostModel::insn_cost(const Instruction& insn) const {
    if (mode == Mode::Size) return 1;
    const OpClass c = op_class(insn);
    auto it = latency_ps.find(c);
    if (it == latency_ps.end()) throw MissingLatencyError(c);
    return it->second;
}

int64_t CostModel::min_insn_cost() const {
    if (mode == Mode::Size) return 1;
    int64_t best = INT64_MAX;
    for (const auto& [cls, ps] : latency_ps) best = std::min(best, ps);
    return best == INT64_MAX ? 1 : best;
}

int64_t cost_of(std::span<const Instruction> insns, const CostModel& cost) {
    int64_t total = 0;
    for (const auto& insn : insns) total += cost.insn_cost(insn);
    return total;
}

std::string format_cost(int64_t cost, const CostModel& cost_model) {
    if (cost_model.mode == CostModel::Mode::Size) return std::to_string(cost) + " insns";
    std::ostringstream out;
    out << cost / 1000 << "." << (cost % 1000) / 100 << ((cost % 100) / 10) << (cost % 10) << " ns";
    return out.str();
}

}  // namespace bpfopt
