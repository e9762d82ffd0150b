#include "asm_text.hpp"

#include <cctype>
#include <charconv>
#include <optional>
#include <sstream>

namespace bpfopt {

namespace {

struct Cursor {
    std::string_view s;
    size_t pos = 0;

    void skip_ws() {
        while (pos < s.size() && (s[pos] == ' ' || s[pos] == '\t')) pos++;
    }
    bool eat(std::string_view tok) {
        skip_ws();
        if (s.substr(pos, tok.size()) == tok) {
            pos += tok.size();
            return true;
        }
        return false;
    }
    bool done() {
        skip_ws();
        return pos >= s.size();
    }
    char peek() {
        skip_ws();
        return pos < s.size() ? s[pos] : '\0';
    }
};

std::optional<int64_t> parse_number(Cursor& c) {
    c.skip_ws();
    size_t p = c.pos;
    bool neg = false;
    if (p < c.s.size() && (c.s[p] == '-' || c.s[p] == '+')) {
        neg = c.s[p] == '-';
        p++;
    }
    uint64_t mag = 0;
    size_t digits_start = p;
    if (p + 1 < c.s.size() && c.s[p] == '0' && (c.s[p + 1] == 'x' || c.s[p + 1] == 'X')) {
        p += 2;
        digits_start = p;
        while (p < c.s.size() && std::isxdigit(static_cast<unsigned char>(c.s[p]))) {
            mag = mag * 16 + (std::isdigit(static_cast<unsigned char>(c.s[p]))
                                  ? c.s[p] - '0'
                                  : std::tolower(static_cast<unsigned char>(c.s[p])) - 'a' + 10);
            p++;
        }
    } else {
        while (p < c.s.size() && std::isdigit(static_cast<unsigned char>(c.s[p]))) {
            mag = mag * 10 + (c.s[p] - '0');
            p++;
        }
    }
    if (p == digits_start) return std::nullopt;
    c.pos = p;
    return neg ? -static_cast<int64_t>(mag) : static_cast<int64_t>(mag);
}

// rN or wN; returns (reg, is32).
std::optional<std::pair<uint8_t, bool>> parse_reg(Cursor& c) {
    c.skip_ws();
    if (c.pos >= c.s.size()) return std::nullopt;
    char k = c.s[c.pos];
    if (k != 'r' && k != 'w') return std::nullopt;
    size_t p = c.pos + 1;
    int n = 0;
    size_t start = p;
    while (p < c.s.size() && std::isdigit(static_cast<unsigned char>(c.s[p]))) {
        n = n * 10 + (c.s[p] - '0');
        p++;
    }
    if (p == start || n >= kNumRegs) return std::nullopt;
    c.pos = p;
    return std::make_pair(static_cast<uint8_t>(n), k == 'w');
}

std::optional<uint8_t> parse_width(Cursor& c) {
    if (c.eat("u8")) return 1;
    if (c.eat("u16")) return 2;
    if (c.eat("u32")) return 4;
    if (c.eat("u64")) return 8;
    return std::nullopt;
}

// (rB + OFF) / (rB - OFF) / (rB)
std::optional<std::pair<uint8_t, int16_t>> parse_addr(Cursor& c, int line) {
    if (!c.eat("(")) return std::nullopt;
    auto base = parse_reg(c);
    if (!base || base->second) return std::nullopt;
    int64_t off = 0;
    if (c.eat("+")) {
        auto n = parse_number(c);
        if (!n) return std::nullopt;
        off = *n;
    } else if (c.eat("-")) {
        auto n = parse_number(c);
        if (!n) return std::nullopt;
        off = -*n;
    }
    if (!c.eat(")")) return std::nullopt;
    if (off < INT16_MIN || off > INT16_MAX)
        throw AsmSyntaxError(line, "memory offset outside 16-bit range");
    return std::make_pair(base->first, static_cast<int16_t>(off));
}

// *(uW *)(rB + OFF)
std::optional<std::pair<uint8_t, std::pair<uint8_t, int16_t>>> parse_deref(Cursor& c, int line) {
    Cursor save = c;
    if (!c.eat("*")) return std::nullopt;
    if (!c.eat("(")) {
        c = save;
        return std::nullopt;
    }
    auto w = parse_width(c);
    if (!w || !c.eat("*") || !c.eat(")")) {
        c = save;
        return std::nullopt;
    }
    auto addr = parse_addr(c, line);
    if (!addr) throw AsmSyntaxError(line, "malformed address operand");
    return std::make_pair(*w, *addr);
}

int32_t check_imm(int64_t v, int line) {
    if (v < INT32_MIN || v > static_cast<int64_t>(UINT32_MAX))
        throw AsmSyntaxError(line, "immediate outside 32-bit range");
    return static_cast<int32_t>(v);
}

struct OpTok {
    std::string_view tok;
    AluOp op;
};

// Longest-match order matters: "<<=" before "<=", "s>>=" before ">>=".
constexpr OpTok kCompound[] = {
    {"s>>=", AluOp::Arsh}, {"<<=", AluOp::Lsh}, {">>=", AluOp::Rsh}, {"+=", AluOp::Add},
    {"-=", AluOp::Sub},    {"*=", AluOp::Mul},  {"/=", AluOp::Div},  {"%=", AluOp::Mod},
    {"&=", AluOp::And},    {"|=", AluOp::Or},   {"^=", AluOp::Xor},
};

bool starts_with_word(std::string_view s, std::string_view w) {
    if (s.substr(0, w.size()) != w) return false;
    return s.size() == w.size() || !std::isalnum(static_cast<unsigned char>(s[w.size()]));
}

Instruction parse_statement(std::string_view stmt, int line) {
    // Control flow is recognized but kept opaque; it only delimits blocks.
    if (starts_with_word(stmt, "if") || starts_with_word(stmt, "goto") ||
        starts_with_word(stmt, "call") || starts_with_word(stmt, "exit") ||
        starts_with_word(stmt, "ja")) {
        return make_opaque(std::string(stmt));
    }
    if (starts_with_word(stmt, "lock")) throw AsmUnsupportedError(line, "atomic operation");

    Cursor c{stmt};

    // Store: *(uW *)(rB + OFF) = rS | IMM
    if (c.peek() == '*') {
        auto deref = parse_deref(c, line);
        if (!deref) throw AsmSyntaxError(line, "malformed store");
        if (!c.eat("=")) throw AsmSyntaxError(line, "expected '=' after store address");
        auto [w, addr] = *deref;
        if (auto src = parse_reg(c)) {
            if (src->second) throw AsmSyntaxError(line, "store source must be a 64-bit register");
            if (!c.done()) throw AsmSyntaxError(line, "trailing tokens");
            return make_store(w, addr.first, addr.second, src->first);
        }
        auto n = parse_number(c);
        if (!n) throw AsmSyntaxError(line, "expected register or immediate store source");
        if (!c.done()) throw AsmSyntaxError(line, "trailing tokens");
        return make_store_imm(w, addr.first, addr.second, check_imm(*n, line));
    }

    auto dst = parse_reg(c);
    if (!dst) throw AsmSyntaxError(line, "expected destination register");
    const bool is32 = dst->second;

    // Compound assignment: rD <op>= rhs
    for (const auto& [tok, op] : kCompound) {
        if (!c.eat(tok)) continue;
        if (auto src = parse_reg(c)) {
            if (src->second != is32) throw AsmSyntaxError(line, "mixed r/w register widths");
            if (!c.done()) throw AsmSyntaxError(line, "trailing tokens");
            return is32 ? make_alu32(op, dst->first, src->first)
                        : make_alu64(op, dst->first, src->first);
        }
        auto n = parse_number(c);
        if (!n) throw AsmSyntaxError(line, "expected register or immediate operand");
        if (!c.done()) throw AsmSyntaxError(line, "trailing tokens");
        int32_t imm = check_imm(*n, line);
        try {
            return is32 ? make_alu32_imm(op, dst->first, imm)
                        : make_alu64_imm(op, dst->first, imm);
        } catch (const std::invalid_argument& e) {
            throw AsmSyntaxError(line, e.what());
        }
    }

    if (!c.eat("=")) throw AsmSyntaxError(line, "expected assignment operator");

    // rD = -rD (negate)
    {
        Cursor save = c;
        if (c.eat("-")) {
            if (auto r = parse_reg(c)) {
                if (r->second != is32) throw AsmSyntaxError(line, "mixed r/w register widths");
                if (r->first != dst->first)
                    throw AsmSyntaxError(line, "negation source must equal destination");
                if (!c.done()) throw AsmSyntaxError(line, "trailing tokens");
                return is32 ? make_neg32(dst->first) : make_neg64(dst->first);
            }
            c = save;
        }
    }

    // rD = *(uW *)(rB + OFF) (load)
    if (c.peek() == '*') {
        if (is32) throw AsmSyntaxError(line, "loads write 64-bit registers");
        auto deref = parse_deref(c, line);
        if (!deref) throw AsmSyntaxError(line, "malformed load");
        if (!c.done()) throw AsmSyntaxError(line, "trailing tokens");
        auto [w, addr] = *deref;
        try {
            return make_load(w, dst->first, addr.first, addr.second);
        } catch (const std::invalid_argument& e) {
            throw AsmSyntaxError(line, e.what());
        }
    }

    // rD = rS / rD = IMM (mov)
    if (auto src = parse_reg(c)) {
        if (src->second != is32) throw AsmSyntaxError(line, "mixed r/w register widths");
        if (!c.done()) throw AsmSyntaxError(line, "trailing tokens");
        try {
            return is32 ? make_alu32(AluOp::Mov, dst->first, src->first)
                        : make_alu64(AluOp::Mov, dst->first, src->first);
        } catch (const std::invalid_argument& e) {
            throw AsmSyntaxError(line, e.what());
        }
    }
    if (auto n = parse_number(c)) {
        // `rD = IMM ll` is the 64-bit immediate load, outside the subset.
        if (c.eat("ll")) throw AsmUnsupportedError(line, "64-bit immediate load");
        if (!c.done()) throw AsmSyntaxError(line, "trailing tokens");
        int32_t imm = check_imm(*n, line);
        try {
            return is32 ? make_alu32_imm(AluOp::Mov, dst->first, imm)
                        : make_alu64_imm(AluOp::Mov, dst->first, imm);
        } catch (const std::invalid_argument& e) {
            throw AsmSyntaxError(line, e.what());
        }
    }
    if (c.eat("le16") || c.eat("le32") || c.eat("le64") || c.eat("be16") || c.eat("be32") ||
        c.eat("be64") || c.eat("bswap"))
        throw AsmUnsupportedError(line, "byte swap");
    throw AsmSyntaxError(line, "unrecognized statement");
}

}  // namespace

Program parse_asm(std::string_view text) {
    std::vector<Instruction> insns;
    int line = 0;
    size_t pos = 0;
    while (pos <= text.size()) {
        size_t nl = text.find('\n', pos);
        std::string_view raw =
            text.substr(pos, nl == std::string_view::npos ? text.size() - pos : nl - pos);
        line++;
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;

        size_t cut = raw.find_first_of("#;");
        if (cut != std::string_view::npos) raw = raw.substr(0, cut);
        size_t b = raw.find_first_not_of(" \t\r");
        if (b == std::string_view::npos) continue;
        size_t e = raw.find_last_not_of(" \t\r");
        std::string_view stmt = raw.substr(b, e - b + 1);

        Instruction insn = parse_statement(stmt, line);
        insn.origin = static_cast<int32_t>(insns.size());
        insns.push_back(std::move(insn));
    }
    return Program::from_instructions(std::move(insns));
}

std::string print_insn(const Instruction& insn) {
    std::ostringstream out;
    auto reg = [&insn](uint8_t r) {
        return std::string(insn.kind == InsnKind::Alu32 ? "w" : "r") + std::to_string(r);
    };
    auto addr = [](uint8_t base, int16_t off) {
        std::string s = "(r" + std::to_string(base);
        s += off < 0 ? " - " + std::to_string(-static_cast<int32_t>(off))
                     : " + " + std::to_string(off);
        return s + ")";
    };
    auto width = [](uint8_t w) { return "u" + std::to_string(w * 8); };

    switch (insn.kind) {
    case InsnKind::Opaque: out << insn.opaque_text; break;
    case InsnKind::Load:
        out << "r" << int(insn.dst) << " = *(" << width(insn.width) << " *)"
            << addr(insn.src, insn.off);
        break;
    case InsnKind::Store:
        out << "*(" << width(insn.width) << " *)" << addr(insn.dst, insn.off) << " = r"
            << int(insn.src);
        break;
    case InsnKind::StoreImm:
        out << "*(" << width(insn.width) << " *)" << addr(insn.dst, insn.off) << " = " << insn.imm;
        break;
    case InsnKind::Alu64:
    case InsnKind::Alu32: {
        if (insn.alu == AluOp::Neg) {
            out << reg(insn.dst) << " = -" << reg(insn.dst);
            break;
        }
        const char* op = nullptr;
        switch (insn.alu) {
        case AluOp::Mov: op = ""; break;
        case AluOp::Add: op = "+"; break;
        case AluOp::Sub: op = "-"; break;
        case AluOp::Mul: op = "*"; break;
        case AluOp::Div: op = "/"; break;
        case AluOp::Mod: op = "%"; break;
        case AluOp::And: op = "&"; break;
        case AluOp::Or: op = "|"; break;
        case AluOp::Xor: op = "^"; break;
        case AluOp::Lsh: op = "<<"; break;
        case AluOp::Rsh: op = ">>"; break;
        case AluOp::Arsh: op = "s>>"; break;
        case AluOp::Neg: break;
        }
        out << reg(insn.dst) << " " << op << "= ";
        if (insn.src_is_imm)
            out << insn.imm;
        else
            out << reg(insn.src);
        break;
    }
    }
    return out.str();
}

std::string print_asm(const Program& p) {
    std::string out;
    for (const auto& insn : p.insns) {
        out += print_insn(insn);
        out += '\n';
    }
    return out;
}

}  // namespace bpfopt
