#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace bpfopt {

// Hash-consed bitvector expression DAG. Widths run 1..64; booleans are
// width-1 vectors. Shift amounts follow SMT-LIB bvshl/bvlshr/bvashr
// semantics (same width, saturating past the width).
enum class EOp : uint8_t {
    Const,
    Var,
    Add,
    Sub,
    Mul,
    UDiv,  // total: x/0 = all-ones (SMT-LIB); callers encode runtime semantics
    URem,  // total: x%0 = x (SMT-LIB)
    And,
    Or,
    Xor,
    Not,
    Shl,
    Lshr,
    Ashr,
    Eq,
    Ult,
    Slt,
    Ite,
    Extract,  // k packs (hi << 8) | lo
    ZExt,
    Concat,  // a is the high part, b the low part
};

using ExprId = uint32_t;
constexpr ExprId kNoExpr = ~ExprId(0);

struct ExprNode {
    EOp op;
    uint8_t width;
    ExprId a = kNoExpr, b = kNoExpr, c = kNoExpr;
    uint64_t k = 0;  // constant value, variable index, or extract bounds
};

class ExprPool {
  public:
    ExprId constant(uint8_t width, uint64_t value);
    ExprId variable(uint8_t width, std::string name);

    ExprId add(ExprId a, ExprId b) { return binary(EOp::Add, a, b); }
    ExprId sub(ExprId a, ExprId b) { return binary(EOp::Sub, a, b); }
    ExprId mul(ExprId a, ExprId b) { return binary(EOp::Mul, a, b); }
    ExprId udiv(ExprId a, ExprId b) { return binary(EOp::UDiv, a, b); }
    ExprId urem(ExprId a, ExprId b) { return binary(EOp::URem, a, b); }
    ExprId band(ExprId a, ExprId b) { return binary(EOp::And, a, b); }
    ExprId bor(ExprId a, ExprId b) { return binary(EOp::Or, a, b); }
    ExprId bxor(ExprId a, ExprId b) { return binary(EOp::Xor, a, b); }
    ExprId bnot(ExprId a);
    ExprId shl(ExprId a, ExprId b) { return binary(EOp::Shl, a, b); }
    ExprId lshr(ExprId a, ExprId b) { return binary(EOp::Lshr, a, b); }
    ExprId ashr(ExprId a, ExprId b) { return binary(EOp::Ashr, a, b); }
    ExprId eq(ExprId a, ExprId b) { return binary(EOp::Eq, a, b); }
    ExprId ult(ExprId a, ExprId b) { return binary(EOp::Ult, a, b); }
    ExprId slt(ExprId a, ExprId b) { return binary(EOp::Slt, a, b); }
    ExprId ite(ExprId c, ExprId t, ExprId f);
    ExprId extract(ExprId a, uint8_t hi, uint8_t lo);
    ExprId zext(ExprId a, uint8_t width);
    ExprId concat(ExprId hi, ExprId lo);

    ExprId neq(ExprId a, ExprId b) { return bnot(eq(a, b)); }
    ExprId ule(ExprId a, ExprId b) { return bnot(ult(b, a)); }
    ExprId implies(ExprId a, ExprId b) { return bor(bnot(a), b); }
    ExprId true_() { return constant(1, 1); }
    ExprId false_() { return constant(1, 0); }

    const ExprNode& node(ExprId id) const { return nodes_[id]; }
    uint8_t width(ExprId id) const { return nodes_[id].width; }
    size_t size() const { return nodes_.size(); }

    struct VarInfo {
        uint8_t width;
        std::string name;
    };
    const std::vector<VarInfo>& vars() const { return vars_; }
    ExprId var_expr(uint32_t var_index) const { return var_exprs_[var_index]; }

    // Evaluates under a variable assignment (indexed by variable id).
    uint64_t eval(ExprId id, std::span<const uint64_t> var_values) const;

  private:
    ExprId binary(EOp op, ExprId a, ExprId b);
    ExprId intern(ExprNode n);

    std::vector<ExprNode> nodes_;
    std::vector<VarInfo> vars_;
    std::vector<ExprId> var_exprs_;
    std::unordered_map<uint64_t, std::vector<ExprId>> dedup_;
};

uint64_t mask_width(uint8_t width);

}  // namespace bpfopt
