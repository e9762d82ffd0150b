#include "expr.hpp"

#include <cassert>
#include <stdexcept>

namespace bpfopt {

uint64_t mask_width(uint8_t width) {
    return width >= 64 ? ~uint64_t(0) : ((uint64_t(1) << width) - 1);
}

namespace {

uint64_t fold_binary(EOp op, uint8_t w, uint64_t x, uint64_t y) {
    const uint64_t m = mask_width(w);
    switch (op) {
    case EOp::Add: return (x + y) & m;
    case EOp::Sub: return (x - y) & m;
    case EOp::Mul: return (x * y) & m;
    case EOp::UDiv: return y == 0 ? m : (x / y);
    case EOp::URem: return y == 0 ? x : (x % y);
    case EOp::And: return x & y;
    case EOp::Or: return x | y;
    case EOp::Xor: return x ^ y;
    case EOp::Shl: return y >= w ? 0 : (x << y) & m;
    case EOp::Lshr: return y >= w ? 0 : x >> y;
    case EOp::Ashr: {
        const uint64_t sign = (x >> (w - 1)) & 1;
        if (y >= w) return sign ? m : 0;
        uint64_t r = x >> y;
        if (sign) r |= m & ~(m >> y);
        return r;
    }
    case EOp::Eq: return x == y;
    case EOp::Ult: return x < y;
    case EOp::Slt: {
        auto sx = static_cast<int64_t>(x << (64 - w));
        auto sy = static_cast<int64_t>(y << (64 - w));
        return sx < sy;
    }
    default: return 0;
    }
}

bool commutative(EOp op) {
    switch (op) {
    case EOp::Add:
    case EOp::Mul:
    case EOp::And:
    case EOp::Or:
    case EOp::Xor:
    case EOp::Eq: return true;
    default: return false;
    }
}

uint64_t node_hash(const ExprNode& n) {
    uint64_t h = 0xcbf29ce484222325ull;
    auto fold = [&h](uint64_t v) {
        h ^= v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
        h *= 0x100000001b3ull;
    };
    fold(static_cast<uint64_t>(n.op));
    fold(n.width);
    fold(n.a);
    fold(n.b);
    fold(n.c);
    fold(n.k);
    return h;
}

bool node_equal(const ExprNode& x, const ExprNode& y) {
    return x.op == y.op && x.width == y.width && x.a == y.a && x.b == y.b && x.c == y.c &&
           x.k == y.k;
}

}  // namespace

ExprId ExprPool::intern(ExprNode n) {
    const uint64_t h = node_hash(n);
    auto& bucket = dedup_[h];
    for (ExprId id : bucket) {
        if (node_equal(nodes_[id], n)) return id;
    }
    const auto id = static_cast<ExprId>(nodes_.size());
    nodes_.push_back(n);
    bucket.push_back(id);
    return id;
}

ExprId ExprPool::constant(uint8_t width, uint64_t value) {
    return intern(ExprNode{EOp::Const, width, kNoExpr, kNoExpr, kNoExpr, value & mask_width(width)});
}

ExprId ExprPool::variable(uint8_t width, std::string name) {
    const auto var_index = static_cast<uint64_t>(vars_.size());
    vars_.push_back({width, std::move(name)});
    ExprId id = intern(ExprNode{EOp::Var, width, kNoExpr, kNoExpr, kNoExpr, var_index});
    var_exprs_.push_back(id);
    return id;
}

ExprId ExprPool::binary(EOp op, ExprId a, ExprId b) {
    const ExprNode& na = nodes_[a];
    const ExprNode& nb = nodes_[b];
    assert(na.width == nb.width);
    const uint8_t w = na.width;
    const uint8_t rw = (op == EOp::Eq || op == EOp::Ult || op == EOp::Slt) ? 1 : w;

    if (na.op == EOp::Const && nb.op == EOp::Const) {
        return constant(rw, fold_binary(op, w, na.k, nb.k));
    }

    // Local identities; enough to collapse the common plumbing.
    const bool a_const = na.op == EOp::Const;
    const bool b_const = nb.op == EOp::Const;
    switch (op) {
    case EOp::Add:
        if (a_const && na.k == 0) return b;
        if (b_const && nb.k == 0) return a;
        break;
    case EOp::Sub:
        if (b_const && nb.k == 0) return a;
        if (a == b) return constant(w, 0);
        break;
    case EOp::Mul:
        if (a_const && na.k == 1) return b;
        if (b_const && nb.k == 1) return a;
        if ((a_const && na.k == 0) || (b_const && nb.k == 0)) return constant(w, 0);
        break;
    case EOp::And:
        if (a == b) return a;
        if ((a_const && na.k == 0) || (b_const && nb.k == 0)) return constant(w, 0);
        if (a_const && na.k == mask_width(w)) return b;
        if (b_const && nb.k == mask_width(w)) return a;
        break;
    case EOp::Or:
        if (a == b) return a;
        if (a_const && na.k == 0) return b;
        if (b_const && nb.k == 0) return a;
        if ((a_const && na.k == mask_width(w)) || (b_const && nb.k == mask_width(w)))
            return constant(w, mask_width(w));
        break;
    case EOp::Xor:
        if (a == b) return constant(w, 0);
        if (a_const && na.k == 0) return b;
        if (b_const && nb.k == 0) return a;
        break;
    case EOp::Shl:
    case EOp::Lshr:
    case EOp::Ashr:
        if (b_const && nb.k == 0) return a;
        if (b_const && nb.k >= w && op != EOp::Ashr) return constant(w, 0);
        break;
    case EOp::Eq:
        if (a == b) return true_();
        break;
    case EOp::Ult:
        if (a == b) return false_();
        if (b_const && nb.k == 0) return false_();
        break;
    case EOp::Slt:
        if (a == b) return false_();
        break;
    default: break;
    }

    if (commutative(op) && a > b) std::swap(a, b);
    return intern(ExprNode{op, rw, a, b, kNoExpr, 0});
}

ExprId ExprPool::bnot(ExprId a) {
    const ExprNode& na = nodes_[a];
    if (na.op == EOp::Const) return constant(na.width, ~na.k);
    if (na.op == EOp::Not) return na.a;
    return intern(ExprNode{EOp::Not, na.width, a, kNoExpr, kNoExpr, 0});
}

ExprId ExprPool::ite(ExprId c, ExprId t, ExprId f) {
    assert(nodes_[c].width == 1);
    const ExprNode& nc = nodes_[c];
    if (nc.op == EOp::Const) return nc.k ? t : f;
    if (t == f) return t;
    return intern(ExprNode{EOp::Ite, nodes_[t].width, c, t, f, 0});
}

ExprId ExprPool::extract(ExprId a, uint8_t hi, uint8_t lo) {
    const ExprNode& na = nodes_[a];
    assert(hi >= lo && hi < na.width);
    const uint8_t w = static_cast<uint8_t>(hi - lo + 1);
    if (w == na.width) return a;
    if (na.op == EOp::Const) return constant(w, na.k >> lo);
    if (na.op == EOp::ZExt) {
        const uint8_t inner = nodes_[na.a].width;
        if (hi < inner) return extract(na.a, hi, lo);
        if (lo >= inner) return constant(w, 0);
    }
    if (na.op == EOp::Concat) {
        const uint8_t low_w = nodes_[na.b].width;
        if (hi < low_w) return extract(na.b, hi, lo);
        if (lo >= low_w)
            return extract(na.a, static_cast<uint8_t>(hi - low_w), static_cast<uint8_t>(lo - low_w));
    }
    if (na.op == EOp::Extract) {
        const uint8_t inner_lo = static_cast<uint8_t>(na.k & 0xff);
        return extract(na.a, static_cast<uint8_t>(hi + inner_lo),
                       static_cast<uint8_t>(lo + inner_lo));
    }
    return intern(ExprNode{EOp::Extract, w, a, kNoExpr, kNoExpr,
                           (static_cast<uint64_t>(hi) << 8) | lo});
}

ExprId ExprPool::zext(ExprId a, uint8_t width) {
    const ExprNode& na = nodes_[a];
    assert(width >= na.width);
    if (width == na.width) return a;
    if (na.op == EOp::Const) return constant(width, na.k);
    return intern(ExprNode{EOp::ZExt, width, a, kNoExpr, kNoExpr, 0});
}

ExprId ExprPool::concat(ExprId hi, ExprId lo) {
    const ExprNode& nh = nodes_[hi];
    const ExprNode& nl = nodes_[lo];
    const uint8_t w = static_cast<uint8_t>(nh.width + nl.width);
    assert(w <= 64);
    if (nh.op == EOp::Const && nl.op == EOp::Const) {
        return constant(w, (nh.k << nl.width) | nl.k);
    }
    if (nh.op == EOp::Const && nh.k == 0) return zext(lo, w);
    return intern(ExprNode{EOp::Concat, w, hi, lo, kNoExpr, 0});
}

uint64_t ExprPool::eval(ExprId id, std::span<const uint64_t> var_values) const {
    std::vector<uint64_t> memo(nodes_.size(), 0);
    std::vector<bool> done(nodes_.size(), false);
    // Iterative DFS keeps deep DAGs off the call stack.
    std::vector<ExprId> stack{id};
    while (!stack.empty()) {
        const ExprId cur = stack.back();
        if (done[cur]) {
            stack.pop_back();
            continue;
        }
        const ExprNode& n = nodes_[cur];
        bool ready = true;
        for (ExprId child : {n.a, n.b, n.c}) {
            if (child != kNoExpr && !done[child]) {
                stack.push_back(child);
                ready = false;
            }
        }
        if (!ready) continue;
        stack.pop_back();
        uint64_t v = 0;
        switch (n.op) {
        case EOp::Const: v = n.k; break;
        case EOp::Var: v = var_values[n.k] & mask_width(n.width); break;
        case EOp::Not: v = ~memo[n.a] & mask_width(n.width); break;
        case EOp::Ite: v = memo[n.a] ? memo[n.b] : memo[n.c]; break;
        case EOp::Extract: v = (memo[n.a] >> (n.k & 0xff)) & mask_width(n.width); break;
        case EOp::ZExt: v = memo[n.a]; break;
        case EOp::Concat: v = (memo[n.a] << nodes_[n.b].width) | memo[n.b]; break;
        default: v = fold_binary(n.op, nodes_[n.a].width, memo[n.a], memo[n.b]); break;
        }
        memo[cur] = v;
        done[cur] = true;
    }
    return memo[id];
}

}  // namespace bpfopt
