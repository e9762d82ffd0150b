#include "recompose.hpp"

#include <algorithm>
#include <map>
#include <optional>

#include "typeflow.hpp"

namespace bpfopt {

namespace {

struct Access {
    int16_t region = -1;
    int64_t off = 0;
    bool var = false;
    uint8_t width = 0;
    bool is_store = false;
};

// Cross-slice value identity of an operand: a representative node index, or
// an entry marker derived from the defining position in the original block.
using ValueId = std::pair<int64_t, int64_t>;
constexpr int64_t kTagNode = 0, kTagEntryReg = 1, kTagEntryByte = 2, kTagUnique = 3;

struct Node {
    Instruction insn;
    int origin = -1;
    int si = 0, ii = 0;  // first occurrence, for stable ordering
    bool synthesized = false;
    std::optional<Access> access;
    std::vector<ValueId> producers;  // value sources, for structural dedup
};

// Positions in the original block where register r is defined before `pos`.
int prefix_def(std::span<const Instruction> block, uint8_t r, int pos) {
    for (int p = pos - 1; p >= 0; p--) {
        if (auto d = block[p].def_reg(); d && *d == r) return p;
    }
    return -1;
}

struct SliceResourceUse {
    // Original-block positions at which the slice touches each resource;
    // anchors synthesized replacements relative to other slices' origins.
    std::map<uint8_t, std::vector<int>> reg_pos;
    std::map<int16_t, std::vector<std::pair<int, std::pair<int64_t, int64_t>>>> mem_pos;
    bool mem_var = false;
    std::vector<int> mem_var_pos;
};

SliceResourceUse slice_resource_use(const Slice& s) {
    SliceResourceUse out;
    TypeFlow tf = TypeFlow::from_entry(s.entry_types);
    for (size_t k = 0; k < s.insns.size(); k++) {
        const Instruction& insn = s.insns[k];
        const int pos = insn.origin >= 0 ? insn.origin : s.first_pos;
        std::array<uint8_t, 3> rs;
        int n = 0;
        insn.read_regs(rs, n);
        for (int i = 0; i < n; i++) out.reg_pos[rs[i]].push_back(pos);
        if (auto d = insn.def_reg()) out.reg_pos[*d].push_back(pos);
        if (auto a = tf.access(insn)) {
            if (a->region < 0 || a->var_off) {
                out.mem_var = true;
                out.mem_var_pos.push_back(pos);
            } else {
                out.mem_pos[a->region].push_back(
                    {pos, {a->const_off, a->const_off + a->width}});
            }
        }
        tf.apply(insn);
    }
    return out;
}

bool mem_conflict(const Access& a, const Access& b) {
    if (!a.is_store && !b.is_store) return false;
    if (a.region < 0 || b.region < 0) return true;
    if (a.region != b.region) return false;
    if (a.var || b.var) return true;
    return a.off < b.off + b.width && b.off < a.off + a.width;
}

}  // namespace

std::vector<Instruction> recompose(std::span<const RecomposeInput> slices,
                                   std::span<const Instruction> block) {
    std::vector<Node> nodes;
    std::map<int, int> by_origin;                       // origin -> node index
    std::map<std::pair<uint64_t, std::vector<ValueId>>, int> by_struct;
    std::vector<SliceResourceUse> uses(slices.size());
    int64_t unique_counter = 0;

    for (size_t si = 0; si < slices.size(); si++) {
        const RecomposeInput& in = slices[si];
        uses[si] = slice_resource_use(*in.slice);

        TypeFlow tf = TypeFlow::from_entry(in.slice->entry_types);
        std::array<int, kNumRegs> local_writer;
        local_writer.fill(-1);  // node index of the in-slice definition
        struct LocalStore {
            int node;
            Access acc;
        };
        std::vector<LocalStore> local_stores;
        bool var_store_seen = false;

        for (size_t ii = 0; ii < in.insns.size(); ii++) {
            const Instruction& insn = in.insns[ii];
            auto acc = tf.access(insn);

            // Value identities of everything this instruction reads.
            std::vector<ValueId> producers;
            auto reg_value = [&](uint8_t r) -> ValueId {
                if (local_writer[r] >= 0) return {kTagNode, local_writer[r]};
                return {kTagEntryReg, (static_cast<int64_t>(r) << 32) ^
                                          (prefix_def(block, r, in.slice->first_pos) + 1)};
            };
            std::array<uint8_t, 3> rs;
            int n = 0;
            insn.read_regs(rs, n);
            for (int i = 0; i < n; i++) producers.push_back(reg_value(rs[i]));
            if (insn.kind == InsnKind::Load && acc) {
                if (acc->region < 0 || acc->var_off || var_store_seen) {
                    producers.push_back({kTagUnique, unique_counter++});
                } else {
                    for (int b = 0; b < acc->width; b++) {
                        const int64_t off = acc->const_off + b;
                        int writer = -1;
                        for (const auto& st : local_stores) {
                            if (st.acc.region == acc->region && !st.acc.var &&
                                off >= st.acc.off && off < st.acc.off + st.acc.width) {
                                writer = st.node;
                            }
                        }
                        if (writer >= 0) {
                            producers.push_back({kTagNode, writer});
                        } else {
                            producers.push_back(
                                {kTagEntryByte,
                                 (static_cast<int64_t>(acc->region) << 40) ^ off});
                        }
                    }
                }
            }

            // Deduplicate: origin identity first, then structure + producers.
            int rep;
            if (insn.origin >= 0) {
                auto [it, fresh] = by_origin.try_emplace(insn.origin, -1);
                if (fresh || it->second < 0) {
                    rep = static_cast<int>(nodes.size());
                    it->second = rep;
                } else {
                    rep = it->second;
                }
            } else {
                auto key = std::make_pair(hash_instruction(insn), producers);
                auto [it, fresh] = by_struct.try_emplace(key, -1);
                if (!fresh && it->second >= 0 && nodes[it->second].insn == insn) {
                    rep = it->second;
                } else {
                    rep = static_cast<int>(nodes.size());
                    it->second = rep;
                }
            }
            if (rep == static_cast<int>(nodes.size())) {
                Node node;
                node.insn = insn;
                node.origin = insn.origin;
                node.si = static_cast<int>(si);
                node.ii = static_cast<int>(ii);
                node.synthesized = insn.origin < 0;
                if (acc) {
                    node.access = Access{acc->region, acc->const_off, acc->var_off, acc->width,
                                         acc->is_store};
                }
                node.producers = std::move(producers);
                nodes.push_back(std::move(node));
            }

            if (auto d = insn.def_reg()) local_writer[*d] = rep;
            if (acc && acc->is_store) {
                if (acc->region < 0 || acc->var_off) var_store_seen = true;
                local_stores.push_back(
                    {rep, Access{acc->region, acc->const_off, acc->var_off, acc->width, true}});
            }
            tf.apply(insn);
        }
    }

    // Dependency edges between conflicting nodes. Direction follows origin
    // order when both nodes carry provenance; synthesized nodes anchor at the
    // original positions where their slice touched the contested resource.
    const int N = static_cast<int>(nodes.size());
    std::vector<std::vector<int>> succ(N);
    std::vector<int> indeg(N, 0);

    // -1: u first, 1: v first, 0: no constraint. Throws on contradiction.
    auto anchor_direction = [&](const Node& u, const Node& v,
                                const std::vector<int>& upos) -> int {
        if (upos.empty()) return u.si < v.si ? -1 : 1;
        const int lo = *std::min_element(upos.begin(), upos.end());
        const int hi = *std::max_element(upos.begin(), upos.end());
        if (hi < v.origin) return -1;
        if (lo > v.origin) return 1;
        throw CyclicDependencyError("replacement interleaves with a conflicting instruction");
    };

    auto resource_positions = [&](const Node& node, uint8_t reg, bool is_mem,
                                  const Access* macc) -> std::vector<int> {
        const SliceResourceUse& use = uses[node.si];
        if (!is_mem) {
            auto it = use.reg_pos.find(reg);
            return it == use.reg_pos.end() ? std::vector<int>{} : it->second;
        }
        std::vector<int> out = use.mem_var_pos;
        if (macc && macc->region >= 0) {
            if (auto it = use.mem_pos.find(macc->region); it != use.mem_pos.end()) {
                for (const auto& [pos, range] : it->second) {
                    if (macc->var ||
                        (range.first < macc->off + macc->width && macc->off < range.second)) {
                        out.push_back(pos);
                    }
                }
            }
        } else {
            for (const auto& entry : use.mem_pos) {
                for (const auto& [pos, range] : entry.second) out.push_back(pos);
            }
        }
        return out;
    };

    for (int a = 0; a < N; a++) {
        for (int b = a + 1; b < N; b++) {
            const Node& u = nodes[a];
            const Node& v = nodes[b];

            // Conflicting resources between u and v.
            bool reg_conf = false;
            uint8_t conf_reg = 0;
            auto check_reg = [&](const Node& w, const Node& x) {
                if (auto d = w.insn.def_reg()) {
                    if (x.insn.reads_reg(*d) || x.insn.def_reg() == d) {
                        reg_conf = true;
                        conf_reg = *d;
                    }
                }
            };
            check_reg(u, v);
            if (!reg_conf) check_reg(v, u);
            const bool mconf = u.access && v.access && mem_conflict(*u.access, *v.access);
            if (!reg_conf && !mconf) continue;

            int dir;  // -1: u before v, 1: v before u
            if (u.origin >= 0 && v.origin >= 0) {
                dir = u.origin < v.origin ? -1 : 1;
            } else if (u.si == v.si) {
                dir = u.ii < v.ii ? -1 : 1;
            } else if (u.synthesized && v.synthesized) {
                // Two replacements: order by original slice spans.
                const Slice* su = slices[u.si].slice;
                const Slice* sv = slices[v.si].slice;
                if (su->last_pos < sv->first_pos) {
                    dir = -1;
                } else if (sv->last_pos < su->first_pos) {
                    dir = 1;
                } else {
                    dir = std::make_pair(su->first_pos, u.si) <
                                  std::make_pair(sv->first_pos, v.si)
                              ? -1
                              : 1;
                }
            } else {
                int rdir = 0, mdir = 0;
                if (reg_conf) {
                    rdir = u.synthesized
                               ? anchor_direction(u, v, resource_positions(u, conf_reg, false, nullptr))
                               : -anchor_direction(v, u, resource_positions(v, conf_reg, false, nullptr));
                }
                if (mconf) {
                    mdir = u.synthesized
                               ? anchor_direction(u, v,
                                                  resource_positions(u, 0, true, &*v.access))
                               : -anchor_direction(v, u,
                                                   resource_positions(v, 0, true, &*u.access));
                }
                if (rdir != 0 && mdir != 0 && rdir != mdir)
                    throw CyclicDependencyError("contradictory resource ordering");
                dir = rdir != 0 ? rdir : mdir;
            }
            if (dir < 0) {
                succ[a].push_back(b);
                indeg[b]++;
            } else {
                succ[b].push_back(a);
                indeg[a]++;
            }
        }
    }

    // Stable Kahn: among ready nodes pick the smallest (slice, intra) key.
    // Nodes with no edges keep their stable position, which subsumes
    // appending dependency-free leftovers at the end.
    std::vector<int> order(N);
    for (int i = 0; i < N; i++) order[i] = i;
    std::sort(order.begin(), order.end(), [&](int x, int y) {
        return std::make_pair(nodes[x].si, nodes[x].ii) < std::make_pair(nodes[y].si, nodes[y].ii);
    });
    std::vector<Instruction> out;
    std::vector<bool> emitted(N, false);
    int remaining = N;
    while (remaining > 0) {
        bool progressed = false;
        for (int idx : order) {
            if (emitted[idx] || indeg[idx] != 0) continue;
            emitted[idx] = true;
            remaining--;
            progressed = true;
            out.push_back(nodes[idx].insn);
            for (int s : succ[idx]) indeg[s]--;
            break;  // restart scan to keep the stable order exact
        }
        if (!progressed) throw CyclicDependencyError("dependency cycle between slices");
    }
    return out;
}

}  // namespace bpfopt
