#include "slicer.hpp"

#include <algorithm>
#include <array>
#include <set>

#include "typeflow.hpp"

namespace bpfopt {

int64_t mem_id(uint8_t base, int16_t off, uint8_t width_bytes) {
    return (static_cast<int64_t>(off) << 8) | (static_cast<int64_t>(width_bytes) << 4) |
           static_cast<int64_t>(base);
}

std::vector<uint8_t> Slice::reg_universe() const {
    std::set<uint8_t> regs;
    for (const auto& insn : insns) {
        if (auto d = insn.def_reg()) regs.insert(*d);
        std::array<uint8_t, 3> rs;
        int n = 0;
        insn.read_regs(rs, n);
        for (int i = 0; i < n; i++) regs.insert(rs[i]);
    }
    return {regs.begin(), regs.end()};
}

Footprint default_block_live_out(std::span<const Instruction> block,
                                 const RegTypeMap& entry_types) {
    Footprint fp;
    for (uint8_t r = 0; r < kFramePointer; r++) fp.add_reg(r);
    TypeFlow tf = TypeFlow::from_entry(entry_types);
    for (const auto& insn : block) {
        if (auto a = tf.access(insn); a && a->is_store && a->region >= 0) {
            if (a->var_off) {
                fp.mark_whole_region(a->region);
            } else {
                fp.add_mem_range(a->region, a->const_off, a->width);
            }
        }
        tf.apply(insn);
    }
    return fp;
}

BlockLiveness compute_block_liveness(std::span<const Instruction> block,
                                     const Footprint& block_live_out,
                                     const RegTypeMap& entry_types) {
    const int n = static_cast<int>(block.size());

    // Forward pass for the static access facts at each instruction.
    std::vector<TypeFlow::Access> acc(n);
    std::vector<bool> has_acc(n, false);
    TypeFlow tf = TypeFlow::from_entry(entry_types);
    for (int i = 0; i < n; i++) {
        if (auto a = tf.access(block[i])) {
            acc[i] = *a;
            has_acc[i] = true;
        }
        tf.apply(block[i]);
    }

    BlockLiveness lv;
    lv.at.resize(n + 1);
    lv.at[n] = block_live_out;
    for (int i = n - 1; i >= 0; i--) {
        Footprint cur = lv.at[i + 1];
        const Instruction& insn = block[i];

        if (auto d = insn.def_reg()) cur.reg_mask &= ~(uint16_t(1) << *d);
        if (has_acc[i] && acc[i].is_store && acc[i].region >= 0 && !acc[i].var_off) {
            // A store with a statically known range kills those bytes.
            for (auto& m : cur.mem) {
                if (m.region != acc[i].region || m.whole_region) continue;
                auto& offs = m.offsets;
                offs.erase(std::remove_if(offs.begin(), offs.end(),
                                          [&](int64_t o) {
                                              return o >= acc[i].const_off &&
                                                     o < acc[i].const_off + acc[i].width;
                                          }),
                           offs.end());
            }
        }

        std::array<uint8_t, 3> rs;
        int cnt = 0;
        insn.read_regs(rs, cnt);
        for (int k = 0; k < cnt; k++) cur.add_reg(rs[k]);
        if (has_acc[i] && !acc[i].is_store && acc[i].region >= 0) {
            if (acc[i].var_off) {
                cur.mark_whole_region(acc[i].region);
            } else {
                cur.add_mem_range(acc[i].region, acc[i].const_off, acc[i].width);
            }
        }
        lv.at[i] = std::move(cur);
    }
    return lv;
}

namespace {

std::vector<int> union_sorted(const std::vector<int>& a, const std::vector<int>& b) {
    std::vector<int> out;
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

// A store destination chain. Base register identity is refined with a
// definition generation so that re-pointing the base never aliases two
// chains that target different memory.
struct StoreChain {
    int64_t key;
    uint8_t base;
    int gen;
    int64_t lo, hi;  // byte range [lo, hi) relative to the base register
    bool read = false;
    std::vector<int> members;
};

struct Unit {
    int64_t key;
    bool mem_keyed;
    std::vector<int> members;
};

}  // namespace

std::vector<Slice> extract_slices(std::span<const Instruction> block,
                                  const Footprint& block_live_out,
                                  const RegTypeMap& entry_types, int window) {
    if (window < 1) throw std::invalid_argument("window must be positive");
    for (const auto& insn : block) {
        if (insn.is_opaque()) throw MalformedBlockError("control flow inside block");
    }
    const int n = static_cast<int>(block.size());

    // Slice construction: per-destination computation chains. Register chains
    // are replaced on redefinition (an unread chain is dead by then); store
    // chains stay, keyed by (base, generation, byte range).
    std::array<std::vector<int>, kNumRegs> reg_chain;
    std::array<bool, kNumRegs> reg_chain_set{};
    std::array<int, kNumRegs> gen{};
    std::vector<StoreChain> stores;

    for (int i = 0; i < n; i++) {
        const Instruction& insn = block[i];
        std::vector<int> chain{i};
        auto absorb_reg = [&](uint8_t r) {
            if (reg_chain_set[r]) chain = union_sorted(chain, reg_chain[r]);
        };

        if (insn.is_store()) {
            absorb_reg(insn.dst);
            if (insn.kind == InsnKind::Store) absorb_reg(insn.src);
            const int64_t lo = insn.off;
            const int64_t hi = lo + insn.width;
            // Full overwrite of an unread store chain makes it dead.
            std::erase_if(stores, [&](const StoreChain& sc) {
                return sc.base == insn.dst && sc.gen == gen[insn.dst] && !sc.read &&
                       sc.lo >= lo && sc.hi <= hi;
            });
            stores.push_back(StoreChain{mem_id(insn.dst, insn.off, insn.width), insn.dst,
                                        gen[insn.dst], lo, hi, false, std::move(chain)});
            continue;
        }

        if (insn.kind == InsnKind::Load) {
            absorb_reg(insn.src);
            // Absorb every store chain whose bytes this load may read.
            const int64_t lo = insn.off;
            const int64_t hi = lo + insn.width;
            for (auto& sc : stores) {
                if (sc.base == insn.src && sc.gen == gen[insn.src] && sc.lo < hi && lo < sc.hi) {
                    sc.read = true;
                    chain = union_sorted(chain, sc.members);
                }
            }
        } else {  // ALU
            if (insn.reads_reg(insn.dst)) absorb_reg(insn.dst);
            if (!insn.src_is_imm && insn.reads_reg(insn.src)) absorb_reg(insn.src);
        }
        gen[insn.dst]++;
        reg_chain[insn.dst] = std::move(chain);
        reg_chain_set[insn.dst] = true;
    }

    // Slice refinement: merge stores to touching or overlapping byte ranges
    // off the same base register (same generation).
    std::vector<Unit> units;
    {
        std::stable_sort(stores.begin(), stores.end(), [](const StoreChain& a, const StoreChain& b) {
            if (a.base != b.base) return a.base < b.base;
            if (a.gen != b.gen) return a.gen < b.gen;
            return a.lo < b.lo;
        });
        for (size_t i = 0; i < stores.size();) {
            size_t j = i;
            int64_t hi = stores[i].hi;
            std::vector<int> members = stores[i].members;
            while (j + 1 < stores.size() && stores[j + 1].base == stores[i].base &&
                   stores[j + 1].gen == stores[i].gen && stores[j + 1].lo <= hi) {
                j++;
                hi = std::max(hi, stores[j].hi);
                members = union_sorted(members, stores[j].members);
            }
            units.push_back(Unit{stores[i].key, true, std::move(members)});
            i = j + 1;
        }
        for (uint8_t r = 0; r < kNumRegs; r++) {
            if (reg_chain_set[r]) units.push_back(Unit{r, false, reg_chain[r]});
        }
    }

    // Drop chains fully contained in another chain; the containing unit's
    // live-out carries their destination requirement whenever it is live.
    std::sort(units.begin(), units.end(), [](const Unit& a, const Unit& b) {
        if (a.members.size() != b.members.size()) return a.members.size() > b.members.size();
        if (a.members != b.members) return a.members < b.members;
        if (a.mem_keyed != b.mem_keyed) return a.mem_keyed > b.mem_keyed;
        return a.key < b.key;
    });
    std::vector<Unit> kept;
    for (auto& c : units) {
        bool subsumed = false;
        for (const auto& k : kept) {
            if (std::includes(k.members.begin(), k.members.end(), c.members.begin(),
                              c.members.end())) {
                subsumed = true;
                break;
            }
        }
        if (!subsumed) kept.push_back(std::move(c));
    }
    std::sort(kept.begin(), kept.end(), [](const Unit& a, const Unit& b) {
        if (a.members.front() != b.members.front()) return a.members.front() < b.members.front();
        return a.key < b.key;
    });

    // Shared analyses for live-outs and entry types.
    BlockLiveness lv = compute_block_liveness(block, block_live_out, entry_types);
    std::vector<RegTypeMap> types_at(n + 1);
    {
        TypeFlow tf = TypeFlow::from_entry(entry_types);
        types_at[0] = tf.reg_types();
        for (int i = 0; i < n; i++) {
            tf.apply(block[i]);
            types_at[i + 1] = tf.reg_types();
        }
    }

    // Partition each unit into window-sized chunks.
    std::vector<Slice> out;
    for (const auto& unit : kept) {
        const int total = static_cast<int>(unit.members.size());
        const int chunks = (total + window - 1) / window;
        for (int c = 0; c < chunks; c++) {
            const int lo = c * window;
            const int hi = std::min(total, lo + window);
            Slice s;
            s.key = unit.key;
            s.mem_keyed = unit.mem_keyed;
            s.window_index = c;
            s.window_size = window;
            s.first_pos = unit.members[lo];
            s.last_pos = unit.members[hi - 1];
            for (int k = lo; k < hi; k++) s.insns.push_back(block[unit.members[k]]);
            s.entry_types = types_at[s.first_pos];
            s.live_out = lv.after(s.last_pos);
            out.push_back(std::move(s));
        }
    }
    return out;
}

}  // namespace bpfopt
