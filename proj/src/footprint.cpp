#include "footprint.hpp"

#include <algorithm>
#include <sstream>

namespace bpfopt {

namespace {

MemFootprint* find_or_insert(std::vector<MemFootprint>& mem, int16_t region) {
    auto it = std::lower_bound(mem.begin(), mem.end(), region,
                               [](const MemFootprint& m, int16_t r) { return m.region < r; });
    if (it == mem.end() || it->region != region) {
        it = mem.insert(it, MemFootprint{region, false, {}});
    }
    return &*it;
}

}  // namespace

void Footprint::add_mem_byte(int16_t region, int64_t off) {
    MemFootprint* m = find_or_insert(mem, region);
    if (m->whole_region) return;
    auto it = std::lower_bound(m->offsets.begin(), m->offsets.end(), off);
    if (it == m->offsets.end() || *it != off) m->offsets.insert(it, off);
}

void Footprint::add_mem_range(int16_t region, int64_t off, int64_t len) {
    for (int64_t i = 0; i < len; i++) add_mem_byte(region, off + i);
}

void Footprint::mark_whole_region(int16_t region) {
    MemFootprint* m = find_or_insert(mem, region);
    m->whole_region = true;
    m->offsets.clear();
}

std::vector<uint8_t> Footprint::regs() const {
    std::vector<uint8_t> out;
    for (uint8_t r = 0; r < kNumRegs; r++) {
        if (has_reg(r)) out.push_back(r);
    }
    return out;
}

std::string Footprint::to_string() const {
    std::ostringstream out;
    bool first = true;
    for (uint8_t r = 0; r < kNumRegs; r++) {
        if (!has_reg(r)) continue;
        if (!first) out << ",";
        out << "r" << int(r);
        first = false;
    }
    for (const auto& m : mem) {
        if (m.whole_region) {
            if (!first) out << ",";
            out << region_name(m.region) << "[*]";
            first = false;
            continue;
        }
        // Render as maximal contiguous ranges.
        size_t i = 0;
        while (i < m.offsets.size()) {
            size_t j = i;
            while (j + 1 < m.offsets.size() && m.offsets[j + 1] == m.offsets[j] + 1) j++;
            if (!first) out << ",";
            out << region_name(m.region) << "[" << m.offsets[i] << ".." << m.offsets[j] + 1 << ")";
            first = false;
            i = j + 1;
        }
    }
    return out.str();
}

namespace {

struct ByteView {
    bool init = false;
    uint8_t value = 0;
};

ByteView byte_at(const MachineState& s, int16_t region, int64_t off) {
    const MemRegion* r = s.find_region(region);
    if (!r || !r->contains(off) || !r->is_init(off)) return {};
    return {true, r->byte(off)};
}

bool reg_differs(uint8_t r, const MachineState& a, const RegTypeMap& ta, const MachineState& b,
                 const RegTypeMap& tb) {
    if (a.reg_init[r] != b.reg_init[r]) return true;
    if (!a.reg_init[r]) return false;  // uninitialized in both counts as equal
    if (a.regs[r] != b.regs[r]) return true;
    if (ta.type[r] != tb.type[r]) return true;
    if (ta.is_pointer(r) && ta.region[r] != tb.region[r]) return true;
    return false;
}

bool byte_differs(const MachineState& a, const MachineState& b, int16_t region, int64_t off) {
    ByteView x = byte_at(a, region, off);
    ByteView y = byte_at(b, region, off);
    if (x.init != y.init) return true;
    return x.init && x.value != y.value;
}

// Offsets a whole-region footprint has to visit: the union of both states'
// windows for that region.
std::pair<int64_t, int64_t> union_window(const MachineState& a, const MachineState& b,
                                         int16_t region) {
    int64_t lo = 0, hi = 0;
    bool any = false;
    for (const MachineState* s : {&a, &b}) {
        if (const MemRegion* r = s->find_region(region)) {
            lo = any ? std::min(lo, r->lo) : r->lo;
            hi = any ? std::max(hi, r->hi) : r->hi;
            any = true;
        }
    }
    return {lo, hi};
}

}  // namespace

bool footprint_equal(const Footprint& fp, const MachineState& a, const RegTypeMap& ta,
                     const MachineState& b, const RegTypeMap& tb) {
    for (uint8_t r = 0; r < kNumRegs; r++) {
        if (fp.has_reg(r) && reg_differs(r, a, ta, b, tb)) return false;
    }
    for (const auto& m : fp.mem) {
        if (m.whole_region) {
            auto [lo, hi] = union_window(a, b, m.region);
            for (int64_t off = lo; off < hi; off++) {
                if (byte_differs(a, b, m.region, off)) return false;
            }
        } else {
            for (int64_t off : m.offsets) {
                if (byte_differs(a, b, m.region, off)) return false;
            }
        }
    }
    return true;
}

std::string footprint_diff(const Footprint& fp, const MachineState& a, const RegTypeMap& ta,
                           const MachineState& b, const RegTypeMap& tb) {
    for (uint8_t r = 0; r < kNumRegs; r++) {
        if (fp.has_reg(r) && reg_differs(r, a, ta, b, tb)) {
            std::ostringstream out;
            out << "r" << int(r) << ": " << (a.reg_init[r] ? std::to_string(a.regs[r]) : "uninit")
                << " vs " << (b.reg_init[r] ? std::to_string(b.regs[r]) : "uninit");
            return out.str();
        }
    }
    for (const auto& m : fp.mem) {
        auto [lo, hi] = m.whole_region ? union_window(a, b, m.region)
                                       : std::pair<int64_t, int64_t>{0, 0};
        auto check = [&](int64_t off) -> std::string {
            if (!byte_differs(a, b, m.region, off)) return {};
            std::ostringstream out;
            ByteView x = byte_at(a, m.region, off);
            ByteView y = byte_at(b, m.region, off);
            out << region_name(m.region) << "[" << off
                << "]: " << (x.init ? std::to_string(x.value) : "uninit") << " vs "
                << (y.init ? std::to_string(y.value) : "uninit");
            return out.str();
        };
        if (m.whole_region) {
            for (int64_t off = lo; off < hi; off++) {
                if (auto d = check(off); !d.empty()) return d;
            }
        } else {
            for (int64_t off : m.offsets) {
                if (auto d = check(off); !d.empty()) return d;
            }
        }
    }
    return "";
}

int distance(const MachineState& s, const RegTypeMap& ts, const MachineState& t,
             const RegTypeMap& tt, const Footprint& fp) {
    int d = 0;
    for (uint8_t r = 0; r < kNumRegs; r++) {
        if (fp.has_reg(r) && reg_differs(r, s, ts, t, tt)) d++;
    }
    std::vector<int64_t> diffs;
    for (const auto& m : fp.mem) {
        diffs.clear();
        if (m.whole_region) {
            auto [lo, hi] = union_window(s, t, m.region);
            for (int64_t off = lo; off < hi; off++) {
                if (byte_differs(s, t, m.region, off)) diffs.push_back(off);
            }
        } else {
            for (int64_t off : m.offsets) {
                if (byte_differs(s, t, m.region, off)) diffs.push_back(off);
            }
        }
        // Greedy count of 8-byte windows covering all differing offsets.
        // A single store writes at most 8 contiguous bytes, so this is a
        // lower bound on the stores any sequence needs.
        size_t i = 0;
        while (i < diffs.size()) {
            const int64_t window_end = diffs[i] + 8;
            while (i < diffs.size() && diffs[i] < window_end) i++;
            d++;
        }
    }
    return d;
}

}  // namespace bpfopt
