#include <random>

#include "doctest.h"

#include "asm_text.hpp"
#include "footprint.hpp"
#include "machine.hpp"
#include "support/fuzz.hpp"
#include "testgen.hpp"

using namespace bpfopt;

namespace {

MachineState with_stack(MachineState s, int64_t lo, int64_t hi) {
    s.ensure_region(kStackRegion, lo, hi);
    return s;
}

std::vector<Instruction> insns(const char* text) { return parse_asm(text).insns; }

}  // namespace

TEST_CASE("forced arithmetic from any state") {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 50; i++) {
        MachineState s;
        for (uint8_t r = 0; r < kNumRegs; r++) s.set_reg(r, rng());
        auto res = interpret(insns("r1 = 5\nr1 <<= 2"), s, RegTypeMap::all_scalar());
        REQUIRE(res.ok());
        CHECK(res.state.regs[1] == 20);
    }
}

TEST_CASE("load/shift/or composition equals one wide load on random ctx images") {
    RegTypeMap types = RegTypeMap::all_scalar();
    types.set(0, RegType::PtrMem, kFirstMemRegion);
    auto a = insns("r1 = *(u32 *)(r0 + 8)\nr2 = *(u32 *)(r0 + 12)\nr2 <<= 32\nr2 |= r1");
    auto b = insns("r2 = *(u64 *)(r0 + 8)");

    std::mt19937_64 rng(42);
    for (int i = 0; i < 1000; i++) {
        MachineState s;
        s.set_reg(0, 0);
        auto& region = s.ensure_region(kFirstMemRegion, 0, 24);
        for (int64_t off = 0; off < 24; off++) region.set_byte(off, static_cast<uint8_t>(rng()));
        auto ra = interpret(a, s, types);
        auto rb = interpret(b, s, types);
        REQUIRE(ra.ok());
        REQUIRE(rb.ok());
        CHECK(ra.state.regs[2] == rb.state.regs[2]);
    }
}

TEST_CASE("positive stack offsets are out of bounds") {
    MachineState s = with_stack({}, kStackLo, kStackHi);
    auto res = interpret(insns("r1 = *(u32 *)(r10 + 0)"), s, RegTypeMap::all_scalar());
    REQUIRE(!res.ok());
    CHECK(res.fault->kind == Fault::Kind::OutOfBounds);
}

TEST_CASE("reading uninitialized bytes or registers faults") {
    MachineState s = with_stack({}, kStackLo, kStackHi);
    auto r1 = interpret(insns("r1 = *(u8 *)(r10 - 4)"), s, RegTypeMap::all_scalar());
    REQUIRE(!r1.ok());
    CHECK(r1.fault->kind == Fault::Kind::UninitRead);

    RegTypeMap uninit_entry = RegTypeMap::all_scalar();
    uninit_entry.set(3, RegType::Uninit);
    auto r2 = interpret(insns("r1 = r3"), MachineState{}, uninit_entry);
    REQUIRE(!r2.ok());
    CHECK(r2.fault->kind == Fault::Kind::UninitRead);
}

TEST_CASE("dereferencing a scalar is a bad region fault") {
    auto res = interpret(insns("r1 = 64\nr2 = *(u8 *)(r1 + 0)"), MachineState{},
                         RegTypeMap::all_scalar());
    REQUIRE(!res.ok());
    CHECK(res.fault->kind == Fault::Kind::BadRegion);
}

TEST_CASE("division and modulo by zero use kernel runtime semantics") {
    auto res = interpret(insns("r1 = 7\nr2 = 0\nr1 /= r2"), MachineState{},
                         RegTypeMap::all_scalar());
    REQUIRE(res.ok());
    CHECK(res.state.regs[1] == 0);

    res = interpret(insns("r1 = 7\nr2 = 0\nr1 %= r2"), MachineState{}, RegTypeMap::all_scalar());
    REQUIRE(res.ok());
    CHECK(res.state.regs[1] == 7);

    res = interpret(insns("r1 = 7\nw2 = 0\nw1 %= w2"), MachineState{}, RegTypeMap::all_scalar());
    REQUIRE(res.ok());
    CHECK(res.state.regs[1] == 7);  // 32-bit mod by zero zero-extends the old value
}

TEST_CASE("alu32 results zero-extend") {
    auto res = interpret(insns("r1 = -1\nw1 += 0"), MachineState{}, RegTypeMap::all_scalar());
    REQUIRE(res.ok());
    CHECK(res.state.regs[1] == 0xffffffffull);
}

TEST_CASE("little-endian store/load composition") {
    auto res = interpret(insns("r1 = 0xbeef\n*(u16 *)(r10 - 2) = r1\nr2 = *(u8 *)(r10 - 2)"),
                         with_stack({}, kStackLo, kStackHi), RegTypeMap::all_scalar());
    REQUIRE(res.ok());
    CHECK(res.state.regs[2] == 0xef);
}

TEST_CASE("distance identity and register counting") {
    std::mt19937_64 rng(3);
    auto block = fuzz::random_block(rng, 3, 8);
    MachineState s = fuzz::random_state(rng, RegTypeMap::all_scalar(), block);
    Footprint fp;
    for (uint8_t r = 0; r < 10; r++) fp.add_reg(r);
    RegTypeMap t = RegTypeMap::all_scalar();
    CHECK(distance(s, t, s, t, fp) == 0);

    MachineState s2 = s;
    s2.regs[1] ^= 1;
    s2.regs[4] ^= 2;
    s2.regs[7] ^= 3;
    CHECK(distance(s, t, s2, t, fp) == 3);
}

TEST_CASE("a single 16-byte differing run needs two stores") {
    MachineState a = with_stack({}, kStackLo, kStackHi);
    MachineState b = with_stack({}, kStackLo, kStackHi);
    Footprint fp;
    for (int64_t off = -32; off < 0; off++) {
        a.find_region(kStackRegion)->set_byte(off, 1);
        b.find_region(kStackRegion)->set_byte(off, off >= -24 && off < -8 ? 2 : 1);
        fp.add_mem_byte(kStackRegion, off);
    }
    RegTypeMap t = RegTypeMap::all_scalar();
    CHECK(distance(a, t, b, t, fp) == 2);
}

TEST_CASE("distance admissibility against random programs") {
    // For any sequence transforming s into t, distance(s, t) never exceeds
    // the sequence length.
    std::mt19937_64 rng(1234);
    RegTypeMap entry = RegTypeMap::all_scalar();
    for (int trial = 0; trial < 400; trial++) {
        auto block = fuzz::random_block(rng, 1, 6);
        MachineState s0 = fuzz::random_state(rng, entry, block);
        auto res = interpret(block, s0, entry);
        if (!res.ok()) continue;
        Footprint fp = default_block_live_out(block, entry);
        auto d = distance(s0, entry, res.state, res.types, fp);
        CHECK(d <= static_cast<int>(block.size()));
    }
}

TEST_CASE("state snapshot text round trip") {
    MachineState s;
    s.set_reg(0, 0xdeadbeef);
    s.set_reg(10, 0);
    auto& st = s.ensure_region(kStackRegion, kStackLo, kStackHi);
    st.set_byte(-2, 0xab);
    st.set_byte(-1, 0xcd);
    RegTypeMap t = RegTypeMap::all_scalar();
    t.set(0, RegType::PtrMem, kFirstMemRegion);

    std::string text = state_to_text(s, t);
    MachineState s2;
    RegTypeMap t2 = RegTypeMap::all_scalar();
    state_from_text(text, s2, t2);
    CHECK(s2.regs[0] == 0xdeadbeef);
    CHECK(t2.type[0] == RegType::PtrMem);
    REQUIRE(s2.find_region(kStackRegion) != nullptr);
    CHECK(s2.find_region(kStackRegion)->byte(-2) == 0xab);
    CHECK(s2.find_region(kStackRegion)->byte(-1) == 0xcd);
    CHECK(!s2.find_region(kStackRegion)->is_init(-3));
}

TEST_CASE("interpret is deterministic") {
    std::mt19937_64 rng(77);
    auto block = fuzz::random_block(rng, 4, 10);
    MachineState s = fuzz::random_state(rng, RegTypeMap::all_scalar(), block);
    auto a = interpret(block, s, RegTypeMap::all_scalar());
    auto b = interpret(block, s, RegTypeMap::all_scalar());
    CHECK(a.ok() == b.ok());
    if (a.ok()) CHECK(a.state == b.state);
}
