#include <random>

#include "doctest.h"

#include "asm_text.hpp"
#include "recompose.hpp"
#include "slicer.hpp"
#include "support/fuzz.hpp"

using namespace bpfopt;

namespace {

std::vector<Instruction> insns(const char* text) { return parse_asm(text).insns; }

std::vector<RecomposeInput> as_inputs(const std::vector<Slice>& slices) {
    std::vector<RecomposeInput> in;
    for (const auto& s : slices) in.push_back({&s, s.insns, false});
    return in;
}

}  // namespace

TEST_CASE("mem_id packs offset, width and register") {
    CHECK(mem_id(10, 4, 4) == 1098);
    CHECK(mem_id(0, 0, 1) == 16);
    CHECK(mem_id(10, 0, 8) == 138);
}

TEST_CASE("single definition yields a single slice") {
    auto block = insns("r1 = r2");
    auto slices = extract_slices(block, default_block_live_out(block, RegTypeMap::all_scalar()),
                                 RegTypeMap::all_scalar(), 6);
    REQUIRE(slices.size() == 1);
    CHECK(slices[0].key == 1);
    CHECK(!slices[0].mem_keyed);
    CHECK(slices[0].insns.size() == 1);
}

TEST_CASE("independent chains stay in separate slices") {
    auto block = insns("r1 = r2\nr1 += 1\nr3 = r4");
    auto slices = extract_slices(block, default_block_live_out(block, RegTypeMap::all_scalar()),
                                 RegTypeMap::all_scalar(), 6);
    REQUIRE(slices.size() == 2);
    CHECK(slices[0].insns.size() == 2);
    CHECK(slices[0].key == 1);
    CHECK(slices[1].insns.size() == 1);
    CHECK(slices[1].key == 3);
}

TEST_CASE("adjacent stores merge into one slice") {
    auto block = insns("*(u8 *)(r10 - 2) = r1\nr1 >>= 8\n*(u8 *)(r10 - 1) = r1");
    auto slices = extract_slices(block, default_block_live_out(block, RegTypeMap::all_scalar()),
                                 RegTypeMap::all_scalar(), 6);
    REQUIRE(slices.size() == 1);
    CHECK(slices[0].mem_keyed);
    CHECK(slices[0].insns.size() == 3);
}

TEST_CASE("subsumed register chains are not separate units") {
    // The r1 load feeds r2's chain; with r1 dead at block end only the r2
    // slice remains and its live-out excludes r1.
    auto block = insns("r1 = *(u32 *)(r0 + 8)\nr2 = *(u32 *)(r0 + 12)\nr2 <<= 32\nr2 |= r1");
    RegTypeMap entry = RegTypeMap::all_scalar();
    entry.set(0, RegType::PtrMem, kFirstMemRegion);
    Footprint live;
    live.add_reg(2);
    auto slices = extract_slices(block, live, entry, 6);
    REQUIRE(slices.size() == 1);
    CHECK(slices[0].insns.size() == 4);
    CHECK(slices[0].live_out.has_reg(2));
    CHECK(!slices[0].live_out.has_reg(1));
}

TEST_CASE("window partitioning bounds slice sizes") {
    auto block = insns("r1 += 1\nr1 += 2\nr1 += 3\nr1 += 4\nr1 += 5\nr1 += 6\nr1 += 7");
    auto slices = extract_slices(block, default_block_live_out(block, RegTypeMap::all_scalar()),
                                 RegTypeMap::all_scalar(), 3);
    REQUIRE(slices.size() == 3);
    for (const auto& s : slices) CHECK(s.insns.size() <= 3);
    CHECK(slices[0].window_index == 0);
    CHECK(slices[1].window_index == 1);
    // Intermediate r1 values feed the next chunk, so r1 stays live out.
    CHECK(slices[0].live_out.has_reg(1));
}

TEST_CASE("control flow inside a block is malformed") {
    std::vector<Instruction> block = insns("r1 = 1");
    block.push_back(make_opaque("goto +1"));
    CHECK_THROWS_AS(
        extract_slices(block, Footprint{}, RegTypeMap::all_scalar(), 6),
        MalformedBlockError);
}

TEST_CASE("dead redefinition drops the stale chain") {
    auto block = insns("r1 = 7\nr1 = 9");
    Footprint live;
    live.add_reg(1);
    auto slices = extract_slices(block, live, RegTypeMap::all_scalar(), 6);
    REQUIRE(slices.size() == 1);
    CHECK(slices[0].insns.size() == 1);
    CHECK(slices[0].insns[0].imm == 9);
}

TEST_CASE("recompose merges identical shared loads across slices") {
    auto block = insns("r1 = *(u32 *)(r0 + 0)\nr2 = r1\nr2 += 5\nr3 = r1\nr3 += 9");
    RegTypeMap entry = RegTypeMap::all_scalar();
    entry.set(0, RegType::PtrMem, kFirstMemRegion);
    Footprint live;
    live.add_reg(2);
    live.add_reg(3);
    auto slices = extract_slices(block, live, entry, 6);
    REQUIRE(slices.size() == 2);  // r1's own chain is subsumed by both
    auto out = recompose(as_inputs(slices), block);
    int loads = 0;
    for (const auto& insn : out) loads += insn.kind == InsnKind::Load;
    CHECK(loads == 1);
    CHECK(out.size() == 5);
}

TEST_CASE("recompose of a single slice is the identity") {
    auto block = insns("r1 = r2\nr1 += 3");
    auto slices = extract_slices(block, default_block_live_out(block, RegTypeMap::all_scalar()),
                                 RegTypeMap::all_scalar(), 6);
    REQUIRE(slices.size() == 1);
    auto out = recompose(as_inputs(slices), block);
    CHECK(out == block);
}

TEST_CASE("semantic preservation: extract then recompose on fuzzed blocks") {
    std::mt19937_64 rng(2024);
    RegTypeMap entry = RegTypeMap::all_scalar();
    int checked = 0;
    for (int trial = 0; trial < 300; trial++) {
        auto block = fuzz::random_block(rng, 2, 10);
        Footprint live = default_block_live_out(block, entry);
        std::vector<Slice> slices;
        try {
            slices = extract_slices(block, live, entry, 4);
        } catch (const MalformedBlockError&) {
            continue;
        }
        for (const auto& s : slices) CHECK(s.insns.size() <= 4);
        auto out = recompose(as_inputs(slices), block);

        for (int k = 0; k < 20; k++) {
            MachineState s0 = fuzz::random_state(rng, entry, block);
            auto want = interpret(block, s0, entry);
            auto got = interpret(out, s0, entry);
            if (!want.ok()) continue;
            REQUIRE(got.ok());
            const bool equal = footprint_equal(live, want.state, want.types, got.state, got.types);
            if (!equal) {
                CAPTURE(print_asm(Program::from_instructions(block)));
                CAPTURE(print_asm(Program::from_instructions(out)));
                CAPTURE(footprint_diff(live, want.state, want.types, got.state, got.types));
            }
            REQUIRE(equal);
            checked++;
        }
    }
    CHECK(checked > 1000);
}
