/*
 * Copyright (C) 2026 the redmule-sim authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Single wide memory port model: the Ready/Valid-gated beat schedule that
// interleaves X/Y/Z traffic into the gaps between the periodic W accesses,
// plus pluggable memory behaviour (ideal / fixed latency / stall pattern).
//
// Time is organised in periods of (P+1) cycles. In steady state the W buffer
// takes one beat per period (prefetched fifo_depth periods ahead of use) and
// the remaining P cycles of each period are gap slots that carry, earliest
// deadline first:
//   - the L X-buffer lines of the next X group (one group feeds P+1 passes),
//   - the L Y lines of the next tile (the buffer frees once pass 0 consumed
//     the current tile's Y elements),
//   - the L Z store lines of the previous tile (available after its pipeline
//     drain, and always ahead of the Y reload that reuses the buffer).
// Every beat moves one buffer line of H*(P+1) elements at the I/O precision.
//
// The schedule is computed up front against the ideal timeline; execution may
// only shift beats later (memory stalls shift the port, missing operands
// stall the datapath), so buffer capacities implied by the planned order are
// never exceeded.

#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "redmule/tiling.hpp"

namespace redmule {

enum class AccessKind : uint8_t { LoadX = 0, LoadW = 1, LoadY = 2, StoreZ = 3 };

inline const char* access_kind_name(AccessKind k) {
    switch (k) {
        case AccessKind::LoadX: return "LD_X";
        case AccessKind::LoadW: return "LD_W";
        case AccessKind::LoadY: return "LD_Y";
        default: return "ST_Z";
    }
}

struct AccessRecord {
    uint64_t cycle;
    AccessKind kind;
    uint32_t elems;
    uint64_t addr;
    uint32_t row_block;
    uint32_t col_block;
};

using AccessTrace = std::vector<AccessRecord>;

struct MemoryModel {
    enum class Mode : uint8_t { Ideal, FixedLatency, StallPattern };
    Mode mode = Mode::Ideal;
    uint32_t latency = 0;
    std::vector<uint64_t> stall_set;  // sorted, unique

    static MemoryModel ideal() { return {}; }
    static MemoryModel fixed_latency(uint32_t n) {
        return {Mode::FixedLatency, n, {}};
    }
    static MemoryModel stall_pattern(std::vector<uint64_t> cycles) {
        std::sort(cycles.begin(), cycles.end());
        cycles.erase(std::unique(cycles.begin(), cycles.end()), cycles.end());
        return {Mode::StallPattern, 0, std::move(cycles)};
    }

    bool stalled_at(uint64_t t) const {
        return mode == Mode::StallPattern &&
               std::binary_search(stall_set.begin(), stall_set.end(), t);
    }
    uint32_t load_latency() const { return mode == Mode::FixedLatency ? latency : 0; }
};

struct bandwidth_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// One port transaction: a full buffer line.
struct PortIntent {
    AccessKind kind;
    uint32_t tile_ord;    // row_block * col_blocks + col_block
    uint32_t row_block;
    uint32_t col_block;
    uint32_t beat;        // buffer row for X/Y/Z, column index for W
    uint32_t group;       // X group index / W pass index
    uint64_t addr;
    uint32_t elems;
    uint64_t planned_cycle;       // ideal-memory cycle; execution never earlier
    int64_t store_ready_adv = -1; // ST_Z: gating advance (drain completes P+1 cycles after it)
};

struct StreamSchedule {
    TilePlan tile;
    uint64_t tile_advances = 0;   // issue advances per tile (passes * slots)
    uint64_t tile_stride = 0;     // advances per tile incl. the bookkeeping cycle
    uint64_t total_advances = 0;  // incl. tail pipeline flush
    uint64_t first_advance_cycle = 0;
    uint32_t late_placements = 0; // gap beats that missed their deadline (0 for sane configs)
    std::vector<PortIntent> intents;                         // sorted by planned_cycle
    std::vector<std::pair<uint64_t, uint32_t>> requirements; // (advance, intent idx), sorted
    uint64_t flush_advance(uint32_t tile_ord) const {
        return uint64_t(tile_ord) * tile_stride + tile_advances - 1 +
               uint64_t(flush_extra);
    }
    uint32_t flush_extra = 0;  // (H-1)*(P+1)
};

// Gap-arithmetic feasibility. With P = 0 every cycle of a running tile is a
// W slot, so a schedule that needs any X refill, Y reload or Z drain beside
// the W stream has zero gap cycles to put them in and can never make
// progress. Merely *tight* gap budgets are not an error: beats slip past
// their deadlines and the datapath stalls, as the handshake demands.
inline std::string bandwidth_check(const ArrayConfig& cfg, const TilePlan& plan) {
    const bool needs_gap_traffic = plan.x_groups > 1 || plan.tiles() > 1;
    if (cfg.ce_pipe == 0 && needs_gap_traffic)
        return "bandwidth infeasible: P=0 leaves zero gap cycles between W accesses, the " +
               std::to_string(plan.tiles()) + "-tile plan cannot interleave X/Y/Z beats";
    return {};
}

// Steady-state rate headroom: gap slots per tile versus the X/Y/Z beats that
// must ride in them. Sweeps use this to annotate stall-bound configurations.
inline bool bandwidth_sustains_full_rate(const ArrayConfig& cfg, const TilePlan& plan) {
    const uint64_t gap_capacity = uint64_t(plan.passes_per_tile) * cfg.ce_width * cfg.ce_pipe;
    uint64_t demand = uint64_t(cfg.ce_height) * (plan.x_groups - 1);
    if (plan.tiles() > 1) demand += uint64_t(cfg.ce_height) * 3;  // next X group + Y + Z
    return gap_capacity >= demand;
}

enum class HandshakeOutcome : uint8_t { Transferred, NotReady, MemStall };

// One port-side Ready/Valid evaluation for the head intent at cycle t.
// Loads are valid once their planned slot is reached; stores additionally
// wait for the producing tile's drain (store_ready_cycle, the cycle after
// which the staged line exists). The memory side withholds its handshake on
// stalled cycles.
inline HandshakeOutcome handshake_step(const PortIntent& intent, const MemoryModel& mem,
                                       uint64_t t, uint64_t store_ready_cycle = 0) {
    if (t < intent.planned_cycle) return HandshakeOutcome::NotReady;
    if (intent.kind == AccessKind::StoreZ &&
        (store_ready_cycle == UINT64_MAX || t <= store_ready_cycle))
        return HandshakeOutcome::NotReady;
    if (mem.stalled_at(t)) return HandshakeOutcome::MemStall;
    return HandshakeOutcome::Transferred;
}

namespace detail {

struct GapIntent {
    PortIntent intent;
    uint64_t earliest;
    uint64_t deadline;  // must be planned strictly before this cycle (loads)
    int prio;           // tie-break: lower first
};

}  // namespace detail

// Builds the full port intent sequence and the advance-side requirement list
// for one run. Throws bandwidth_error for infeasible configurations.
inline StreamSchedule issue_schedule(const ArrayConfig& cfg, const TilePlan& plan) {
    if (auto msg = cfg.validate(); !msg.empty()) throw std::invalid_argument(msg);
    if (auto msg = bandwidth_check(cfg, plan); !msg.empty()) throw bandwidth_error(msg);

    const uint32_t L = cfg.ce_height;
    const uint32_t H = cfg.ce_width;
    const uint32_t period = cfg.ce_pipe + 1;
    const uint32_t S = cfg.row_pipe_slots();
    const uint32_t PP = plan.passes_per_tile;
    const uint32_t CB = plan.col_blocks;
    const uint32_t T = plan.tiles();
    const uint32_t G = plan.x_groups;
    const uint32_t esz = cfg.io_elem_bits() / 8;
    const uint64_t x_width = uint64_t(G) * S;  // transfer-padded X row length
    const uint64_t kp = plan.padded_k;

    StreamSchedule s;
    s.tile = plan;
    s.tile_advances = uint64_t(PP) * S;
    s.tile_stride = s.tile_advances + 1;
    s.flush_extra = (H - 1) * period;
    s.total_advances = uint64_t(T) * s.tile_advances + (T - 1) + s.flush_extra;

    const uint64_t total_w = uint64_t(T) * PP * H;
    const uint32_t pre_w = uint32_t(std::min<uint64_t>(cfg.fifo_depth, total_w));
    const uint64_t c0 = 2ull * L + pre_w;
    s.first_advance_cycle = c0;

    constexpr uint64_t kBaseX = 0x00000000, kBaseW = 0x10000000, kBaseY = 0x20000000,
                       kBaseZ = 0x30000000;

    auto adv_of = [&](uint32_t tile, uint64_t within) {
        return uint64_t(tile) * s.tile_stride + within;
    };
    auto w_need_adv = [&](uint64_t j) {  // j = global W period index
        uint32_t tile = uint32_t(j / (uint64_t(PP) * H));
        uint64_t rem = j % (uint64_t(PP) * H);
        uint64_t pass = rem / H, col = rem % H;
        return adv_of(tile, pass * S + col * period);
    };

    std::vector<PortIntent> w_intents;
    w_intents.reserve(total_w);

    for (uint64_t j = 0; j < total_w; ++j) {
        uint32_t tile = uint32_t(j / (uint64_t(PP) * H));
        uint64_t rem = j % (uint64_t(PP) * H);
        uint32_t pass = uint32_t(rem / H), col = uint32_t(rem % H);
        uint32_t rb = tile / CB, cb = tile % CB;
        PortIntent it{};
        it.kind = AccessKind::LoadW;
        it.tile_ord = tile;
        it.row_block = rb;
        it.col_block = cb;
        it.beat = col;
        it.group = pass;
        it.elems = S;
        it.addr = kBaseW + (uint64_t(pass) * H + col) * kp * esz + uint64_t(cb) * S * esz;
        it.planned_cycle = j < pre_w ? 2ull * L + j : c0 + w_need_adv(j - pre_w);
        w_intents.push_back(it);
    }

    // Preamble: Y lines then X group 0 of tile 0, back to back before c0.
    std::vector<PortIntent> pre_intents;
    for (uint32_t r = 0; r < L; ++r) {
        PortIntent it{};
        it.kind = AccessKind::LoadY;
        it.tile_ord = 0;
        it.beat = r;
        it.elems = S;
        it.addr = kBaseY + uint64_t(r) * kp * esz;
        it.planned_cycle = r;
        pre_intents.push_back(it);
    }
    for (uint32_t r = 0; r < L; ++r) {
        PortIntent it{};
        it.kind = AccessKind::LoadX;
        it.tile_ord = 0;
        it.beat = r;
        it.elems = S;
        it.addr = kBaseX + uint64_t(r) * x_width * esz;
        it.planned_cycle = L + r;
        pre_intents.push_back(it);
    }

    // Gap traffic: X groups, next-tile Y, previous-tile Z stores.
    std::vector<detail::GapIntent> gaps;
    for (uint32_t tile = 0; tile < T; ++tile) {
        uint32_t rb = tile / CB, cb = tile % CB;
        for (uint32_t g = (tile == 0 ? 1u : 0u); g < G; ++g) {
            uint64_t need = c0 + adv_of(tile, uint64_t(g) * period * S);
            uint64_t earliest = g == 0 ? c0 + adv_of(tile - 1, uint64_t(G - 1) * period * S)
                                       : c0 + adv_of(tile, uint64_t(g - 1) * period * S);
            for (uint32_t r = 0; r < L; ++r) {
                PortIntent it{};
                it.kind = AccessKind::LoadX;
                it.tile_ord = tile;
                it.row_block = rb;
                it.col_block = cb;
                it.beat = r;
                it.group = g;
                it.elems = S;
                it.addr = kBaseX + (uint64_t(rb) * L + r) * x_width * esz +
                          uint64_t(g) * S * esz;
                gaps.push_back({it, earliest, need, 2});
            }
        }
        if (tile >= 1) {
            uint64_t need = c0 + adv_of(tile, 0);
            uint64_t earliest = c0 + adv_of(tile - 1, S);
            for (uint32_t r = 0; r < L; ++r) {
                PortIntent it{};
                it.kind = AccessKind::LoadY;
                it.tile_ord = tile;
                it.row_block = rb;
                it.col_block = cb;
                it.beat = r;
                it.elems = S;
                it.addr = kBaseY + (uint64_t(rb) * L + r) * kp * esz + uint64_t(cb) * S * esz;
                gaps.push_back({it, earliest, need, 1});
            }
        }
    }
    for (uint32_t tile = 0; tile < T; ++tile) {
        uint32_t rb = tile / CB, cb = tile % CB;
        uint64_t flush_adv = s.flush_advance(tile);
        uint64_t earliest = c0 + flush_adv + period + 1;
        // Stores only need to finish before the accumulator bank is recycled
        // two tiles later (and before the run ends).
        uint64_t need = tile + 2 < T ? c0 + adv_of(tile + 2, 0) : ~0ull;
        for (uint32_t r = 0; r < L; ++r) {
            PortIntent it{};
            it.kind = AccessKind::StoreZ;
            it.tile_ord = tile;
            it.row_block = rb;
            it.col_block = cb;
            it.beat = r;
            it.elems = S;
            it.addr = kBaseZ + (uint64_t(rb) * L + r) * kp * esz + uint64_t(cb) * S * esz;
            it.store_ready_adv = int64_t(flush_adv);
            gaps.push_back({it, earliest, need, 0});
        }
    }

    // Greedy earliest-deadline-first placement into non-W cycles from c0 on.
    std::sort(gaps.begin(), gaps.end(), [](const auto& a, const auto& b) {
        if (a.earliest != b.earliest) return a.earliest < b.earliest;
        if (a.deadline != b.deadline) return a.deadline < b.deadline;
        return a.prio < b.prio;
    });
    std::vector<uint64_t> w_cycles;
    w_cycles.reserve(w_intents.size());
    for (const auto& w : w_intents) w_cycles.push_back(w.planned_cycle);
    std::sort(w_cycles.begin(), w_cycles.end());

    std::vector<PortIntent> placed;
    placed.reserve(gaps.size());
    {
        size_t next_gap = 0;
        size_t w_ptr = 0;
        // (deadline, prio, seq) min-heap over available intents
        auto cmp = [&gaps](size_t a, size_t b) {
            if (gaps[a].deadline != gaps[b].deadline) return gaps[a].deadline > gaps[b].deadline;
            if (gaps[a].prio != gaps[b].prio) return gaps[a].prio > gaps[b].prio;
            return a > b;
        };
        std::vector<size_t> heap;
        uint64_t t = c0;
        while (next_gap < gaps.size() || !heap.empty()) {
            while (next_gap < gaps.size() && gaps[next_gap].earliest <= t) {
                heap.push_back(next_gap++);
                std::push_heap(heap.begin(), heap.end(), cmp);
            }
            while (w_ptr < w_cycles.size() && w_cycles[w_ptr] < t) ++w_ptr;
            bool w_here = w_ptr < w_cycles.size() && w_cycles[w_ptr] == t;
            if (!w_here && !heap.empty()) {
                std::pop_heap(heap.begin(), heap.end(), cmp);
                size_t gi = heap.back();
                heap.pop_back();
                gaps[gi].intent.planned_cycle = t;
                if (gaps[gi].intent.kind != AccessKind::StoreZ && t >= gaps[gi].deadline)
                    ++s.late_placements;
                placed.push_back(gaps[gi].intent);
            }
            ++t;
        }
    }

    s.intents = std::move(pre_intents);
    s.intents.insert(s.intents.end(), w_intents.begin(), w_intents.end());
    s.intents.insert(s.intents.end(), placed.begin(), placed.end());
    std::stable_sort(s.intents.begin(), s.intents.end(),
                     [](const PortIntent& a, const PortIntent& b) {
                         return a.planned_cycle < b.planned_cycle;
                     });

    // Requirement list against the final intent order.
    for (uint32_t i = 0; i < s.intents.size(); ++i) {
        const auto& it = s.intents[i];
        switch (it.kind) {
            case AccessKind::LoadW: {
                uint64_t adv = adv_of(it.tile_ord, uint64_t(it.group) * S + it.beat * period);
                s.requirements.emplace_back(adv, i);
                break;
            }
            case AccessKind::LoadX:
                s.requirements.emplace_back(
                    adv_of(it.tile_ord, uint64_t(it.group) * period * S), i);
                break;
            case AccessKind::LoadY:
                s.requirements.emplace_back(adv_of(it.tile_ord, 0), i);
                break;
            default:
                break;  // stores gate on the drain, not the other way round
        }
    }
    std::sort(s.requirements.begin(), s.requirements.end());
    return s;
}

}  // namespace redmule
