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

// Cycle-level engine: an L x H array of two-stage CEs with P-register
// pipelines, X/W/Z buffers, row feedback accumulation and a single shared
// memory port driven by the streamer schedule.
//
// Execution interleaves two units each cycle:
//  - the port executes the next beat of the intent sequence, in order, once
//    the memory accepts it and (for stores) the producing tile has drained;
//  - the datapath executes one "advance" when every operand beat it needs
//    has arrived. One advance issues one pipeline slot into column 0 of all
//    rows at once; column c processes the slot that entered c*(P+1) advances
//    earlier, which is exactly the cascade skew of the row pipeline. The
//    controller spends one bookkeeping advance per tile transition, and the
//    tail of the run flushes the remaining (H-1)*(P+1) in-flight slots.
//
// The operand routed into each CE lane is fixed by the schedule structure
// (tile, pass, slot, column), never by arrival time, so the produced Z is
// bit-identical to the golden reference under every memory model. Lanes that
// map onto padded rows/columns/reduction steps are gated: no arithmetic is
// performed and no activity is counted, mirroring the clock gating of unused
// units. Busy counters therefore count exactly the M*N*K real operand pairs.

#pragma once

#include <cstdio>
#include <string>
#include <vector>

#include "redmule/matrix.hpp"
#include "redmule/semiring.hpp"
#include "redmule/streamer.hpp"
#include "redmule/tiling.hpp"

namespace redmule {

struct CycleStats {
    uint64_t total_cycles = 0;
    uint64_t compute_cycles = 0;     // cycles in which at least one CE lane issued
    uint64_t stall_cycles = 0;       // cycles the datapath waited on an operand
    uint64_t ce_busy_cycles = 0;     // real (unpadded) lane issues, summed over CEs
    uint64_t fma_active_cycles = 0;  // stage-1 FMA unit issues
    uint64_t fncomp_active_cycles = 0;  // stage-1 FNCOMP unit issues
    uint64_t ops_total = 0;             // mapping + reduction each count one OP
    double utilization = 0.0;           // ce_busy / (total * L * H)
    double op_per_cycle = 0.0;
};

struct EngineOptions {
    bool collect_trace = true;
    bool per_cycle_log = false;  // line-oriented dump, one record per cycle
};

class Engine {
  public:
    Engine(const ArrayConfig& cfg, const SemiringKernel& kernel, const MatrixBuf& x,
           const MatrixBuf& w, const MatrixBuf& y, MemoryModel mem = MemoryModel::ideal(),
           EngineOptions opt = {})
        : cfg_(cfg),
          kernel_(kernel),
          mem_(std::move(mem)),
          opt_(opt),
          plan_(plan_tiles(cfg, x.rows, x.cols, w.cols)),
          sched_(issue_schedule(cfg, plan_)) {
        check_gemm_dims(x, w, y);
        out_prec_ = y.prec;
        out_fmt_ = y.fp8_fmt;
        build_images(x, w, y);
        arrivals_.assign(sched_.intents.size(), UINT64_MAX);
        tile_flush_cycle_.assign(plan_.tiles(), UINT64_MAX);
        acc_.assign(2u * cfg_.ce_height * cfg_.row_pipe_slots(), kF16PosZero);
        z_crop_ = MatrixBuf::make16(MatrixRole::Z, plan_.m, plan_.k);
    }

    bool done() const {
        return adv_next_ == sched_.total_advances && port_next_ == sched_.intents.size();
    }

    // Advance exactly one cycle: at most one port beat plus one datapath advance.
    void step() {
        step_port();
        step_datapath();
        if (opt_.per_cycle_log) log_cycle();
        ++cycle_;
    }

    void run() {
        while (!done()) step();
        finalize();
    }

    const MatrixBuf& z() const { return z_crop_; }
    const CycleStats& stats() const { return stats_; }
    const AccessTrace& trace() const { return trace_; }
    const std::vector<std::string>& cycle_log() const { return cycle_log_; }
    uint64_t cycle() const { return cycle_; }
    bool feedback_active() const { return feedback_; }
    const TilePlan& plan() const { return plan_; }
    const StreamSchedule& schedule() const { return sched_; }

  private:
    void build_images(const MatrixBuf& x, const MatrixBuf& w, const MatrixBuf& y) {
        const uint32_t S = cfg_.row_pipe_slots();
        xw_cols_ = plan_.x_groups * S;
        ximg_.assign(size_t(plan_.padded_m) * xw_cols_, kernel_.pad_x.bits);
        wimg_.assign(size_t(plan_.padded_n) * plan_.padded_k, kernel_.pad_w.bits);
        yimg_.assign(size_t(plan_.padded_m) * plan_.padded_k, kernel_.pad_y.bits);
        zimg_.assign(size_t(plan_.padded_m) * plan_.padded_k, 0);
        // Input casts happen here, at the streamer boundary: the array always
        // computes on binary16 codes.
        for (uint32_t r = 0; r < plan_.m; ++r)
            for (uint32_t c = 0; c < plan_.n; ++c)
                ximg_[size_t(r) * xw_cols_ + c] = x.at16(r, c).bits;
        for (uint32_t r = 0; r < plan_.n; ++r)
            for (uint32_t c = 0; c < plan_.k; ++c)
                wimg_[size_t(r) * plan_.padded_k + c] = w.at16(r, c).bits;
        for (uint32_t r = 0; r < plan_.m; ++r)
            for (uint32_t c = 0; c < plan_.k; ++c)
                yimg_[size_t(r) * plan_.padded_k + c] = y.at16(r, c).bits;
    }

    void step_port() {
        if (port_next_ >= sched_.intents.size()) {
            port_event_ = "idle";
            return;
        }
        const PortIntent& it = sched_.intents[port_next_];
        uint64_t store_ready = 0;
        if (it.kind == AccessKind::StoreZ) {
            uint64_t fc = tile_flush_cycle_[it.tile_ord];
            store_ready = fc == UINT64_MAX ? UINT64_MAX : fc + cfg_.ce_pipe + 1;
        }
        switch (handshake_step(it, mem_, cycle_, store_ready)) {
            case HandshakeOutcome::NotReady:
                port_event_ = it.kind == AccessKind::StoreZ ? "wait-drain" : "idle";
                return;
            case HandshakeOutcome::MemStall: port_event_ = "mem-stall"; return;
            case HandshakeOutcome::Transferred:
                execute_beat(it);
                ++port_next_;
        }
    }

    void execute_beat(const PortIntent& it) {
        uint64_t arrival = cycle_;
        if (it.kind != AccessKind::StoreZ) arrival += mem_.load_latency();
        arrivals_[port_next_] = arrival;
        last_event_cycle_ = cycle_;
        switch (it.kind) {
            case AccessKind::LoadW: ++occupancy_.w_sets; break;
            case AccessKind::LoadX: ++occupancy_.x_lines; break;
            case AccessKind::LoadY: ++occupancy_.y_lines; break;
            case AccessKind::StoreZ: {
                if (occupancy_.z_lines) --occupancy_.z_lines;
                const uint32_t S = cfg_.row_pipe_slots();
                uint64_t row = uint64_t(it.row_block) * cfg_.ce_height + it.beat;
                const Fp16* line = &acc_[bank_offset(it.tile_ord) + size_t(it.beat) * S];
                uint16_t* dst = &zimg_[row * plan_.padded_k + uint64_t(it.col_block) * S];
                for (uint32_t j = 0; j < S; ++j) dst[j] = line[j].bits;
                break;
            }
        }
        if (opt_.collect_trace)
            trace_.push_back({cycle_, it.kind, it.elems, it.addr, it.row_block, it.col_block});
        port_event_ = access_kind_name(it.kind);
    }

    bool requirements_met() {
        while (req_next_ < sched_.requirements.size() &&
               sched_.requirements[req_next_].first < adv_next_)
            ++req_next_;  // skipped only after the advance executed
        for (size_t i = req_next_; i < sched_.requirements.size() &&
                                   sched_.requirements[i].first == adv_next_;
             ++i) {
            if (arrivals_[sched_.requirements[i].second] >= cycle_) return false;
        }
        return true;
    }

    void step_datapath() {
        adv_event_ = "idle";
        if (adv_next_ >= sched_.total_advances) return;
        if (cycle_ < sched_.first_advance_cycle || !requirements_met()) {
            if (started_) {
                ++stats_.stall_cycles;
                adv_event_ = "wait";
            }
            return;
        }
        execute_advance();
    }

    size_t bank_offset(uint32_t tile_ord) const {
        return size_t(tile_ord & 1) * cfg_.ce_height * cfg_.row_pipe_slots();
    }

    void execute_advance() {
        const uint32_t H = cfg_.ce_width;
        const uint32_t L = cfg_.ce_height;
        const uint32_t S = cfg_.row_pipe_slots();
        const uint32_t period = cfg_.ce_pipe + 1;
        const uint32_t T = plan_.tiles();
        const uint64_t g = adv_next_;
        started_ = true;

        // A new tile's accumulator bank loads the Y tile right before its
        // first slot enters column 0 (the previous occupant of the bank was
        // stored two tiles ago).
        if (g % sched_.tile_stride == 0 && g / sched_.tile_stride < T)
            init_bank(uint32_t(g / sched_.tile_stride));

        bool any_lane = false;
        for (uint32_t c = 0; c < H; ++c) {
            int64_t o = int64_t(g) - int64_t(c) * period;
            if (o < 0) continue;
            uint64_t tile = uint64_t(o) / sched_.tile_stride;
            uint64_t u = uint64_t(o) % sched_.tile_stride;
            if (tile >= T || u >= sched_.tile_advances) continue;  // bookkeeping slot
            any_lane = true;
            uint32_t pass = uint32_t(u / S);
            uint32_t slot = uint32_t(u % S);
            uint32_t rb = uint32_t(tile) / plan_.col_blocks;
            uint32_t cb = uint32_t(tile) % plan_.col_blocks;
            uint32_t n = pass * H + c;
            uint64_t kcol = uint64_t(cb) * S + slot;
            if (n >= plan_.n || kcol >= plan_.k) continue;  // gated lane (padding)
            Fp16 wv{wimg_[size_t(n) * plan_.padded_k + kcol]};
            uint32_t m_rows = std::min(L, plan_.m - std::min(plan_.m, rb * L));
            Fp16* bank = &acc_[bank_offset(uint32_t(tile))];
            for (uint32_t r = 0; r < m_rows; ++r) {
                uint64_t m = uint64_t(rb) * L + r;
                Fp16 xv{ximg_[m * xw_cols_ + n]};
                Fp16& acc = bank[size_t(r) * S + slot];
                acc = ce_stage2(kernel_, ce_stage1(kernel_, xv, wv, acc), acc);
            }
            if (kernel_.group == KernelGroup::Group2)
                stats_.fncomp_active_cycles += m_rows;
            else
                stats_.fma_active_cycles += m_rows;
        }
        if (any_lane) ++stats_.compute_cycles;

        // Track buffer occupancy and drain completion on column-0 boundaries.
        uint64_t tile0 = g / sched_.tile_stride;
        uint64_t u0 = g % sched_.tile_stride;
        if (tile0 < T && u0 < sched_.tile_advances) {
            if (u0 % period == 0 && occupancy_.w_sets) --occupancy_.w_sets;
            if (u0 % (uint64_t(period) * S) == 0 && g != 0)
                occupancy_.x_lines -= std::min<uint64_t>(occupancy_.x_lines, L);
            if (u0 == S && occupancy_.y_lines >= L) occupancy_.y_lines -= L;
            feedback_ = u0 >= S;
        }
        if (flush_next_ < plan_.tiles() && g == sched_.flush_advance(flush_next_)) {
            tile_flush_cycle_[flush_next_] = cycle_;
            occupancy_.z_lines += cfg_.ce_height;
            ++flush_next_;
        }

        last_event_cycle_ = cycle_;
        adv_event_ = any_lane ? "issue" : "bubble";
        ++adv_next_;
    }

    void init_bank(uint32_t tile) {
        const uint32_t L = cfg_.ce_height;
        const uint32_t S = cfg_.row_pipe_slots();
        uint32_t rb = tile / plan_.col_blocks;
        uint32_t cb = tile % plan_.col_blocks;
        Fp16* bank = &acc_[bank_offset(tile)];
        for (uint32_t r = 0; r < L; ++r) {
            uint64_t row = uint64_t(rb) * L + r;
            const uint16_t* src = &yimg_[row * plan_.padded_k + uint64_t(cb) * S];
            for (uint32_t j = 0; j < S; ++j) bank[size_t(r) * S + j] = Fp16{src[j]};
        }
    }

    void log_cycle() {
        char buf[160];
        std::snprintf(buf, sizeof buf, "%llu,%s,%s,w=%u,x=%u,y=%u,z=%u",
                      static_cast<unsigned long long>(cycle_), port_event_, adv_event_,
                      occupancy_.w_sets, occupancy_.x_lines, occupancy_.y_lines,
                      occupancy_.z_lines);
        cycle_log_.emplace_back(buf);
    }

    void finalize() {
        stats_.total_cycles = last_event_cycle_ + 1;
        stats_.ce_busy_cycles = stats_.fma_active_cycles + stats_.fncomp_active_cycles;
        stats_.ops_total = 2 * stats_.ce_busy_cycles;
        stats_.utilization = double(stats_.ce_busy_cycles) /
                             (double(stats_.total_cycles) * cfg_.num_ces());
        stats_.op_per_cycle = double(stats_.ops_total) / double(stats_.total_cycles);
        if (out_prec_ == IoPrecision::Fp16) {
            z_crop_ = MatrixBuf::make16(MatrixRole::Z, plan_.m, plan_.k);
        } else {
            z_crop_ = MatrixBuf::make8(MatrixRole::Z, plan_.m, plan_.k, out_fmt_);
        }
        // Output cast at the streamer boundary when the run is compressed.
        for (uint32_t r = 0; r < plan_.m; ++r)
            for (uint32_t c = 0; c < plan_.k; ++c)
                z_crop_.set16(r, c, Fp16{zimg_[size_t(r) * plan_.padded_k + c]});
    }

    struct Occupancy {
        uint32_t w_sets = 0;
        uint32_t x_lines = 0;
        uint32_t y_lines = 0;
        uint32_t z_lines = 0;
    };

    ArrayConfig cfg_;
    SemiringKernel kernel_;
    MemoryModel mem_;
    EngineOptions opt_;
    TilePlan plan_;
    StreamSchedule sched_;
    IoPrecision out_prec_ = IoPrecision::Fp16;
    Fp8Format out_fmt_ = Fp8Format::E4M3;

    std::vector<uint16_t> ximg_, wimg_, yimg_, zimg_;
    uint64_t xw_cols_ = 0;
    std::vector<Fp16> acc_;  // two banks, alternating per tile
    std::vector<uint64_t> arrivals_;
    std::vector<uint64_t> tile_flush_cycle_;
    uint32_t flush_next_ = 0;

    uint64_t cycle_ = 0;
    uint64_t adv_next_ = 0;
    size_t port_next_ = 0;
    size_t req_next_ = 0;
    uint64_t last_event_cycle_ = 0;
    bool started_ = false;
    bool feedback_ = false;
    const char* port_event_ = "idle";
    const char* adv_event_ = "idle";

    CycleStats stats_;
    AccessTrace trace_;
    std::vector<std::string> cycle_log_;
    MatrixBuf z_crop_;
    Occupancy occupancy_;
};

struct RunResult {
    MatrixBuf z;
    CycleStats stats;
    AccessTrace trace;
};

inline RunResult run_gemm_op(const ArrayConfig& cfg, const SemiringKernel& kernel,
                             const MatrixBuf& x, const MatrixBuf& w, const MatrixBuf& y,
                             MemoryModel mem = MemoryModel::ideal(), EngineOptions opt = {}) {
    Engine e(cfg, kernel, x, w, y, std::move(mem), opt);
    e.run();
    return {e.z(), e.stats(), e.trace()};
}

}  // namespace redmule
