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

// Machine-readable run reports (JSON / CSV) and design-space sweeps.
// Field names and ordering are stable; re-emission is byte-identical.

#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "redmule/engine.hpp"
#include "redmule/workloads.hpp"

namespace redmule {

struct TraceSummary {
    uint64_t ld_x = 0, ld_w = 0, ld_y = 0, st_z = 0;  // beats per kind

    static TraceSummary from(const AccessTrace& t) {
        TraceSummary s;
        for (const auto& r : t) {
            switch (r.kind) {
                case AccessKind::LoadX: ++s.ld_x; break;
                case AccessKind::LoadW: ++s.ld_w; break;
                case AccessKind::LoadY: ++s.ld_y; break;
                default: ++s.st_z; break;
            }
        }
        return s;
    }
};

struct RunReport {
    ArrayConfig cfg;
    uint32_t m = 0, n = 0, k = 0;
    std::string kernel_name;
    std::string mem_mode;
    uint64_t seed = 0;
    CycleStats stats;
    TraceSummary beats;

    double gflops_at(double mhz) const { return stats.op_per_cycle * mhz * 1e-3; }
};

enum class ReportFormat { Json, Csv };

inline nlohmann::ordered_json report_json(const RunReport& r) {
    nlohmann::ordered_json j;
    j["config"] = {{"L", r.cfg.ce_height},
                   {"H", r.cfg.ce_width},
                   {"P", r.cfg.ce_pipe},
                   {"port_bits", r.cfg.port_bits},
                   {"io", r.cfg.io_prec == IoPrecision::Fp16 ? "fp16" : "fp8"},
                   {"fifo_depth", r.cfg.fifo_depth},
                   {"pipeline_stages_per_row", r.cfg.row_pipe_slots()}};
    j["dims"] = {{"M", r.m}, {"N", r.n}, {"K", r.k}};
    j["kernel"] = r.kernel_name;
    j["mem"] = r.mem_mode;
    j["seed"] = r.seed;
    j["total_cycles"] = r.stats.total_cycles;
    j["compute_cycles"] = r.stats.compute_cycles;
    j["stall_cycles"] = r.stats.stall_cycles;
    j["ce_busy_cycles"] = r.stats.ce_busy_cycles;
    j["fma_active_cycles"] = r.stats.fma_active_cycles;
    j["fncomp_active_cycles"] = r.stats.fncomp_active_cycles;
    j["ops_total"] = r.stats.ops_total;
    j["utilization"] = r.stats.utilization;
    j["op_per_cycle"] = r.stats.op_per_cycle;
    j["gflops_at_613mhz"] = r.gflops_at(613.0);
    j["beats"] = {{"ld_x", r.beats.ld_x},
                  {"ld_w", r.beats.ld_w},
                  {"ld_y", r.beats.ld_y},
                  {"st_z", r.beats.st_z}};
    return j;
}

inline std::string csv_header() {
    return "L,H,P,port_bits,io,kernel,M,N,K,feasible,total_cycles,utilization,op_per_cycle,"
           "gflops_at_613mhz,note";
}

struct SweepEntry {
    ArrayConfig cfg;
    bool feasible = false;
    std::optional<RunReport> report;
    std::string note;  // infeasibility or error diagnostic
};

inline std::string csv_row(const SweepEntry& e, uint32_t m, uint32_t n, uint32_t k,
                           const std::string& kernel_name) {
    char buf[256];
    if (e.feasible && e.report) {
        const auto& r = *e.report;
        std::snprintf(buf, sizeof buf, "%u,%u,%u,%u,%s,%s,%u,%u,%u,1,%llu,%.6f,%.4f,%.4f,",
                      e.cfg.ce_height, e.cfg.ce_width, e.cfg.ce_pipe, e.cfg.port_bits,
                      e.cfg.io_prec == IoPrecision::Fp16 ? "fp16" : "fp8", kernel_name.c_str(),
                      m, n, k, static_cast<unsigned long long>(r.stats.total_cycles),
                      r.stats.utilization, r.stats.op_per_cycle, r.gflops_at(613.0));
        return buf;
    }
    std::snprintf(buf, sizeof buf, "%u,%u,%u,%u,%s,%s,%u,%u,%u,0,,,,,%s", e.cfg.ce_height,
                  e.cfg.ce_width, e.cfg.ce_pipe, e.cfg.port_bits,
                  e.cfg.io_prec == IoPrecision::Fp16 ? "fp16" : "fp8", kernel_name.c_str(), m,
                  n, k, e.note.c_str());
    return buf;
}

inline std::string emit(const RunReport& r, ReportFormat fmt) {
    if (fmt == ReportFormat::Json) return report_json(r).dump(2) + "\n";
    SweepEntry e{r.cfg, true, r, {}};
    return csv_header() + "\n" + csv_row(e, r.m, r.n, r.k, r.kernel_name) + "\n";
}

struct SweepWorkload {
    uint32_t m = 96, n = 96, k = 96;
    KernelId kernel = KernelId::Matmul;
    MemoryModel mem = MemoryModel::ideal();
    uint64_t seed = 1;
    Distribution dist = Distribution::Unit;
};

inline uint32_t sweep_thread_cap() {
    if (const char* env = std::getenv("REDMULE_SIM_THREADS")) {
        long v = std::atol(env);
        if (v >= 1) return uint32_t(v);
    }
    uint32_t hw = std::thread::hardware_concurrency();
    return hw ? hw : 1;
}

inline RunReport run_report(const ArrayConfig& cfg, const SweepWorkload& wl) {
    const SemiringKernel& ker = kernel(wl.kernel);
    Fp8Format fmt = Fp8Format::E4M3;
    MatrixBuf x = gen_matrix(wl.seed, MatrixRole::X, wl.m, wl.n, wl.dist, cfg.io_prec, fmt);
    MatrixBuf w = gen_matrix(wl.seed, MatrixRole::W, wl.n, wl.k, wl.dist, cfg.io_prec, fmt);
    MatrixBuf y = gen_matrix(wl.seed, MatrixRole::Y, wl.m, wl.k, wl.dist, cfg.io_prec, fmt);
    RunResult res = run_gemm_op(cfg, ker, x, w, y, wl.mem);
    RunReport r;
    r.cfg = cfg;
    r.m = wl.m;
    r.n = wl.n;
    r.k = wl.k;
    r.kernel_name = std::string(ker.name);
    r.mem_mode = wl.mem.mode == MemoryModel::Mode::Ideal          ? "ideal"
                 : wl.mem.mode == MemoryModel::Mode::FixedLatency ? "lat:" + std::to_string(wl.mem.latency)
                                                                  : "stalls";
    r.seed = wl.seed;
    r.stats = res.stats;
    r.beats = TraceSummary::from(res.trace);
    return r;
}

// One report per config; infeasible configs are flagged, never dropped.
// Results are ordered by (L, H, P) regardless of evaluation order.
inline std::vector<SweepEntry> sweep(std::vector<ArrayConfig> configs, const SweepWorkload& wl) {
    std::sort(configs.begin(), configs.end(), [](const ArrayConfig& a, const ArrayConfig& b) {
        if (a.ce_height != b.ce_height) return a.ce_height < b.ce_height;
        if (a.ce_width != b.ce_width) return a.ce_width < b.ce_width;
        return a.ce_pipe < b.ce_pipe;
    });
    std::vector<SweepEntry> out(configs.size());
    const uint32_t cap = sweep_thread_cap();
    std::atomic<size_t> next{0};
    auto worker = [&]() {
        for (size_t i = next.fetch_add(1); i < configs.size(); i = next.fetch_add(1)) {
            SweepEntry& e = out[i];
            e.cfg = configs[i];
            try {
                e.report = run_report(configs[i], wl);
                e.feasible = true;
                if (!bandwidth_sustains_full_rate(configs[i],
                                                  plan_tiles(configs[i], wl.m, wl.n, wl.k)))
                    e.note = "stall-bound: gap budget below steady-state demand";
            } catch (const bandwidth_error& ex) {
                e.note = ex.what();
            } catch (const std::exception& ex) {
                e.note = ex.what();
            }
        }
    };
    uint32_t threads = std::min<uint32_t>(cap, uint32_t(configs.size()));
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (uint32_t i = 0; i < threads; ++i) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    return out;
}

inline std::string sweep_csv(const std::vector<SweepEntry>& entries, const SweepWorkload& wl) {
    std::string out = csv_header() + "\n";
    for (const auto& e : entries)
        out += csv_row(e, wl.m, wl.n, wl.k, std::string(kernel(wl.kernel).name)) + "\n";
    return out;
}

}  // namespace redmule
