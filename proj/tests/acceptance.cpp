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

// Acceptance suite. Each criterion prints one [PASS]/[FAIL] line with the
// measured numbers and its runtime; the process exits nonzero if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "redmule/engine.hpp"
#include "redmule/report.hpp"
#include "redmule/verify.hpp"
#include "redmule/workloads.hpp"
#include "schedule_replay.hpp"

using namespace redmule;

namespace {

int g_failures = 0;

struct Timer {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
};

void report(int idx, bool pass, const std::string& what, double secs, double limit) {
    bool in_time = secs < limit;
    if (!pass || !in_time) ++g_failures;
    std::printf("[%s] criterion %d: %s (%.1fs, limit %.0fs)\n",
                pass && in_time ? "PASS" : "FAIL", idx, what.c_str(), secs, limit);
}

RunResult run_cube(const ArrayConfig& cfg, KernelId id, uint32_t m, uint32_t n, uint32_t k,
                   uint64_t seed, MemoryModel mem = MemoryModel::ideal()) {
    Fp8Format fmt = Fp8Format::E4M3;
    MatrixBuf x = gen_matrix(seed, MatrixRole::X, m, n, Distribution::Unit, cfg.io_prec, fmt);
    MatrixBuf w = gen_matrix(seed, MatrixRole::W, n, k, Distribution::Unit, cfg.io_prec, fmt);
    MatrixBuf y = gen_matrix(seed, MatrixRole::Y, m, k, Distribution::Unit, cfg.io_prec, fmt);
    return run_gemm_op(cfg, kernel(id), x, w, y, mem);
}

double g_op_per_cycle_12x4 = 0.0;

void criterion1_utilization() {
    Timer timer;
    ArrayConfig cfg;  // L=12 H=4 P=3, 288-bit port, fp16
    RunResult r = run_cube(cfg, KernelId::Matmul, 96, 96, 96, 1);
    g_op_per_cycle_12x4 = r.stats.op_per_cycle;
    double gflops = r.stats.op_per_cycle * 613.0 * 1e-3;
    bool pass = r.stats.utilization >= 0.990 && r.stats.utilization <= 0.996 &&
                r.stats.op_per_cycle >= 95.4 && gflops >= 57.9 && gflops <= 58.9;
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "96^3 fp16 on 12x4: utilization %.4f in [0.990,0.996], %.2f OP/cycle >= 95.4, "
                  "%.2f GFLOPS@613MHz in [57.9,58.9]",
                  r.stats.utilization, r.stats.op_per_cycle, gflops);
    report(1, pass, buf, timer.seconds(), 30);
}

void criterion2_fp8_doubling() {
    Timer timer;
    ArrayConfig cfg;
    cfg.ce_width = 8;
    cfg.io_prec = IoPrecision::Fp8Compressed;
    bool stages_ok = cfg.row_pipe_slots() == 32;
    RunResult r = run_cube(cfg, KernelId::Matmul, 96, 96, 96, 1);
    double ratio = r.stats.op_per_cycle / g_op_per_cycle_12x4;
    bool pass = stages_ok && ratio >= 2.0 * 0.97 && ratio <= 2.0 * 1.03;
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "96^3 fp8 on 12x8: %u pipeline stages per row, %.2f OP/cycle = %.3fx the fp16 "
                  "array (2.0 +/- 3%%)",
                  cfg.row_pipe_slots(), r.stats.op_per_cycle, ratio);
    report(2, pass, buf, timer.seconds(), 30);
}

void criterion3_kernel_invariance() {
    Timer timer;
    ArrayConfig cfg;
    bool pass = true;
    for (uint32_t dim : {48u, 96u}) {
        uint64_t cycles = 0;
        for (const auto& ker : kernel_table()) {
            RunResult r = run_cube(cfg, ker.id, dim, dim, dim, 2);
            if (cycles == 0) cycles = r.stats.total_cycles;
            pass = pass && r.stats.total_cycles == cycles;
        }
    }
    report(3, pass, "all 7 kernels take identical total_cycles at 48^3 and 96^3 (exact)",
           timer.seconds(), 120);
}

void criterion4_bit_exact_oracle() {
    Timer timer;
    ArrayConfig cfg;
    std::mt19937_64 rng(2026);
    bool pass = true;
    int checked = 0;
    for (int i = 0; i < 200 && pass; ++i) {
        const SemiringKernel& ker = kernel_table()[i % 7];
        uint32_t m = 1 + rng() % 40, n = 1 + rng() % 40, k = 1 + rng() % 40;
        uint64_t seed = rng();
        MatrixBuf x = gen_matrix(seed, MatrixRole::X, m, n, Distribution::Unit);
        MatrixBuf w = gen_matrix(seed, MatrixRole::W, n, k, Distribution::Unit);
        MatrixBuf y = gen_matrix(seed, MatrixRole::Y, m, k, Distribution::Unit);
        RunResult got = run_gemm_op(cfg, ker, x, w, y);
        pass = pass && got.z.same_codes(gemm_op_reference(ker, x, w, y));
        // activity exclusivity on every run
        pass = pass &&
               got.stats.ce_busy_cycles ==
                   got.stats.fma_active_cycles + got.stats.fncomp_active_cycles &&
               (ker.group == KernelGroup::Group2 ? got.stats.fma_active_cycles
                                                 : got.stats.fncomp_active_cycles) == 0;
        ++checked;
    }
    // matmul against the wide oracle: relative error <= N * 2^-8
    for (int i = 0; i < 25 && pass; ++i) {
        uint32_t m = 1 + rng() % 40, n = 1 + rng() % 40, k = 1 + rng() % 40;
        uint64_t seed = rng();
        MatrixBuf x = gen_matrix(seed, MatrixRole::X, m, n, Distribution::UnitPos);
        MatrixBuf w = gen_matrix(seed, MatrixRole::W, n, k, Distribution::UnitPos);
        MatrixBuf y = gen_matrix(seed, MatrixRole::Y, m, k, Distribution::UnitPos);
        RunResult got = run_gemm_op(cfg, kernel(KernelId::Matmul), x, w, y);
        auto wide = wide_oracle(kernel(KernelId::Matmul), x, w, y);
        double bound = double(n) * 0x1.0p-8;
        for (uint32_t r = 0; r < m && pass; ++r)
            for (uint32_t c = 0; c < k; ++c) {
                double exact = wide[size_t(r) * k + c];
                double rel = std::fabs(to_double(got.z.at16(r, c)) - exact) /
                             std::max(std::fabs(exact), 0x1.0p-24);
                if (rel > bound) {
                    pass = false;
                    break;
                }
            }
    }
    char buf[128];
    std::snprintf(buf, sizeof buf,
                  "%d randomized cases bit-identical to the reference; matmul within N*2^-8 of "
                  "the wide oracle",
                  checked);
    report(4, pass, buf, timer.seconds(), 60);
}

void criterion5_fp8_exhaustive() {
    Timer timer;
    bool pass = true;
    std::string fail;
    for (auto fmt : {Fp8Format::E4M3, Fp8Format::E5M2}) {
        for (int code = 0; code < 256 && pass; ++code) {
            Fp8 q{uint8_t(code)};
            if (fp8_is_nan(q, fmt)) continue;
            if (cast_fp16_to_fp8(cast_fp8_to_fp16(q, fmt), fmt).bits != q.bits) pass = false;
        }
        for (uint32_t b = 0; b < 0x10000 && pass; ++b) {
            Fp16 h{uint16_t(b)};
            if (cast_fp16_to_fp8(h, fmt).bits != redmule::verify_detail::fp8_nearest(h, fmt))
                pass = false;
        }
    }
    report(5, pass,
           "512 codes round-trip; 131072 narrowing casts match the brute-force RNE oracle",
           timer.seconds(), 30);
}

void criterion6_graph_oracles() {
    Timer timer;
    bool pass = true;
    ArrayConfig cfg;
    GemmOpEvaluator eval = [&cfg](const SemiringKernel& k, const MatrixBuf& x, const MatrixBuf& w,
                                  const MatrixBuf& y) { return run_gemm_op(cfg, k, x, w, y).z; };
    for (uint64_t seed = 1; seed <= 20 && pass; ++seed) {
        GraphInstance g = gen_graph(seed, 32, GraphProblem::Apsp);
        MatrixBuf d = apsp_solve(g, eval);
        auto want = floyd_warshall(g);
        for (uint32_t u = 0; u < g.n && pass; ++u)
            for (uint32_t v = 0; v < g.n; ++v)
                if (to_double(d.at16(u, v)) != want[size_t(u) * g.n + v]) {
                    pass = false;
                    break;
                }
    }
    for (uint64_t seed = 1; seed <= 20 && pass; ++seed) {
        GraphInstance g = gen_graph(seed, 24, GraphProblem::MaxCapacity, 0.6);
        MatrixBuf c = max_capacity_solve(g, eval);
        auto want = widest_path(g);
        for (uint32_t u = 0; u < g.n && pass; ++u)
            for (uint32_t v = 0; v < g.n; ++v)
                if (to_double(c.at16(u, v)) != want[size_t(u) * g.n + v]) {
                    pass = false;
                    break;
                }
    }
    report(6, pass,
           "20x 32-node shortest paths equal Floyd-Warshall; 20x 24-node capacities equal the "
           "widest-path oracle, exactly, via the engine",
           timer.seconds(), 60);
}

void criterion7_intensity() {
    Timer timer;
    std::mt19937_64 rng(7);
    bool pass = true;
    for (int i = 0; i < 1000 && pass; ++i) {
        uint64_t l = 1 + rng() % 64, h = 1 + rng() % 64, n = 1 + rng() % 100000;
        long double i1 = 2.0L * n / (2.0L * n + 2.0L);
        long double i2 = 2.0L * l * h * n / ((long double)(l + h) * n + 2.0L * l * h);
        pass = pass && std::fabs(intensity_1d(n) - double(i1)) < 1e-12 &&
               std::fabs(intensity_2d(l, h, n) - double(i2)) < 1e-9;
    }
    for (uint64_t l = 1; l <= 16 && pass; ++l)
        pass = pass && std::fabs(intensity_2d(l, l, 1000000) - double(l)) < 1e-2;
    report(7, pass,
           "closed forms match on 1000 sampled (L,H,N); |intensity_2d(L,L,10^6) - L| < 10^-2",
           timer.seconds(), 5);
}

void criterion8_backpressure() {
    Timer timer;
    ArrayConfig cfg;
    const uint32_t m = 31, n = 27, k = 44;
    RunResult ideal = run_cube(cfg, KernelId::Matmul, m, n, k, 3);
    StreamSchedule sched = issue_schedule(cfg, plan_tiles(cfg, m, n, k));
    uint64_t ideal_replay = replay::total_cycles(cfg, sched, MemoryModel::ideal());
    bool pass = ideal.stats.total_cycles == ideal_replay;
    std::mt19937_64 rng(8);
    for (int i = 0; i < 10 && pass; ++i) {
        std::vector<uint64_t> stalls;
        uint64_t burst = 1 + rng() % 30;
        uint64_t at = rng() % ideal.stats.total_cycles;
        for (uint64_t t = 0; t < burst; ++t) stalls.push_back(at + t);
        for (int j = 0; j < 20; ++j) stalls.push_back(rng() % (ideal.stats.total_cycles + 100));
        MemoryModel mem = MemoryModel::stall_pattern(stalls);
        RunResult got = run_cube(cfg, KernelId::Matmul, m, n, k, 3, mem);
        uint64_t unabsorbed = replay::total_cycles(cfg, sched, mem) - ideal_replay;
        pass = pass && got.z.same_codes(ideal.z) &&
               got.stats.total_cycles == ideal.stats.total_cycles + unabsorbed;
    }
    report(8, pass,
           "10 random stall patterns: Z bit-identical, total_cycles = ideal + exactly the "
           "unabsorbed stall count from the schedule-replay oracle",
           timer.seconds(), 60);
}

void criterion9_leftovers() {
    Timer timer;
    ArrayConfig cfg;
    bool pass = true;
    char buf[200];
    std::string detail;
    for (uint32_t kk = 1; kk <= 2; ++kk) {
        RunResult exact = run_cube(cfg, KernelId::Matmul, 12 * kk, 96, 96, 4);
        RunResult ragged = run_cube(cfg, KernelId::Matmul, 12 * kk + 1, 96, 96, 4);
        pass = pass && ragged.stats.utilization < exact.stats.utilization;
        std::snprintf(buf, sizeof buf, "M=%u: %.4f vs M=%u: %.4f; ", 12 * kk,
                      exact.stats.utilization, 12 * kk + 1, ragged.stats.utilization);
        detail += buf;
    }
    report(9, pass, detail + "one leftover row strictly lowers utilization", timer.seconds(),
           60);
}

}  // namespace

int main() {
    criterion1_utilization();
    criterion2_fp8_doubling();
    criterion3_kernel_invariance();
    criterion4_bit_exact_oracle();
    criterion5_fp8_exhaustive();
    criterion6_graph_oracles();
    criterion7_intensity();
    criterion8_backpressure();
    criterion9_leftovers();
    if (g_failures) {
        std::printf("%d criterion(s) FAILED\n", g_failures);
        return 1;
    }
    std::printf("all acceptance criteria hold\n");
    return 0;
}
