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

// Built-in self checks: exhaustive FP8 cast properties, randomized
// reference-vs-engine equivalence across every kernel, and the graph-problem
// oracles. Shared between the `verify` CLI command and the test suite.

#pragma once

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "redmule/engine.hpp"
#include "redmule/workloads.hpp"

namespace redmule {

struct CheckResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

namespace verify_detail {

inline double fp8_lattice_value(uint8_t code, Fp8Format fmt) {
    int fb = fmt == Fp8Format::E4M3 ? 3 : 2;
    int eb = fmt == Fp8Format::E4M3 ? 4 : 5;
    int bias = fmt == Fp8Format::E4M3 ? 7 : 15;
    int s = code >> 7, e = (code >> fb) & ((1 << eb) - 1), m = code & ((1 << fb) - 1);
    if (fmt == Fp8Format::E4M3 && e == 15 && m == 7) return NAN;
    if (fmt == Fp8Format::E5M2 && e == 31) return m ? NAN : (s ? -INFINITY : INFINITY);
    double v = e == 0 ? std::ldexp(m, 1 - bias - fb) : std::ldexp((1 << fb) + m, e - bias - fb);
    return s ? -v : v;
}

inline uint8_t fp8_nearest(Fp16 x, Fp8Format fmt) {
    if (x.is_nan()) return fmt == Fp8Format::E4M3 ? 0x7F : 0x7E;
    uint8_t sb = x.sign() ? 0x80 : 0;
    if (x.is_inf()) return fmt == Fp8Format::E5M2 ? (sb | 0x7C) : (sb | 0x7E);
    double a = std::fabs(to_double(x));
    double beyond = fmt == Fp8Format::E4M3 ? 512.0 : 65536.0;
    double best_d = std::fabs(a - beyond);
    int best_code = -1;  // -1 marks the beyond-the-format point
    int best_parity = 0;
    for (int code = 0; code < 0x80; ++code) {
        double cv = fp8_lattice_value(uint8_t(code), fmt);
        if (std::isnan(cv) || std::isinf(cv)) continue;
        double d = std::fabs(a - cv);
        int parity = code & 1;
        if (d < best_d || (d == best_d && parity == 0 && best_parity != 0)) {
            best_d = d;
            best_code = code;
            best_parity = parity;
        }
    }
    if (best_code < 0) return fmt == Fp8Format::E5M2 ? (sb | 0x7C) : (sb | 0x7E);
    return sb | uint8_t(best_code);
}

}  // namespace verify_detail

inline CheckResult check_fp8_roundtrip() {
    for (auto fmt : {Fp8Format::E4M3, Fp8Format::E5M2}) {
        for (int code = 0; code < 256; ++code) {
            Fp8 q{uint8_t(code)};
            if (fp8_is_nan(q, fmt)) continue;
            if (cast_fp16_to_fp8(cast_fp8_to_fp16(q, fmt), fmt).bits != q.bits) {
                char d[64];
                std::snprintf(d, sizeof d, "fmt %d code 0x%02x does not round-trip", int(fmt),
                              code);
                return {"fp8-roundtrip", false, d};
            }
        }
    }
    return {"fp8-roundtrip", true, "512 codes"};
}

inline CheckResult check_fp8_narrowing() {
    for (auto fmt : {Fp8Format::E4M3, Fp8Format::E5M2}) {
        for (uint32_t b = 0; b < 0x10000; ++b) {
            Fp16 h{uint16_t(b)};
            if (cast_fp16_to_fp8(h, fmt).bits != verify_detail::fp8_nearest(h, fmt)) {
                return {"fp8-narrowing", false,
                        "mismatch vs nearest-value oracle at " + to_string(h)};
            }
        }
    }
    return {"fp8-narrowing", true, "131072 casts"};
}

// Second-route FMA check. Operand exponents are restricted to [2^-6, 2^6] so
// the exact product+sum spans under 53 bits and double arithmetic commits no
// intermediate rounding; the single RNE step then happens in the encoder.
inline CheckResult check_fma_rounding(uint64_t seed, int cases) {
    Rng rng(seed ^ 0xF17Aull);
    auto draw = [&rng]() {
        uint16_t sign = uint16_t(rng.below(2) << 15);
        uint16_t expf = uint16_t((9 + rng.below(13)) << 10);
        uint16_t frac = uint16_t(rng.below(1024));
        return Fp16{uint16_t(sign | expf | frac)};
    };
    for (int i = 0; i < cases; ++i) {
        Fp16 a = draw(), b = draw(), c = draw();
        double exact = to_double(a) * to_double(b) + to_double(c);
        Fp16 want = from_double(exact);
        Fp16 got = fma16(a, b, c);
        if (got.bits != want.bits && !(want.is_zero() && got.is_zero())) {
            return {"fma-rounding", false,
                    "fma(" + to_string(a) + ", " + to_string(b) + ", " + to_string(c) +
                        ") = " + to_string(got) + ", expected " + to_string(want)};
        }
    }
    return {"fma-rounding", true, std::to_string(cases) + " triples vs double-exact route"};
}

inline CheckResult check_engine_equivalence(uint64_t seed, int cases, uint32_t max_dim) {
    Rng rng(seed);
    ArrayConfig cfg;
    for (int i = 0; i < cases; ++i) {
        const SemiringKernel& ker = kernel_table()[size_t(rng.below(kernel_table().size()))];
        uint32_t m = 1 + uint32_t(rng.below(max_dim));
        uint32_t n = 1 + uint32_t(rng.below(max_dim));
        uint32_t k = 1 + uint32_t(rng.below(max_dim));
        uint64_t s = rng.next();
        MatrixBuf x = gen_matrix(s, MatrixRole::X, m, n, Distribution::Unit);
        MatrixBuf w = gen_matrix(s, MatrixRole::W, n, k, Distribution::Unit);
        MatrixBuf y = gen_matrix(s, MatrixRole::Y, m, k, Distribution::Unit);
        MatrixBuf want = gemm_op_reference(ker, x, w, y);
        RunResult got = run_gemm_op(cfg, ker, x, w, y);
        if (!got.z.same_codes(want)) {
            char d[96];
            std::snprintf(d, sizeof d, "%s %ux%ux%u differs from the reference model",
                          std::string(ker.name).c_str(), m, n, k);
            return {"engine-equivalence", false, d};
        }
        bool fma_zero = got.stats.fma_active_cycles == 0;
        bool fnc_zero = got.stats.fncomp_active_cycles == 0;
        bool gated_ok = ker.group == KernelGroup::Group2 ? fma_zero : fnc_zero;
        if (!gated_ok || got.stats.ce_busy_cycles != uint64_t(m) * n * k)
            return {"engine-equivalence", false, "activity counters broken"};
    }
    return {"engine-equivalence", true, std::to_string(cases) + " randomized cases"};
}

inline CheckResult check_graph_oracles(uint64_t seed, int cases, uint32_t apsp_nodes,
                                       uint32_t cap_nodes) {
    for (int i = 0; i < cases; ++i) {
        GraphInstance g = gen_graph(seed + i, apsp_nodes, GraphProblem::Apsp);
        MatrixBuf d = apsp_solve(g, reference_evaluator());
        std::vector<double> want = floyd_warshall(g);
        for (uint32_t u = 0; u < g.n; ++u)
            for (uint32_t v = 0; v < g.n; ++v)
                if (to_double(d.at16(u, v)) != want[size_t(u) * g.n + v])
                    return {"graph-oracles", false, "shortest paths diverge from the oracle"};

        GraphInstance c = gen_graph(seed + 1000 + i, cap_nodes, GraphProblem::MaxCapacity, 0.6);
        MatrixBuf cm = max_capacity_solve(c, reference_evaluator());
        std::vector<double> cwant = widest_path(c);
        for (uint32_t u = 0; u < c.n; ++u)
            for (uint32_t v = 0; v < c.n; ++v)
                if (to_double(cm.at16(u, v)) != cwant[size_t(u) * c.n + v])
                    return {"graph-oracles", false, "widest paths diverge from the oracle"};
    }
    return {"graph-oracles", true, std::to_string(cases) + " instances each"};
}

inline CheckResult check_backpressure(uint64_t seed) {
    ArrayConfig cfg;
    const SemiringKernel& ker = kernel(KernelId::Matmul);
    MatrixBuf x = gen_matrix(seed, MatrixRole::X, 25, 18, Distribution::Unit);
    MatrixBuf w = gen_matrix(seed, MatrixRole::W, 18, 33, Distribution::Unit);
    MatrixBuf y = gen_matrix(seed, MatrixRole::Y, 25, 33, Distribution::Unit);
    RunResult ideal = run_gemm_op(cfg, ker, x, w, y);
    Rng rng(seed);
    std::vector<uint64_t> stalls;
    for (int i = 0; i < 40; ++i) stalls.push_back(rng.below(ideal.stats.total_cycles));
    RunResult bumpy = run_gemm_op(cfg, ker, x, w, y, MemoryModel::stall_pattern(stalls));
    if (!bumpy.z.same_codes(ideal.z))
        return {"backpressure-immunity", false, "Z changed under memory stalls"};
    if (bumpy.stats.total_cycles < ideal.stats.total_cycles)
        return {"backpressure-immunity", false, "stalls shortened the run"};
    return {"backpressure-immunity", true, "stall pattern absorbed"};
}

// Full self-check battery. quick mode trims the case counts so the whole
// battery finishes well under a minute.
inline std::vector<CheckResult> run_verification(uint64_t seed, bool quick) {
    std::vector<CheckResult> out;
    out.push_back(check_fp8_roundtrip());
    out.push_back(check_fp8_narrowing());
    out.push_back(check_fma_rounding(seed, quick ? 50000 : 300000));
    out.push_back(check_engine_equivalence(seed, quick ? 30 : 200, quick ? 16 : 40));
    out.push_back(check_graph_oracles(seed, quick ? 4 : 20, quick ? 16 : 32, quick ? 12 : 24));
    out.push_back(check_backpressure(seed));
    return out;
}

}  // namespace redmule
