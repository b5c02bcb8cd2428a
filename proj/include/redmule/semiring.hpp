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

// The seven generalized matrix-operation kernels Z = (X o W) * Y and their
// golden reference evaluators.
//
// A computing element is split in two stages. Stage 1 performs the mapping
// operation `o`; for the plain matmul kernel the reduction is fused into the
// FMA there, so stage 2 is a bypass. For every other kernel stage 2 applies
// the reduction `*` as a min/max comparison against the accumulator.
//
// The reference evaluator fixes the reduction order (ascending n) and is the
// bit-exact golden model the cycle-level engine must match.

#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "redmule/fp16.hpp"
#include "redmule/matrix.hpp"

namespace redmule {

enum class CircOp : uint8_t { Mul, Add, Min, Max };
enum class StarOp : uint8_t { Add, Min, Max };
enum class KernelGroup : uint8_t { Matmul, Group1, Group2 };

enum class KernelId : uint8_t {
    Matmul = 0,
    MaxCriticalPath,
    AllPairsShortestPaths,
    MaxReliabilityPath,
    MinReliabilityPath,
    MinSpanningTree,
    MaxCapacityPath,
};

struct SemiringKernel {
    KernelId id;
    std::string_view name;
    CircOp circ;
    StarOp star;
    KernelGroup group;
    // Padding identities. pad_x/pad_w differ only for the (x,min)/(x,max)
    // kernels, where the X side pads with 1.0 to avoid inf*0.
    Fp16 pad_x;
    Fp16 pad_w;
    Fp16 pad_y;
};

inline std::span<const SemiringKernel> kernel_table() {
    static constexpr std::array<SemiringKernel, 7> table{{
        {KernelId::Matmul, "matmul", CircOp::Mul, StarOp::Add, KernelGroup::Matmul,
         kF16PosZero, kF16PosZero, kF16PosZero},
        {KernelId::MaxCriticalPath, "max-critical-path", CircOp::Add, StarOp::Max,
         KernelGroup::Group1, kF16NegInf, kF16NegInf, kF16NegInf},
        {KernelId::AllPairsShortestPaths, "apsp", CircOp::Add, StarOp::Min, KernelGroup::Group1,
         kF16PosInf, kF16PosInf, kF16PosInf},
        {KernelId::MaxReliabilityPath, "max-reliability-path", CircOp::Mul, StarOp::Max,
         KernelGroup::Group1, kF16One, kF16NegInf, kF16NegInf},
        {KernelId::MinReliabilityPath, "min-reliability-path", CircOp::Mul, StarOp::Min,
         KernelGroup::Group1, kF16One, kF16PosInf, kF16PosInf},
        {KernelId::MinSpanningTree, "min-spanning-tree", CircOp::Max, StarOp::Min,
         KernelGroup::Group2, kF16PosInf, kF16PosInf, kF16PosInf},
        {KernelId::MaxCapacityPath, "max-capacity-path", CircOp::Min, StarOp::Max,
         KernelGroup::Group2, kF16NegInf, kF16NegInf, kF16NegInf},
    }};
    return table;
}

inline const SemiringKernel& kernel(KernelId id) { return kernel_table()[size_t(id)]; }

inline const SemiringKernel* find_kernel(std::string_view name) {
    for (const auto& k : kernel_table())
        if (k.name == name) return &k;
    return nullptr;
}

// Stage 1: mapping-operation selection. For matmul the accumulator rides the
// FMA addend input; for the other kernels it is untouched here.
inline Fp16 ce_stage1(const SemiringKernel& k, Fp16 x, Fp16 w, Fp16 acc) {
    switch (k.group) {
        case KernelGroup::Matmul: return fma16(x, w, acc);
        case KernelGroup::Group1: return k.circ == CircOp::Add ? add16(x, w) : mul16(x, w);
        default:
            return fncomp16(x, w, k.circ == CircOp::Min ? CmpOp::Min : CmpOp::Max);
    }
}

// Stage 2: fully combinational reduction comparison (bypass for matmul).
inline Fp16 ce_stage2(const SemiringKernel& k, Fp16 t, Fp16 acc) {
    if (k.group == KernelGroup::Matmul) return t;
    return fncomp16(t, acc, k.star == StarOp::Min ? CmpOp::Min : CmpOp::Max);
}

// Golden model: acc <- Y[m,k]; for n = 0..N-1: acc <- stage2(stage1(x,w,acc),acc).
inline MatrixBuf gemm_op_reference(const SemiringKernel& k, const MatrixBuf& x,
                                   const MatrixBuf& w, const MatrixBuf& y) {
    check_gemm_dims(x, w, y);
    MatrixBuf z = MatrixBuf::make16(MatrixRole::Z, y.rows, y.cols);
    for (uint32_t m = 0; m < y.rows; ++m) {
        for (uint32_t kk = 0; kk < y.cols; ++kk) {
            Fp16 acc = y.at16(m, kk);
            for (uint32_t n = 0; n < x.cols; ++n)
                acc = ce_stage2(k, ce_stage1(k, x.at16(m, n), w.at16(n, kk), acc), acc);
            z.set16(m, kk, acc);
        }
    }
    return z;
}

// Same recurrence in double precision; tolerance reference, not bit-exact.
inline std::vector<double> wide_oracle(const SemiringKernel& k, const MatrixBuf& x,
                                       const MatrixBuf& w, const MatrixBuf& y) {
    check_gemm_dims(x, w, y);
    auto dmin = [](double a, double b) {
        if (std::isnan(a)) return b;
        if (std::isnan(b)) return a;
        return a < b ? a : b;
    };
    auto dmax = [](double a, double b) {
        if (std::isnan(a)) return b;
        if (std::isnan(b)) return a;
        return a > b ? a : b;
    };
    std::vector<double> z(size_t(y.rows) * y.cols);
    for (uint32_t m = 0; m < y.rows; ++m) {
        for (uint32_t kk = 0; kk < y.cols; ++kk) {
            double acc = to_double(y.at16(m, kk));
            for (uint32_t n = 0; n < x.cols; ++n) {
                double xv = to_double(x.at16(m, n));
                double wv = to_double(w.at16(n, kk));
                double t;
                switch (k.circ) {
                    case CircOp::Mul: t = k.group == KernelGroup::Matmul ? xv * wv + acc : xv * wv; break;
                    case CircOp::Add: t = xv + wv; break;
                    case CircOp::Min: t = dmin(xv, wv); break;
                    default: t = dmax(xv, wv); break;
                }
                if (k.group == KernelGroup::Matmul) {
                    acc = t;
                } else {
                    acc = k.star == StarOp::Min ? dmin(t, acc) : dmax(t, acc);
                }
            }
            z[size_t(m) * y.cols + kk] = acc;
        }
    }
    return z;
}

}  // namespace redmule
