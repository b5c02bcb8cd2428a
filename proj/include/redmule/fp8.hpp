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

// Hybrid 8-bit float codes and the cast units between them and binary16.
//
// Two formats, following the NVIDIA/OCP conventions:
//   E4M3 {1,4,3}: bias 7, no infinities, single NaN mantissa pattern (S.1111.111),
//                 max finite 448. Conversions to it saturate.
//   E5M2 {1,5,2}: bias 15, IEEE-like inf/NaN, max finite 57344. Conversions to
//                 it overflow to infinity past the RNE threshold (61440).
//
// Casting up is exact for every finite code (both formats embed in binary16);
// casting down is RNE with subnormal outputs where needed.

#pragma once

#include <cstdint>
#include <cstdio>
#include <string>

#include "redmule/fp16.hpp"

namespace redmule {

enum class Fp8Format : uint8_t { E4M3 = 0, E5M2 = 1 };

struct Fp8 {
    uint8_t bits = 0;

    static constexpr Fp8 from_bits(uint8_t b) { return Fp8{b}; }
    friend constexpr bool operator==(Fp8 a, Fp8 b) { return a.bits == b.bits; }
};

namespace detail {

struct Fp8Params {
    int exp_bits;
    int frac_bits;
    int bias;
    bool has_inf;
    uint8_t canonical_nan;
    int64_t max_finite_fixed24;  // max finite value in 2^-24 units
};

constexpr Fp8Params fp8_params(Fp8Format fmt) {
    if (fmt == Fp8Format::E4M3)
        return {4, 3, 7, false, 0x7F, int64_t(448) << 24};
    return {5, 2, 15, true, 0x7E, int64_t(57344) << 24};
}

}  // namespace detail

constexpr bool fp8_is_nan(Fp8 x, Fp8Format fmt) {
    if (fmt == Fp8Format::E4M3) return (x.bits & 0x7F) == 0x7F;
    return (x.bits & 0x7C) == 0x7C && (x.bits & 0x03) != 0;
}

constexpr bool fp8_is_inf(Fp8 x, Fp8Format fmt) {
    if (fmt == Fp8Format::E4M3) return false;
    return (x.bits & 0x7F) == 0x7C;
}

// Exact (lossless) widening cast; the input cast unit of the datapath.
inline Fp16 cast_fp8_to_fp16(Fp8 x, Fp8Format fmt) {
    const auto p = detail::fp8_params(fmt);
    if (fp8_is_nan(x, fmt)) return kF16QNan;
    bool s = (x.bits & 0x80) != 0;
    if (fp8_is_inf(x, fmt)) return s ? kF16NegInf : kF16PosInf;
    int e = (x.bits >> p.frac_bits) & ((1 << p.exp_bits) - 1);
    int frac = x.bits & ((1 << p.frac_bits) - 1);
    // value = sig * 2^(e_unbiased - frac_bits), sig with the implicit bit.
    int64_t sig = frac;
    int e_unb = 1 - p.bias;
    if (e != 0) {
        sig |= int64_t(1) << p.frac_bits;
        e_unb = e - p.bias;
    }
    if (sig == 0) return s ? kF16NegZero : kF16PosZero;
    int shift = 24 + e_unb - p.frac_bits;  // into 2^-24 units; >= 0 for both formats
    return Fp16{detail::rne_pack(s, static_cast<unsigned __int128>(sig) << shift, 24)};
}

// Narrowing cast with RNE; the output cast unit of the datapath.
inline Fp8 cast_fp16_to_fp8(Fp16 x, Fp8Format fmt) {
    const auto p = detail::fp8_params(fmt);
    if (x.is_nan()) return Fp8{p.canonical_nan};
    uint8_t sb = x.sign() ? 0x80 : 0;
    uint8_t max_code = p.has_inf ? 0x7B : 0x7E;  // largest finite code
    if (x.is_inf()) {
        if (p.has_inf) return Fp8{static_cast<uint8_t>(sb | 0x7C)};
        return Fp8{static_cast<uint8_t>(sb | max_code)};  // saturating format
    }
    int64_t mag = detail::fixed24_magnitude(x);
    if (mag == 0) return Fp8{sb};

    int top = 63;
    while (!(mag >> top)) --top;
    int value_exp = top - 24;
    int e_min = 1 - p.bias;
    int round_pos = (value_exp < e_min ? e_min : value_exp) - p.frac_bits;
    int shift = round_pos + 24;
    int64_t keep = mag >> shift;
    int64_t rem = mag & ((int64_t(1) << shift) - 1);
    int64_t half = int64_t(1) << (shift - 1);
    if (rem > half || (rem == half && (keep & 1))) ++keep;

    int64_t sig_one = int64_t(1) << p.frac_bits;
    if (value_exp < e_min) {
        // Subnormal rounding position; keep <= 2^frac_bits covers the carry
        // into the lowest normal binade.
        return Fp8{static_cast<uint8_t>(sb | keep)};
    }
    if (keep == sig_one << 1) {
        keep = sig_one;
        ++value_exp;
    }
    int biased = value_exp + p.bias;
    int e_max_biased = p.has_inf ? (1 << p.exp_bits) - 2 : (1 << p.exp_bits) - 1;
    uint8_t code = static_cast<uint8_t>(sb | (biased << p.frac_bits) | (keep - sig_one));
    if (biased > e_max_biased || (sb | max_code) < code || (!p.has_inf && code == (sb | 0x7F))) {
        if (p.has_inf) return Fp8{static_cast<uint8_t>(sb | 0x7C)};  // overflow to inf
        return Fp8{static_cast<uint8_t>(sb | max_code)};             // saturate
    }
    return Fp8{code};
}

inline std::string to_string(Fp8 x, Fp8Format fmt) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "0x%02x (%g)", x.bits, to_double(cast_fp8_to_fp16(x, fmt)));
    return buf;
}

}  // namespace redmule
