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

// Bit-exact IEEE 754 binary16 scalar arithmetic on integer codes.
//
// Every operation works on raw 16-bit codes (softfloat style); host float /
// half types are never involved, so results are identical on every platform.
// Rounding is always round-to-nearest-even with a single rounding step per
// operation. The comparison unit (min/max) is NaN-suppressing: if exactly one
// operand is NaN the other is returned, and -0 orders below +0.

#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <string>

namespace redmule {

enum class CmpOp : uint8_t { Min, Max };

struct Fp16 {
    uint16_t bits = 0;

    static constexpr Fp16 from_bits(uint16_t b) { return Fp16{b}; }

    constexpr int exp_field() const { return (bits >> 10) & 0x1F; }
    constexpr int frac_field() const { return bits & 0x3FF; }
    constexpr bool sign() const { return (bits & 0x8000) != 0; }
    constexpr bool is_nan() const { return exp_field() == 0x1F && frac_field() != 0; }
    constexpr bool is_inf() const { return exp_field() == 0x1F && frac_field() == 0; }
    constexpr bool is_zero() const { return (bits & 0x7FFF) == 0; }
    constexpr bool is_subnormal() const { return exp_field() == 0 && frac_field() != 0; }
    constexpr bool is_finite() const { return exp_field() != 0x1F; }

    friend constexpr bool operator==(Fp16 a, Fp16 b) { return a.bits == b.bits; }
};

inline constexpr Fp16 kF16QNan{0x7E00};
inline constexpr Fp16 kF16PosInf{0x7C00};
inline constexpr Fp16 kF16NegInf{0xFC00};
inline constexpr Fp16 kF16PosZero{0x0000};
inline constexpr Fp16 kF16NegZero{0x8000};
inline constexpr Fp16 kF16One{0x3C00};
inline constexpr Fp16 kF16MaxFinite{0x7BFF};  // 65504

namespace detail {

// Magnitude of a finite code in units of 2^-24 (the subnormal step).
// Exact for every finite code; max is 65504 * 2^24 < 2^41.
constexpr int64_t fixed24_magnitude(Fp16 h) {
    int e = h.exp_field();
    int64_t frac = h.frac_field();
    if (e == 0) return frac;
    return (frac | 0x400) << (e - 1);
}

// Rounds the exact positive value mag * 2^-frac_scale to binary16, RNE,
// overflowing to infinity. frac_scale must be >= 24 so the subnormal
// rounding position never falls below bit 0 of mag.
inline uint16_t rne_pack(bool sign, unsigned __int128 mag, int frac_scale) {
    int top = 0;
    for (int probe = 64; probe; probe >>= 1)
        if (mag >> (top + probe)) top += probe;
    int value_exp = top - frac_scale;
    uint16_t s = sign ? 0x8000 : 0;

    int round_pos = value_exp <= -14 ? -24 : value_exp - 10;
    int shift = round_pos + frac_scale;
    unsigned __int128 one = 1;
    unsigned __int128 keep = mag >> shift;
    if (shift) {
        unsigned __int128 rem = mag & ((one << shift) - 1);
        unsigned __int128 half = one << (shift - 1);
        if (rem > half || (rem == half && (keep & 1))) ++keep;
    }
    if (value_exp <= -14) {
        // keep <= 0x800 here; the plain integer code covers underflow to zero,
        // subnormals and the carry into the lowest normal binades.
        return s | static_cast<uint16_t>(keep);
    }
    if (keep == 0x800) {
        keep = 0x400;
        ++value_exp;
    }
    int biased = value_exp + 15;
    if (biased >= 0x1F) return s | 0x7C00;
    return s | static_cast<uint16_t>(biased << 10) | static_cast<uint16_t>(keep - 0x400);
}

}  // namespace detail

inline Fp16 add16(Fp16 a, Fp16 b) {
    if (a.is_nan() || b.is_nan()) return kF16QNan;
    if (a.is_inf() || b.is_inf()) {
        if (a.is_inf() && b.is_inf() && a.sign() != b.sign()) return kF16QNan;
        return a.is_inf() ? a : b;
    }
    int64_t ma = detail::fixed24_magnitude(a);
    int64_t mb = detail::fixed24_magnitude(b);
    int64_t sum = (a.sign() ? -ma : ma) + (b.sign() ? -mb : mb);
    if (sum == 0) return (a.sign() && b.sign()) ? kF16NegZero : kF16PosZero;
    bool neg = sum < 0;
    uint64_t mag = neg ? static_cast<uint64_t>(-sum) : static_cast<uint64_t>(sum);
    return Fp16{detail::rne_pack(neg, mag, 24)};
}

inline Fp16 mul16(Fp16 a, Fp16 b) {
    if (a.is_nan() || b.is_nan()) return kF16QNan;
    bool s = a.sign() != b.sign();
    if (a.is_inf() || b.is_inf()) {
        if (a.is_zero() || b.is_zero()) return kF16QNan;
        return s ? kF16NegInf : kF16PosInf;
    }
    unsigned __int128 prod = static_cast<unsigned __int128>(detail::fixed24_magnitude(a)) *
                             static_cast<unsigned __int128>(detail::fixed24_magnitude(b));
    if (prod == 0) return s ? kF16NegZero : kF16PosZero;
    return Fp16{detail::rne_pack(s, prod, 48)};
}

// Fused multiply-add: round(a*b + c) with one rounding step.
inline Fp16 fma16(Fp16 a, Fp16 b, Fp16 c) {
    if (a.is_nan() || b.is_nan() || c.is_nan()) return kF16QNan;
    if ((a.is_inf() && b.is_zero()) || (a.is_zero() && b.is_inf())) return kF16QNan;
    bool ps = a.sign() != b.sign();
    if (a.is_inf() || b.is_inf()) {
        if (c.is_inf() && c.sign() != ps) return kF16QNan;
        return ps ? kF16NegInf : kF16PosInf;
    }
    if (c.is_inf()) return c;

    __int128 prod = static_cast<__int128>(detail::fixed24_magnitude(a)) *
                    static_cast<__int128>(detail::fixed24_magnitude(b));  // 2^-48 units
    if (ps) prod = -prod;
    __int128 addend = static_cast<__int128>(detail::fixed24_magnitude(c)) << 24;
    if (c.sign()) addend = -addend;
    __int128 sum = prod + addend;
    if (sum == 0) {
        if (prod == 0 && addend == 0) return (ps && c.sign()) ? kF16NegZero : kF16PosZero;
        return kF16PosZero;  // cancellation of nonzero terms rounds to +0
    }
    bool neg = sum < 0;
    unsigned __int128 mag =
        neg ? static_cast<unsigned __int128>(-sum) : static_cast<unsigned __int128>(sum);
    uint16_t out = detail::rne_pack(neg, mag, 48);
#ifdef REDMULE_FAULT_FMA_LSB
    // Test hook: mis-round a sparse deterministic subset of finite results so
    // the self-check machinery can prove it detects a broken rounding path.
    if ((out & 0x7C00) != 0x7C00 && ((a.bits ^ (b.bits << 1) ^ (c.bits << 2)) & 0xFFF) == 0x123)
        out ^= 1;
#endif
    return Fp16{out};
}

// FP min/max comparison. NaN-suppressing; -0 < +0.
inline Fp16 fncomp16(Fp16 a, Fp16 b, CmpOp op) {
    if (a.is_nan()) return b.is_nan() ? kF16QNan : b;
    if (b.is_nan()) return a;
    int32_t ka = a.sign() ? -(a.bits & 0x7FFF) - 1 : (a.bits & 0x7FFF);
    int32_t kb = b.sign() ? -(b.bits & 0x7FFF) - 1 : (b.bits & 0x7FFF);
    bool a_le = ka <= kb;
    return (op == CmpOp::Min) == a_le ? a : b;
}

inline Fp16 min16(Fp16 a, Fp16 b) { return fncomp16(a, b, CmpOp::Min); }
inline Fp16 max16(Fp16 a, Fp16 b) { return fncomp16(a, b, CmpOp::Max); }

// Exact decode; every finite binary16 value is a double.
inline double to_double(Fp16 h) {
    if (h.is_nan()) return std::numeric_limits<double>::quiet_NaN();
    if (h.is_inf()) return h.sign() ? -std::numeric_limits<double>::infinity()
                                    : std::numeric_limits<double>::infinity();
    double v = std::ldexp(static_cast<double>(detail::fixed24_magnitude(h)), -24);
    return h.sign() ? -v : v;
}

// RNE encode from double (used by loaders and generators).
inline Fp16 from_double(double v) {
    if (std::isnan(v)) return kF16QNan;
    bool s = std::signbit(v);
    uint16_t sb = s ? 0x8000 : 0;
    if (std::isinf(v)) return Fp16{static_cast<uint16_t>(sb | 0x7C00)};
    if (v == 0.0) return Fp16{sb};
    double m = std::fabs(v);
    if (m >= 65520.0) return Fp16{static_cast<uint16_t>(sb | 0x7C00)};
    if (m > 65504.0) return Fp16{static_cast<uint16_t>(sb | 0x7BFF)};
    int e2 = std::ilogb(m);  // value_exp of the leading bit
    int round_pos = e2 <= -14 ? -24 : e2 - 10;
    double t = std::ldexp(m, -round_pos);  // exact scaling
    double fl = std::floor(t);
    double rem = t - fl;
    auto keep = static_cast<uint64_t>(fl);
    if (rem > 0.5 || (rem == 0.5 && (keep & 1))) ++keep;
    if (e2 <= -14) return Fp16{static_cast<uint16_t>(sb | keep)};
    if (keep == 0x800) {
        keep = 0x400;
        ++e2;
    }
    int biased = e2 + 15;
    if (biased >= 0x1F) return Fp16{static_cast<uint16_t>(sb | 0x7C00)};
    return Fp16{static_cast<uint16_t>(sb | (biased << 10) | (keep - 0x400))};
}

// Debug formatter: hex code plus decoded decimal.
inline std::string to_string(Fp16 h) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "0x%04x (%g)", h.bits, to_double(h));
    return buf;
}

}  // namespace redmule
