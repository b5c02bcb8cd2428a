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

// Design-time array parameters, the tile/pass decomposition of an MxNxK
// problem, ideal (zero-overhead) cycle counts and arithmetic-intensity models.
//
// The array is ce_height rows x ce_width columns of CEs, each CE with
// ce_pipe pipeline registers. A row exposes ce_width*(ce_pipe+1) pipeline
// slots; that is the width of the output tile a row computes, and the element
// count of one memory beat. Leftover edges are padded to full tiles.

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "redmule/matrix.hpp"

namespace redmule {

struct ArrayConfig {
    uint32_t ce_height = 12;   // rows of CEs (L)
    uint32_t ce_width = 4;     // CEs per row (H)
    uint32_t ce_pipe = 3;      // pipeline registers per CE (P)
    uint32_t port_bits = 288;  // memory port width, multiple of 32
    IoPrecision io_prec = IoPrecision::Fp16;
    uint32_t fifo_depth = 2;  // streamer FIFO depth in beats per stream

    static constexpr uint32_t kElemBits = 16;  // internal computing precision

    uint32_t io_elem_bits() const { return io_prec == IoPrecision::Fp16 ? 16 : 8; }
    // Pipeline slots per row == output-tile width == elements per beat.
    uint32_t row_pipe_slots() const { return ce_width * (ce_pipe + 1); }
    uint32_t beat_bits() const { return row_pipe_slots() * io_elem_bits(); }
    uint32_t num_ces() const { return ce_height * ce_width; }

    // Returns an empty string when valid, otherwise a diagnostic.
    std::string validate() const {
        if (ce_height < 1 || ce_width < 1) return "array needs at least one CE (L,H >= 1)";
        if (port_bits == 0 || port_bits % 32 != 0) return "port width must be a multiple of 32 bits";
        if (beat_bits() > port_bits)
            return "port too narrow: one buffer line needs " + std::to_string(beat_bits()) +
                   " bits but the port is " + std::to_string(port_bits);
        if (fifo_depth < 1) return "streamer FIFO depth must be >= 1";
        return {};
    }
};

struct TilePlan {
    uint32_t m = 0, n = 0, k = 0;          // problem dims
    uint32_t row_blocks = 0;               // ceil(M / L)
    uint32_t col_blocks = 0;               // ceil(K / (H*(P+1)))
    uint32_t passes_per_tile = 0;          // ceil(N / H)
    uint32_t x_groups = 0;                 // X-buffer refills per tile
    uint32_t padded_m = 0, padded_n = 0, padded_k = 0;

    uint32_t tiles() const { return row_blocks * col_blocks; }
    bool has_leftovers() const { return padded_m != m || padded_n != n || padded_k != k; }
};

inline TilePlan plan_tiles(const ArrayConfig& cfg, uint32_t m, uint32_t n, uint32_t k) {
    if (m < 1 || n < 1 || k < 1) throw std::invalid_argument("dims must be >= 1");
    const uint32_t slots = cfg.row_pipe_slots();
    TilePlan p;
    p.m = m;
    p.n = n;
    p.k = k;
    p.row_blocks = (m + cfg.ce_height - 1) / cfg.ce_height;
    p.col_blocks = (k + slots - 1) / slots;
    p.passes_per_tile = (n + cfg.ce_width - 1) / cfg.ce_width;
    // One X-buffer line feeds (P+1) passes; the X image is padded to whole lines.
    p.x_groups = (p.passes_per_tile + cfg.ce_pipe) / (cfg.ce_pipe + 1);
    p.padded_m = p.row_blocks * cfg.ce_height;
    p.padded_n = p.passes_per_tile * cfg.ce_width;
    p.padded_k = p.col_blocks * slots;
    return p;
}

// Zero-overhead compute cycles: each pass occupies H*(P+1) issue cycles.
inline uint64_t ideal_cycles(const ArrayConfig& cfg, const TilePlan& p) {
    return uint64_t(p.row_blocks) * p.col_blocks * p.passes_per_tile * cfg.row_pipe_slots();
}

// Operations per load/store element of a scalar dot-product unit.
inline double intensity_1d(uint64_t n) {
    return 2.0 * double(n) / (2.0 * double(n) + 2.0);
}

// Operations per load/store element of an LxH outer-product array.
inline double intensity_2d(uint64_t l, uint64_t h, uint64_t n) {
    double lh = double(l) * double(h);
    return 2.0 * lh * double(n) / ((double(l) + double(h)) * double(n) + 2.0 * lh);
}

}  // namespace redmule
