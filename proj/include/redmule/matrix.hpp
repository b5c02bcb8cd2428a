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

// Dense row-major operand/result matrices plus their on-disk formats:
//  - binary: 16-byte header (magic "RMLM", role u8, fmt u8, reserved u16,
//    rows u32 LE, cols u32 LE) followed by raw little-endian codes;
//  - text: one row per line, decimal values (test/loader convenience).

#pragma once

#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "redmule/fp16.hpp"
#include "redmule/fp8.hpp"

namespace redmule {

enum class MatrixRole : uint8_t { X = 0, W = 1, Y = 2, Z = 3 };

enum class IoPrecision : uint8_t { Fp16, Fp8Compressed };

inline const char* role_name(MatrixRole r) {
    switch (r) {
        case MatrixRole::X: return "X";
        case MatrixRole::W: return "W";
        case MatrixRole::Y: return "Y";
        default: return "Z";
    }
}

struct MatrixBuf {
    MatrixRole role = MatrixRole::X;
    uint32_t rows = 0;
    uint32_t cols = 0;
    IoPrecision prec = IoPrecision::Fp16;
    Fp8Format fp8_fmt = Fp8Format::E4M3;
    std::vector<uint16_t> h;  // binary16 codes, used when prec == Fp16
    std::vector<uint8_t> q;   // fp8 codes, used when prec == Fp8Compressed

    static MatrixBuf make16(MatrixRole role, uint32_t rows, uint32_t cols) {
        MatrixBuf m;
        m.role = role;
        m.rows = rows;
        m.cols = cols;
        m.h.assign(size_t(rows) * cols, 0);
        return m;
    }

    static MatrixBuf make8(MatrixRole role, uint32_t rows, uint32_t cols, Fp8Format fmt) {
        MatrixBuf m;
        m.role = role;
        m.rows = rows;
        m.cols = cols;
        m.prec = IoPrecision::Fp8Compressed;
        m.fp8_fmt = fmt;
        m.q.assign(size_t(rows) * cols, 0);
        return m;
    }

    size_t elems() const { return size_t(rows) * cols; }

    // Element view as binary16, casting up when the store is compressed.
    Fp16 at16(uint32_t r, uint32_t c) const {
        size_t i = size_t(r) * cols + c;
        if (prec == IoPrecision::Fp16) return Fp16{h[i]};
        return cast_fp8_to_fp16(Fp8{q[i]}, fp8_fmt);
    }

    void set16(uint32_t r, uint32_t c, Fp16 v) {
        size_t i = size_t(r) * cols + c;
        if (prec == IoPrecision::Fp16)
            h[i] = v.bits;
        else
            q[i] = cast_fp16_to_fp8(v, fp8_fmt).bits;
    }

    bool same_codes(const MatrixBuf& o) const {
        return rows == o.rows && cols == o.cols && prec == o.prec && h == o.h && q == o.q;
    }
};

inline void check_gemm_dims(const MatrixBuf& x, const MatrixBuf& w, const MatrixBuf& y) {
    if (x.cols != w.rows || y.rows != x.rows || y.cols != w.cols)
        throw std::invalid_argument("dimension mismatch: X is MxN, W must be NxK, Y must be MxK");
    if (x.rows == 0 || x.cols == 0 || w.cols == 0)
        throw std::invalid_argument("matrix dimensions must be positive");
}

namespace detail {

inline void put_u32le(std::ostream& os, uint32_t v) {
    char b[4] = {char(v & 0xFF), char((v >> 8) & 0xFF), char((v >> 16) & 0xFF),
                 char((v >> 24) & 0xFF)};
    os.write(b, 4);
}

inline uint32_t get_u32le(std::istream& is) {
    unsigned char b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    return uint32_t(b[0]) | uint32_t(b[1]) << 8 | uint32_t(b[2]) << 16 | uint32_t(b[3]) << 24;
}

}  // namespace detail

inline void write_binary(std::ostream& os, const MatrixBuf& m) {
    os.write("RMLM", 4);
    char role = char(m.role);
    // fmt byte: 0 = fp16, 1 = fp8 e4m3, 2 = fp8 e5m2
    char fmt = m.prec == IoPrecision::Fp16 ? 0 : (m.fp8_fmt == Fp8Format::E4M3 ? 1 : 2);
    os.put(role);
    os.put(fmt);
    os.put(0);
    os.put(0);
    detail::put_u32le(os, m.rows);
    detail::put_u32le(os, m.cols);
    if (m.prec == IoPrecision::Fp16) {
        for (uint16_t v : m.h) {
            os.put(char(v & 0xFF));
            os.put(char(v >> 8));
        }
    } else {
        os.write(reinterpret_cast<const char*>(m.q.data()), std::streamsize(m.q.size()));
    }
    if (!os) throw std::runtime_error("matrix write failed");
}

inline MatrixBuf read_binary(std::istream& is) {
    char magic[4];
    is.read(magic, 4);
    if (!is || std::string(magic, 4) != "RMLM")
        throw std::runtime_error("bad matrix file: missing RMLM magic");
    int role = is.get();
    int fmt = is.get();
    is.get();
    is.get();
    if (role < 0 || role > 3 || fmt < 0 || fmt > 2)
        throw std::runtime_error("bad matrix file: invalid role/fmt byte");
    uint32_t rows = detail::get_u32le(is);
    uint32_t cols = detail::get_u32le(is);
    if (!is || rows == 0 || cols == 0) throw std::runtime_error("bad matrix file: header");
    MatrixBuf m = fmt == 0 ? MatrixBuf::make16(MatrixRole(role), rows, cols)
                           : MatrixBuf::make8(MatrixRole(role), rows, cols,
                                              fmt == 1 ? Fp8Format::E4M3 : Fp8Format::E5M2);
    if (fmt == 0) {
        for (auto& v : m.h) {
            int lo = is.get(), hi = is.get();
            v = uint16_t(lo | (hi << 8));
        }
    } else {
        is.read(reinterpret_cast<char*>(m.q.data()), std::streamsize(m.q.size()));
    }
    if (!is) throw std::runtime_error("bad matrix file: truncated payload");
    return m;
}

inline void write_binary_file(const std::string& path, const MatrixBuf& m) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open for write: " + path);
    write_binary(os, m);
}

inline MatrixBuf read_binary_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open: " + path);
    return read_binary(is);
}

// Text form: one row per line, whitespace-separated decimal values.
inline MatrixBuf read_text(std::istream& is, MatrixRole role) {
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::vector<double> vals;
        double v;
        while (ls >> v) vals.push_back(v);
        if (!ls.eof()) throw std::runtime_error("bad matrix text: non-numeric token");
        if (!vals.empty()) rows.push_back(std::move(vals));
    }
    if (rows.empty()) throw std::runtime_error("bad matrix text: no rows");
    size_t cols = rows[0].size();
    for (const auto& r : rows)
        if (r.size() != cols) throw std::runtime_error("bad matrix text: ragged rows");
    MatrixBuf m = MatrixBuf::make16(role, uint32_t(rows.size()), uint32_t(cols));
    for (uint32_t r = 0; r < m.rows; ++r)
        for (uint32_t c = 0; c < m.cols; ++c) m.set16(r, c, from_double(rows[r][c]));
    return m;
}

inline MatrixBuf read_text_file(const std::string& path, MatrixRole role) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open: " + path);
    return read_text(is, role);
}

inline void write_text(std::ostream& os, const MatrixBuf& m) {
    for (uint32_t r = 0; r < m.rows; ++r) {
        for (uint32_t c = 0; c < m.cols; ++c) {
            if (c) os.put(' ');
            char buf[32];
            std::snprintf(buf, sizeof buf, "%g", to_double(m.at16(r, c)));
            os << buf;
        }
        os.put('\n');
    }
}

}  // namespace redmule
