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

#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "redmule/matrix.hpp"
#include "redmule/workloads.hpp"

using namespace redmule;

TEST(MatrixFile, BinaryHeaderLayout) {
    MatrixBuf m = MatrixBuf::make16(MatrixRole::W, 2, 3);
    m.set16(0, 0, from_double(1.0));
    m.set16(1, 2, from_double(-2.0));
    std::ostringstream os(std::ios::binary);
    write_binary(os, m);
    std::string b = os.str();
    ASSERT_EQ(b.size(), 16u + 12u);
    EXPECT_EQ(b.substr(0, 4), "RMLM");
    EXPECT_EQ(uint8_t(b[4]), uint8_t(MatrixRole::W));
    EXPECT_EQ(uint8_t(b[5]), 0);  // fp16
    EXPECT_EQ(uint8_t(b[8]), 2);  // rows, little-endian
    EXPECT_EQ(uint8_t(b[12]), 3);
    // payload little-endian: first element 0x3C00
    EXPECT_EQ(uint8_t(b[16]), 0x00);
    EXPECT_EQ(uint8_t(b[17]), 0x3C);
}

TEST(MatrixFile, BinaryRoundTripProperty) {
    std::mt19937_64 rng(5);
    for (int it = 0; it < 30; ++it) {
        uint32_t rows = 1 + rng() % 17, cols = 1 + rng() % 13;
        MatrixBuf m = it % 3 == 2
                          ? MatrixBuf::make8(MatrixRole::Y, rows, cols,
                                             it % 2 ? Fp8Format::E4M3 : Fp8Format::E5M2)
                          : MatrixBuf::make16(MatrixRole::X, rows, cols);
        for (auto& v : m.h) v = uint16_t(rng());
        for (auto& v : m.q) v = uint8_t(rng());
        std::stringstream ss(std::ios::in | std::ios::out | std::ios::binary);
        write_binary(ss, m);
        MatrixBuf back = read_binary(ss);
        EXPECT_TRUE(back.same_codes(m));
        EXPECT_EQ(back.role, m.role);
        EXPECT_EQ(back.fp8_fmt, m.fp8_fmt);
    }
}

TEST(MatrixFile, RejectsGarbage) {
    std::istringstream bad1("not a matrix at all");
    EXPECT_THROW(read_binary(bad1), std::runtime_error);
    std::istringstream bad2("RMLM\x09\x00\x00\x00");
    EXPECT_THROW(read_binary(bad2), std::runtime_error);
    // truncated payload
    MatrixBuf m = MatrixBuf::make16(MatrixRole::X, 4, 4);
    std::ostringstream os(std::ios::binary);
    write_binary(os, m);
    std::istringstream cut(os.str().substr(0, 20));
    EXPECT_THROW(read_binary(cut), std::runtime_error);
}

TEST(MatrixText, LoaderAndWriter) {
    std::istringstream is("# comment\n1 2 3\n4 5 6\n");
    MatrixBuf m = read_text(is, MatrixRole::X);
    ASSERT_EQ(m.rows, 2u);
    ASSERT_EQ(m.cols, 3u);
    EXPECT_EQ(to_double(m.at16(1, 2)), 6.0);
    std::ostringstream os;
    write_text(os, m);
    EXPECT_EQ(os.str(), "1 2 3\n4 5 6\n");

    std::istringstream ragged("1 2\n3\n");
    EXPECT_THROW(read_text(ragged, MatrixRole::X), std::runtime_error);
    std::istringstream junk("1 banana\n");
    EXPECT_THROW(read_text(junk, MatrixRole::X), std::runtime_error);
}

TEST(MatrixBufApi, Fp8ViewCastsUp) {
    MatrixBuf m = MatrixBuf::make8(MatrixRole::X, 1, 2, Fp8Format::E4M3);
    m.q[0] = 0x38;  // 1.0
    m.q[1] = 0x7E;  // 448
    EXPECT_EQ(to_double(m.at16(0, 0)), 1.0);
    EXPECT_EQ(to_double(m.at16(0, 1)), 448.0);
}

TEST(MatrixBufApi, DimChecks) {
    MatrixBuf x = MatrixBuf::make16(MatrixRole::X, 2, 3);
    MatrixBuf w = MatrixBuf::make16(MatrixRole::W, 3, 4);
    MatrixBuf y = MatrixBuf::make16(MatrixRole::Y, 2, 4);
    EXPECT_NO_THROW(check_gemm_dims(x, w, y));
    MatrixBuf bad = MatrixBuf::make16(MatrixRole::W, 2, 4);
    EXPECT_THROW(check_gemm_dims(x, bad, y), std::invalid_argument);
}
