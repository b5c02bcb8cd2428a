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

// Benchmark input generators and graph-problem drivers with independent
// oracles. Weights are chosen so all semiring arithmetic stays exact in
// binary16: complete graphs use integer weights up to 255 (sums <= 510),
// sparse graphs with +inf sentinels cap weights at 63 so every finite
// distance over <= 31 hops stays below 2048.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <istream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "redmule/matrix.hpp"
#include "redmule/semiring.hpp"

namespace redmule {

// xorshift64* PRNG; the documented generator for every synthetic workload.
struct Rng {
    uint64_t state;

    explicit Rng(uint64_t seed) {
        // splitmix64 scramble so small seeds decorrelate
        uint64_t z = seed + 0x9E3779B97F4A7C15ull;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        state = (z ^ (z >> 31)) | 1ull;
    }

    uint64_t next() {
        state ^= state >> 12;
        state ^= state << 25;
        state ^= state >> 27;
        return state * 0x2545F4914F6CDD1Dull;
    }

    // uniform in [0, 1) with 53 usable bits
    double uniform() { return double(next() >> 11) * 0x1.0p-53; }

    uint64_t below(uint64_t n) { return next() % n; }
};

enum class Distribution : uint8_t {
    Unit,     // uniform in [-1, 1]
    UnitPos,  // uniform in [0, 1]
    Int8,     // exact integers in [-128, 127]
};

inline const char* distribution_name(Distribution d) {
    switch (d) {
        case Distribution::Unit: return "unit";
        case Distribution::UnitPos: return "unit-pos";
        default: return "int8";
    }
}

inline Distribution parse_distribution(const std::string& s) {
    if (s == "unit") return Distribution::Unit;
    if (s == "unit-pos") return Distribution::UnitPos;
    if (s == "int8") return Distribution::Int8;
    throw std::invalid_argument("unknown distribution: " + s);
}

inline MatrixBuf gen_matrix(uint64_t seed, MatrixRole role, uint32_t rows, uint32_t cols,
                            Distribution dist, IoPrecision prec = IoPrecision::Fp16,
                            Fp8Format fmt = Fp8Format::E4M3) {
    if (rows < 1 || cols < 1) throw std::invalid_argument("dims must be >= 1");
    // Role folds into the stream so X/W/Y drawn from one seed differ.
    Rng rng(seed ^ (0x9E37ull * (uint64_t(role) + 1)));
    MatrixBuf m = prec == IoPrecision::Fp16 ? MatrixBuf::make16(role, rows, cols)
                                            : MatrixBuf::make8(role, rows, cols, fmt);
    for (uint32_t r = 0; r < rows; ++r) {
        for (uint32_t c = 0; c < cols; ++c) {
            double v;
            switch (dist) {
                case Distribution::Unit:
                    // multiples of 2^-20: exact in binary16's subnormal grid,
                    // so no value collapses to -0
                    v = double(int64_t(rng.below(2097153)) - 1048576) * 0x1.0p-20;
                    break;
                case Distribution::UnitPos: v = double(rng.below(1048577)) * 0x1.0p-20; break;
                default: v = double(int64_t(rng.below(256)) - 128); break;
            }
            m.set16(r, c, from_double(v));
        }
    }
    return m;
}

enum class GraphProblem : uint8_t { Apsp, MaxCapacity };

struct GraphInstance {
    uint32_t n = 0;
    GraphProblem problem = GraphProblem::Apsp;
    MatrixBuf weights;  // dense n x n binary16; diagonal/absent-edge sentinels per problem

    double weight(uint32_t u, uint32_t v) const { return to_double(weights.at16(u, v)); }
};

// Random instance. density 1.0 produces a complete digraph (weights up to
// max_w <= 255); lower densities leave absent edges at the problem sentinel
// and cap weights at 63 to keep path sums exact.
inline GraphInstance gen_graph(uint64_t seed, uint32_t n, GraphProblem problem,
                               double density = 1.0, uint32_t max_w = 255) {
    if (n < 1) throw std::invalid_argument("graph needs >= 1 node");
    if (density < 1.0 && max_w > 63) max_w = 63;
    Rng rng(seed ^ 0xC0FFEEull);
    GraphInstance g;
    g.n = n;
    g.problem = problem;
    g.weights = MatrixBuf::make16(MatrixRole::X, n, n);
    const Fp16 absent = problem == GraphProblem::Apsp ? kF16PosInf : kF16PosZero;
    const Fp16 diag = problem == GraphProblem::Apsp ? kF16PosZero : kF16PosInf;
    for (uint32_t u = 0; u < n; ++u) {
        for (uint32_t v = 0; v < n; ++v) {
            if (u == v) {
                g.weights.set16(u, v, diag);
            } else if (rng.uniform() < density) {
                g.weights.set16(u, v, from_double(double(1 + rng.below(max_w))));
            } else {
                g.weights.set16(u, v, absent);
            }
        }
    }
    return g;
}

// Edge-list text: "u v w" per line, '#' comments; node count inferred.
inline GraphInstance load_graph_edge_list(std::istream& is, GraphProblem problem) {
    struct Edge {
        uint32_t u, v;
        double w;
    };
    std::vector<Edge> edges;
    uint32_t n = 0;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        Edge e{};
        if (!(ls >> e.u >> e.v >> e.w)) throw std::runtime_error("bad edge line: " + line);
        n = std::max({n, e.u + 1, e.v + 1});
        edges.push_back(e);
    }
    if (n == 0) throw std::runtime_error("empty edge list");
    GraphInstance g;
    g.n = n;
    g.problem = problem;
    g.weights = MatrixBuf::make16(MatrixRole::X, n, n);
    const Fp16 absent = problem == GraphProblem::Apsp ? kF16PosInf : kF16PosZero;
    const Fp16 diag = problem == GraphProblem::Apsp ? kF16PosZero : kF16PosInf;
    for (uint32_t u = 0; u < n; ++u)
        for (uint32_t v = 0; v < n; ++v) g.weights.set16(u, v, u == v ? diag : absent);
    for (const auto& e : edges) g.weights.set16(e.u, e.v, from_double(e.w));
    return g;
}

// Independent oracles (plain double relaxation, no semiring machinery).

inline std::vector<double> floyd_warshall(const GraphInstance& g) {
    uint32_t n = g.n;
    std::vector<double> d(size_t(n) * n);
    for (uint32_t u = 0; u < n; ++u)
        for (uint32_t v = 0; v < n; ++v) d[size_t(u) * n + v] = g.weight(u, v);
    for (uint32_t k = 0; k < n; ++k)
        for (uint32_t i = 0; i < n; ++i)
            for (uint32_t j = 0; j < n; ++j) {
                double cand = d[size_t(i) * n + k] + d[size_t(k) * n + j];
                if (cand < d[size_t(i) * n + j]) d[size_t(i) * n + j] = cand;
            }
    return d;
}

inline std::vector<double> widest_path(const GraphInstance& g) {
    uint32_t n = g.n;
    std::vector<double> c(size_t(n) * n);
    for (uint32_t u = 0; u < n; ++u)
        for (uint32_t v = 0; v < n; ++v) c[size_t(u) * n + v] = g.weight(u, v);
    for (uint32_t k = 0; k < n; ++k)
        for (uint32_t i = 0; i < n; ++i)
            for (uint32_t j = 0; j < n; ++j) {
                double cand = std::min(c[size_t(i) * n + k], c[size_t(k) * n + j]);
                if (cand > c[size_t(i) * n + j]) c[size_t(i) * n + j] = cand;
            }
    return c;
}

// Evaluates Z = (X o W) * Y through either the reference model or an engine.
using GemmOpEvaluator = std::function<MatrixBuf(const SemiringKernel&, const MatrixBuf&,
                                                const MatrixBuf&, const MatrixBuf&)>;

inline GemmOpEvaluator reference_evaluator() {
    return [](const SemiringKernel& k, const MatrixBuf& x, const MatrixBuf& w,
              const MatrixBuf& y) { return gemm_op_reference(k, x, w, y); };
}

namespace detail {

// ceil(log2(n-1)) doublings: the initial matrix already covers <=1-edge paths.
inline uint32_t squaring_iterations(uint32_t n) {
    uint32_t it = 0;
    uint64_t reach = 1;
    while (n >= 2 && reach < n - 1) {
        reach *= 2;
        ++it;
    }
    return it;
}

inline MatrixBuf solve_by_squaring(const GraphInstance& g, const SemiringKernel& k,
                                   const GemmOpEvaluator& eval) {
    MatrixBuf d = g.weights;
    d.role = MatrixRole::X;
    for (uint32_t i = 0; i < squaring_iterations(g.n); ++i) {
        MatrixBuf x = d, w = d, y = d;
        x.role = MatrixRole::X;
        w.role = MatrixRole::W;
        y.role = MatrixRole::Y;
        d = eval(k, x, w, y);
    }
    return d;
}

}  // namespace detail

// Repeated squaring with the (+,min) kernel; equals Floyd-Warshall exactly
// for weights within the exact-integer envelope.
inline MatrixBuf apsp_solve(const GraphInstance& g, const GemmOpEvaluator& eval) {
    return detail::solve_by_squaring(g, kernel(KernelId::AllPairsShortestPaths), eval);
}

// Repeated squaring with the (min,max) kernel; equals the widest-path oracle.
inline MatrixBuf max_capacity_solve(const GraphInstance& g, const GemmOpEvaluator& eval) {
    return detail::solve_by_squaring(g, kernel(KernelId::MaxCapacityPath), eval);
}

}  // namespace redmule
