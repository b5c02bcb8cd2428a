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

// redmule-sim: cycle-level functional simulator of a reduced-precision
// matrix-operation accelerator array.
//
// Subcommands:
//   run     simulate one GEMM-Op (or a shape list) and emit a JSON report
//   sweep   evaluate a cross-product of array configurations, emit CSV
//   verify  run the built-in self-check battery
//   graph   solve a graph problem on the engine and check it against the
//           independent oracle
//
// Exit codes: 0 ok, 1/2 usage errors, 3 bandwidth-infeasible configuration,
// 4 functional mismatch (--check / graph oracle), 5 I/O error.

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "redmule/engine.hpp"
#include "redmule/report.hpp"
#include "redmule/verify.hpp"
#include "redmule/workloads.hpp"

namespace {

constexpr int kExitInfeasible = 3;
constexpr int kExitMismatch = 4;
constexpr int kExitIo = 5;

struct RunConfig {
    redmule::ArrayConfig cfg;
    std::string kernel_name = "matmul";
    std::string dims;
    std::string shapes_file;
    std::string mem_spec = "ideal";
    std::string dist = "unit";
    std::string fp8_fmt = "e4m3";
    uint64_t seed = 1;
    bool check = false;
    bool trace = false;
    std::string out_path;
    std::string load_x, load_w, load_y, save_z;
};

struct Dims {
    uint32_t m, n, k;
};

Dims parse_dims(const std::string& s) {
    Dims d{};
    char sep1, sep2;
    std::istringstream is(s);
    if (!(is >> d.m >> sep1 >> d.n >> sep2 >> d.k) || sep1 != 'x' || sep2 != 'x' || !is.eof() ||
        d.m < 1 || d.n < 1 || d.k < 1)
        throw CLI::ValidationError("--dims", "expected MxNxK with positive dims, got '" + s + "'");
    return d;
}

redmule::MemoryModel parse_mem(const std::string& spec) {
    using redmule::MemoryModel;
    if (spec == "ideal") return MemoryModel::ideal();
    if (spec.rfind("lat:", 0) == 0) return MemoryModel::fixed_latency(uint32_t(std::stoul(spec.substr(4))));
    if (spec.rfind("stalls:", 0) == 0) {
        std::ifstream is(spec.substr(7));
        if (!is) throw std::runtime_error("cannot open stall file: " + spec.substr(7));
        std::vector<uint64_t> cycles;
        std::string line;
        while (std::getline(is, line)) {
            if (line.empty() || line[0] == '#') continue;
            cycles.push_back(std::stoull(line));
        }
        return MemoryModel::stall_pattern(std::move(cycles));
    }
    throw CLI::ValidationError("--mem", "expected ideal, lat:N or stalls:FILE, got '" + spec + "'");
}

redmule::Fp8Format parse_fp8_fmt(const std::string& s) {
    if (s == "e4m3") return redmule::Fp8Format::E4M3;
    if (s == "e5m2") return redmule::Fp8Format::E5M2;
    throw CLI::ValidationError("--fp8-fmt", "expected e4m3 or e5m2");
}

redmule::MatrixBuf load_matrix(const std::string& path, redmule::MatrixRole role) {
    if (path.size() > 4 && path.substr(path.size() - 4) == ".txt")
        return redmule::read_text_file(path, role);
    return redmule::read_binary_file(path);
}

void write_output(const std::string& path, const std::string& content) {
    if (path.empty() || path == "-") {
        std::cout << content;
        return;
    }
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open for write: " + path);
    os << content;
}

void add_array_options(CLI::App* app, RunConfig& rc) {
    app->add_option("--L", rc.cfg.ce_height, "CE rows")->check(CLI::PositiveNumber);
    app->add_option("--H", rc.cfg.ce_width, "CEs per row")->check(CLI::PositiveNumber);
    app->add_option("--P", rc.cfg.ce_pipe, "pipeline registers per CE");
    app->add_option("--port-bits", rc.cfg.port_bits, "memory port width in bits");
    app->add_option("--fifo-depth", rc.cfg.fifo_depth, "streamer FIFO depth in beats");
    app->add_option("--io", [&rc](const std::vector<std::string>& v) {
            if (v[0] == "fp16") rc.cfg.io_prec = redmule::IoPrecision::Fp16;
            else if (v[0] == "fp8") rc.cfg.io_prec = redmule::IoPrecision::Fp8Compressed;
            else return false;
            return true;
        }, "I/O precision: fp16 | fp8");
    app->add_option("--fp8-fmt", rc.fp8_fmt, "fp8 format for generated tensors: e4m3 | e5m2");
    app->add_option("--mem", rc.mem_spec, "memory model: ideal | lat:N | stalls:FILE");
    app->add_option("--seed", rc.seed, "PRNG seed for generated inputs");
}

// Applies a JSON config file underneath already-parsed CLI flags.
void apply_config_file(const std::string& path, RunConfig& rc, const CLI::App* app) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open config: " + path);
    nlohmann::json j = nlohmann::json::parse(is);
    auto set_u32 = [&](const char* key, const char* flag, uint32_t& dst) {
        if (j.contains(key) && app->count(flag) == 0) dst = j[key].get<uint32_t>();
    };
    set_u32("L", "--L", rc.cfg.ce_height);
    set_u32("H", "--H", rc.cfg.ce_width);
    set_u32("P", "--P", rc.cfg.ce_pipe);
    set_u32("port_bits", "--port-bits", rc.cfg.port_bits);
    set_u32("fifo_depth", "--fifo-depth", rc.cfg.fifo_depth);
    if (j.contains("io") && app->count("--io") == 0)
        rc.cfg.io_prec = j["io"] == "fp8" ? redmule::IoPrecision::Fp8Compressed
                                          : redmule::IoPrecision::Fp16;
    if (j.contains("kernel") && app->count("--kernel") == 0) rc.kernel_name = j["kernel"];
    if (j.contains("dims") && app->count("--dims") == 0) rc.dims = j["dims"];
    if (j.contains("mem") && app->count("--mem") == 0) rc.mem_spec = j["mem"];
    if (j.contains("seed") && app->count("--seed") == 0) rc.seed = j["seed"].get<uint64_t>();
    if (j.contains("dist") && app->count("--dist") == 0) rc.dist = j["dist"];
}

int do_run(RunConfig& rc) {
    using namespace redmule;
    if (auto msg = rc.cfg.validate(); !msg.empty()) {
        std::cerr << "error: " << msg << "\n";
        return 2;
    }
    const SemiringKernel* ker = find_kernel(rc.kernel_name);
    if (!ker) {
        std::cerr << "error: unknown kernel '" << rc.kernel_name << "'\n";
        return 2;
    }
    std::vector<Dims> work;
    if (!rc.shapes_file.empty()) {
        std::ifstream is(rc.shapes_file);
        if (!is) {
            std::cerr << "error: cannot open shapes file\n";
            return kExitIo;
        }
        std::string line;
        while (std::getline(is, line)) {
            if (line.empty() || line[0] == '#') continue;
            for (auto& ch : line)
                if (ch == ',') ch = 'x';
            work.push_back(parse_dims(line));
        }
    } else {
        work.push_back(parse_dims(rc.dims));
    }

    MemoryModel mem = parse_mem(rc.mem_spec);
    Fp8Format fmt = parse_fp8_fmt(rc.fp8_fmt);
    Distribution dist = parse_distribution(rc.dist);
    nlohmann::ordered_json out = nlohmann::ordered_json::array();

    for (const Dims& d : work) {
        MatrixBuf x = rc.load_x.empty()
                          ? gen_matrix(rc.seed, MatrixRole::X, d.m, d.n, dist, rc.cfg.io_prec, fmt)
                          : load_matrix(rc.load_x, MatrixRole::X);
        MatrixBuf w = rc.load_w.empty()
                          ? gen_matrix(rc.seed, MatrixRole::W, d.n, d.k, dist, rc.cfg.io_prec, fmt)
                          : load_matrix(rc.load_w, MatrixRole::W);
        MatrixBuf y = rc.load_y.empty()
                          ? gen_matrix(rc.seed, MatrixRole::Y, d.m, d.k, dist, rc.cfg.io_prec, fmt)
                          : load_matrix(rc.load_y, MatrixRole::Y);

        EngineOptions opt;
        opt.per_cycle_log = rc.trace;
        Engine engine(rc.cfg, *ker, x, w, y, mem, opt);
        engine.run();

        RunReport rep;
        rep.cfg = rc.cfg;
        rep.m = d.m;
        rep.n = d.n;
        rep.k = d.k;
        rep.kernel_name = rc.kernel_name;
        rep.mem_mode = rc.mem_spec;
        rep.seed = rc.seed;
        rep.stats = engine.stats();
        rep.beats = TraceSummary::from(engine.trace());
        out.push_back(report_json(rep));

        if (rc.trace) {
            std::string base = rc.out_path.empty() || rc.out_path == "-" ? "redmule" : rc.out_path;
            if (auto dot = base.rfind('.'); dot != std::string::npos && dot > base.rfind('/') + 1)
                base.resize(dot);
            std::ofstream tl(base + ".trace.txt");
            for (const auto& lineout : engine.cycle_log()) tl << lineout << "\n";
            std::ofstream ac(base + ".accesses.csv");
            ac << "cycle,kind,elems,addr\n";
            for (const auto& r : engine.trace())
                ac << r.cycle << "," << access_kind_name(r.kind) << "," << r.elems << ","
                   << r.addr << "\n";
        }
        if (!rc.save_z.empty()) write_binary_file(rc.save_z, engine.z());
        if (rc.check) {
            MatrixBuf want = gemm_op_reference(*ker, x, w, y);
            MatrixBuf wantio = want;
            if (rc.cfg.io_prec == IoPrecision::Fp8Compressed || y.prec == IoPrecision::Fp8Compressed) {
                wantio = MatrixBuf::make8(MatrixRole::Z, want.rows, want.cols, y.fp8_fmt);
                for (uint32_t r = 0; r < want.rows; ++r)
                    for (uint32_t c = 0; c < want.cols; ++c)
                        wantio.set16(r, c, want.at16(r, c));
            }
            if (!engine.z().same_codes(wantio)) {
                std::cerr << "check FAILED: engine output differs from the reference model\n";
                return kExitMismatch;
            }
        }
    }

    write_output(rc.out_path, (out.size() == 1 ? out[0] : out).dump(2) + "\n");
    return 0;
}

int do_sweep(const std::string& spec_path, const std::string& out_path) {
    using namespace redmule;
    std::ifstream is(spec_path);
    if (!is) {
        std::cerr << "error: cannot open sweep spec\n";
        return kExitIo;
    }
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(is);
    } catch (const std::exception& e) {
        std::cerr << "error: bad sweep spec: " << e.what() << "\n";
        return 2;
    }
    try {
        std::vector<uint32_t> ls = j.value("L", std::vector<uint32_t>{12});
        std::vector<uint32_t> hs = j.value("H", std::vector<uint32_t>{4});
        std::vector<uint32_t> ps = j.value("P", std::vector<uint32_t>{3});
        ArrayConfig base;
        base.port_bits = j.value("port_bits", 288u);
        base.io_prec = j.value("io", std::string("fp16")) == "fp8" ? IoPrecision::Fp8Compressed
                                                                   : IoPrecision::Fp16;
        SweepWorkload wl;
        Dims d = parse_dims(j.value("dims", std::string("96x96x96")));
        wl.m = d.m;
        wl.n = d.n;
        wl.k = d.k;
        const SemiringKernel* ker = find_kernel(j.value("kernel", std::string("matmul")));
        if (!ker) {
            std::cerr << "error: unknown kernel in sweep spec\n";
            return 2;
        }
        wl.kernel = ker->id;
        wl.mem = parse_mem(j.value("mem", std::string("ideal")));
        wl.seed = j.value("seed", 1ull);

        std::vector<ArrayConfig> cfgs;
        for (uint32_t l : ls)
            for (uint32_t h : hs)
                for (uint32_t p : ps) {
                    ArrayConfig c = base;
                    c.ce_height = l;
                    c.ce_width = h;
                    c.ce_pipe = p;
                    cfgs.push_back(c);
                }
        auto entries = sweep(cfgs, wl);
        write_output(out_path, sweep_csv(entries, wl));
        return 0;
    } catch (const CLI::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}

int do_verify(uint64_t seed, bool quick) {
    auto results = redmule::run_verification(seed, quick);
    bool all = true;
    for (const auto& r : results) {
        std::printf("[%s] %-20s %s\n", r.pass ? "PASS" : "FAIL", r.name.c_str(),
                    r.detail.c_str());
        all = all && r.pass;
    }
    if (!all) {
        std::printf("verification FAILED\n");
        return kExitMismatch;
    }
    std::printf("all properties hold\n");
    return 0;
}

int do_graph(const std::string& problem, const std::string& input, uint32_t nodes, uint64_t seed,
             RunConfig& rc, const std::string& out_path) {
    using namespace redmule;
    GraphProblem prob;
    if (problem == "apsp")
        prob = GraphProblem::Apsp;
    else if (problem == "maxcap")
        prob = GraphProblem::MaxCapacity;
    else {
        std::cerr << "error: --problem must be apsp or maxcap\n";
        return 2;
    }
    GraphInstance g;
    if (!input.empty()) {
        std::ifstream is(input);
        if (!is) {
            std::cerr << "error: cannot open graph file\n";
            return kExitIo;
        }
        g = load_graph_edge_list(is, prob);
    } else {
        g = gen_graph(seed, nodes, prob, prob == GraphProblem::Apsp ? 1.0 : 0.6);
    }
    ArrayConfig cfg = rc.cfg;
    GemmOpEvaluator eval = [&cfg](const SemiringKernel& k, const MatrixBuf& x, const MatrixBuf& w,
                                  const MatrixBuf& y) {
        return run_gemm_op(cfg, k, x, w, y).z;
    };
    MatrixBuf sol = prob == GraphProblem::Apsp ? apsp_solve(g, eval) : max_capacity_solve(g, eval);
    std::vector<double> want =
        prob == GraphProblem::Apsp ? floyd_warshall(g) : widest_path(g);
    for (uint32_t u = 0; u < g.n; ++u)
        for (uint32_t v = 0; v < g.n; ++v)
            if (to_double(sol.at16(u, v)) != want[size_t(u) * g.n + v]) {
                std::cerr << "graph solution DIVERGES from the oracle at (" << u << "," << v
                          << ")\n";
                return kExitMismatch;
            }
    std::ostringstream os;
    write_text(os, sol);
    write_output(out_path, os.str());
    std::cerr << "solution matches the independent oracle (" << g.n << " nodes)\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"cycle-level functional simulator of a reduced-precision GEMM-Op accelerator"};
    app.require_subcommand(1);

    RunConfig rc;
    std::string config_file;

    auto* run = app.add_subcommand("run", "simulate one GEMM-Op and emit a report");
    add_array_options(run, rc);
    run->add_option("--kernel", rc.kernel_name,
                    "matmul | max-critical-path | apsp | max-reliability-path | "
                    "min-reliability-path | min-spanning-tree | max-capacity-path");
    run->add_option("--dims", rc.dims, "problem size MxNxK");
    run->add_option("--shapes", rc.shapes_file, "file with one M,N,K triple per line");
    run->add_option("--dist", rc.dist, "input distribution: unit | unit-pos | int8");
    run->add_option("--config", config_file, "JSON config file (flags take precedence)");
    run->add_flag("--check", rc.check, "compare against the golden reference model");
    run->add_flag("--trace", rc.trace, "dump per-cycle trace and access CSV");
    run->add_option("--out", rc.out_path, "report path (default stdout)");
    run->add_option("--load-x", rc.load_x, "load X from file instead of generating");
    run->add_option("--load-w", rc.load_w, "load W from file");
    run->add_option("--load-y", rc.load_y, "load Y from file");
    run->add_option("--save-z", rc.save_z, "write Z in the binary matrix format");

    std::string sweep_spec, sweep_out;
    auto* sw = app.add_subcommand("sweep", "evaluate a cross-product of configurations");
    sw->add_option("--spec", sweep_spec, "JSON sweep specification")->required();
    sw->add_option("--out", sweep_out, "CSV output path (default stdout)");

    uint64_t verify_seed = 1;
    bool verify_quick = false;
    auto* vf = app.add_subcommand("verify", "run the built-in self-check battery");
    vf->add_option("--seed", verify_seed, "PRNG seed");
    vf->add_flag("--quick", verify_quick, "subset that finishes in well under a minute");

    std::string graph_problem = "apsp", graph_input, graph_out;
    uint32_t graph_nodes = 16;
    RunConfig grc;
    auto* gr = app.add_subcommand("graph", "solve a graph problem on the engine");
    gr->add_option("--problem", graph_problem, "apsp | maxcap");
    gr->add_option("--input", graph_input, "edge-list file: 'u v w' per line");
    gr->add_option("--nodes", graph_nodes, "node count for a generated instance");
    gr->add_option("--out", graph_out, "solution matrix path (default stdout)");
    add_array_options(gr, grc);  // includes --seed for generated instances

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            if (!config_file.empty()) apply_config_file(config_file, rc, run);
            if (rc.dims.empty() && rc.shapes_file.empty()) {
                std::cerr << "error: run needs --dims or --shapes\n";
                return 2;
            }
            return do_run(rc);
        }
        if (sw->parsed()) return do_sweep(sweep_spec, sweep_out);
        if (vf->parsed()) return do_verify(verify_seed, verify_quick);
        if (gr->parsed())
            return do_graph(graph_problem, graph_input, graph_nodes, grc.seed, grc, graph_out);
    } catch (const redmule::bandwidth_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInfeasible;
    } catch (const CLI::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    }
    return 0;
}
