/**
 * Copyright 2026 The DualChain Simulator Authors
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

#include "cli.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "dualchain/scenario.hpp"
#include "dualchain/secparams.hpp"

namespace dualchain::cli {

namespace fs = std::filesystem;
namespace sp = secparams;
using nlohmann::json;

namespace {

constexpr const char* kOutputDirEnv = "DUALCHAIN_OUTPUT_DIR";

std::string fmt(const char* f, auto... args) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

/// Relative paths land in --output-dir, else $DUALCHAIN_OUTPUT_DIR, else the cwd.
fs::path resolve_output(const std::string& path, const std::string& output_dir) {
    fs::path p(path);
    if (p.is_absolute()) return p;
    std::string dir = output_dir;
    if (dir.empty())
        if (const char* env = std::getenv(kOutputDirEnv)) dir = env;
    return dir.empty() ? p : fs::path(dir) / p;
}

void write_file(const fs::path& path, const std::string& content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot write " + path.string());
    f << content;
}

// --- params -----------------------------------------------------------------------

struct SizingRow {
    sp::EpochParams p;
    double bound = 0.0;
};

SizingRow sizing_row(std::uint32_t N, double f, std::uint32_t n, std::uint32_t m, double eps) {
    SizingRow r{sp::EpochParams::make(N, f, n, m, eps), 0.0};
    r.bound = sp::system_failure_upper(r.p);
    return r;
}

void print_rows(const std::vector<SizingRow>& rows, const std::string& format, std::ostream& out) {
    if (format == "json") {
        json a = json::array();
        for (const auto& r : rows)
            a.push_back({{"N", r.p.network_size},
                         {"f", r.p.malicious_fraction},
                         {"C", r.p.fc_count()},
                         {"n", r.p.fc_size},
                         {"K", r.p.ps_per_fc()},
                         {"m", r.p.ps_size},
                         {"quorum_ps", sp::quorum_ps(r.p.ps_size)},
                         {"quorum_fc", sp::quorum_fc(r.p.fc_size)},
                         {"p_system_upper", r.bound}});
        out << a.dump(2) << '\n';
        return;
    }
    const bool csv = format == "csv";
    out << (csv ? "N,f,C,n,K,m,quorum_ps,quorum_fc,p_system_upper\n"
                : fmt("%-6s %-5s %-3s %-5s %-3s %-5s %-9s %-9s %s\n", "N", "f", "C", "n", "K", "m", "quorum_ps",
                      "quorum_fc", "p_system_upper"));
    for (const auto& r : rows) {
        const auto& p = r.p;
        if (csv)
            out << fmt("%u,%g,%u,%u,%u,%u,%u,%u,%.6e\n", p.network_size, p.malicious_fraction, p.fc_count(), p.fc_size,
                       p.ps_per_fc(), p.ps_size, sp::quorum_ps(p.ps_size), sp::quorum_fc(p.fc_size), r.bound);
        else
            out << fmt("%-6u %-5g %-3u %-5u %-3u %-5u %-9u %-9u %.3e\n", p.network_size, p.malicious_fraction,
                       p.fc_count(), p.fc_size, p.ps_per_fc(), p.ps_size, sp::quorum_ps(p.ps_size),
                       sp::quorum_fc(p.fc_size), r.bound);
    }
}

struct ParamsArgs {
    bool table = false;
    std::optional<std::uint32_t> N, n, m;
    double f = 0.25;
    double epsilon = sp::kDefaultEpsilon;
    std::string format = "table";
};

int cmd_params(const ParamsArgs& a, std::ostream& out, std::ostream& err) {
    std::vector<SizingRow> rows;
    try {
        if (a.table) {
            // FC sizes of the four evaluated network sizes; PS sizes are solved.
            const std::pair<std::uint32_t, std::uint32_t> table[] = {{640, 320}, {1290, 430}, {1920, 480}, {2550, 510}};
            for (auto [N, n] : table)
                rows.push_back(sizing_row(N, a.f, n, sp::solve_min_ps_size(N, a.f, n, a.epsilon), a.epsilon));
        } else {
            if (!a.N) {
                err << "params: give --table or --N\n";
                return kValidationError;
            }
            if (a.m && !a.n) {
                err << "params: --m needs --n\n";
                return kValidationError;
            }
            if (a.n && a.m) {
                rows.push_back(sizing_row(*a.N, a.f, *a.n, *a.m, a.epsilon));
            } else if (a.n) {
                rows.push_back(sizing_row(*a.N, a.f, *a.n, sp::solve_min_ps_size(*a.N, a.f, *a.n, a.epsilon), a.epsilon));
            } else {
                // Every FC size dividing N, each with its smallest feasible PS size.
                std::optional<sp::NoFeasibleSize> best;
                std::uint32_t best_n = 0;
                for (std::uint32_t n : sp::divisors(*a.N)) {
                    try {
                        rows.push_back(sizing_row(*a.N, a.f, n, sp::solve_min_ps_size(*a.N, a.f, n, a.epsilon), a.epsilon));
                    } catch (const sp::NoFeasibleSize& e) {
                        if (!best || e.best_bound <= best->best_bound) {
                            best = e;
                            best_n = n;
                        }
                    }
                }
                if (rows.empty() && best) {
                    err << fmt("params: no sizing meets epsilon %.3g; best is n=%u m=%u with bound %.3e\n", a.epsilon,
                               best_n, best->best_ps_size, best->best_bound);
                    return kInfeasible;
                }
            }
        }
    } catch (const sp::NoFeasibleSize& e) {
        err << fmt("params: no PS size meets epsilon %.3g; best is m=%u with bound %.3e\n", a.epsilon, e.best_ps_size,
                   e.best_bound);
        return kInfeasible;
    } catch (const Error& e) {
        err << "params: " << e.what() << '\n';
        return kValidationError;
    }
    print_rows(rows, a.format, out);
    return kOk;
}

// --- run ----------------------------------------------------------------------------

struct RunArgs {
    std::string config;
    std::optional<std::uint64_t> seed;
    bool unsafe = false;
    std::string report, trace, output_dir;
    std::string format = "table";
};

int cmd_run(const RunArgs& a, std::ostream& out, std::ostream& err) {
    ScenarioConfig cfg;
    SafetyVerdict verdict;
    try {
        cfg = load_scenario(a.config);
        if (a.seed) cfg.sim.seed = *a.seed;
        if (!a.report.empty()) cfg.report_path = a.report;
        if (!a.trace.empty()) cfg.trace_path = a.trace;
        if (cfg.trace_path) cfg.sim.keep_trace = true;
        verdict = validate_scenario(cfg, a.unsafe);
    } catch (const sp::NoFeasibleSize& e) {
        err << "run: " << e.what() << '\n';
        return kInfeasible;
    } catch (const Error& e) {
        err << "run: " << e.what() << '\n';
        return kValidationError;
    }
    SimResult result;
    try {
        result = simulate(cfg.sim);
    } catch (const LivelockGuard& e) {
        err << "run: " << e.what() << '\n';
        return kCheckFailure;
    }
    std::vector<std::string> trace = std::move(result.trace);
    result.trace.clear();
    const Report report = make_report(cfg, a.unsafe, verdict, std::move(result));
    const std::string doc = report_json(report).dump(2) + "\n";
    out << (a.format == "json" ? doc : report_table(report));
    try {
        if (cfg.report_path) write_file(resolve_output(*cfg.report_path, a.output_dir), doc);
        if (cfg.trace_path) {
            std::string text;
            for (const auto& l : trace) text += l + "\n";
            write_file(resolve_output(*cfg.trace_path, a.output_dir), text);
        }
    } catch (const std::exception& e) {
        err << "run: " << e.what() << '\n';
        return kValidationError;
    }
    return report.result.all_pass() ? kOk : kCheckFailure;
}

// --- sweep --------------------------------------------------------------------------

struct SweepArgs {
    std::string config, grid, out_csv, output_dir;
    bool unsafe = false;
};

struct Axis {
    std::string key;  // dotted path into the config document
    std::vector<json> values;
};

std::vector<Axis> load_grid(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read " + path);
    json g;
    try {
        g = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(path + ": " + e.what());
    }
    if (!g.is_object()) throw ConfigError("grid: expected an object");
    for (auto it = g.begin(); it != g.end(); ++it)
        if (it.key() != "schema_version" && it.key() != "axes") throw ConfigError("grid." + it.key() + ": unknown key");
    if (!g.contains("schema_version") || g["schema_version"] != kScenarioSchemaVersion)
        throw ConfigError("grid: unsupported or missing schema_version");
    std::vector<Axis> axes;
    if (!g.contains("axes")) return axes;
    if (!g["axes"].is_array()) throw ConfigError("grid.axes: expected a list");
    for (const auto& a : g["axes"]) {
        if (!a.is_object() || !a.contains("key") || !a["key"].is_string() || !a.contains("values") ||
            !a["values"].is_array() || a.size() != 2)
            throw ConfigError("grid.axes: each axis needs exactly \"key\" and \"values\"");
        axes.push_back({a["key"].get<std::string>(), a["values"].get<std::vector<json>>()});
    }
    return axes;
}

json::json_pointer pointer_for(const std::string& dotted) {
    std::string p;
    std::stringstream ss(dotted);
    std::string part;
    while (std::getline(ss, part, '.')) p += "/" + part;
    return json::json_pointer(p);
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
    return q + "\"";
}

int cmd_sweep(const SweepArgs& a, std::ostream& out, std::ostream& err) {
    json base;
    std::vector<Axis> axes;
    try {
        base = scenario_to_json(load_scenario(a.config));
        axes = load_grid(a.grid);
    } catch (const sp::NoFeasibleSize& e) {
        err << "sweep: " << e.what() << '\n';
        return kInfeasible;
    } catch (const Error& e) {
        err << "sweep: " << e.what() << '\n';
        return kValidationError;
    }
    // An empty grid (no axes, or an axis without values) has no rows.
    std::size_t rows = axes.empty() ? 0 : 1;
    for (const auto& ax : axes) rows *= ax.values.size();

    struct Row {
        std::vector<json> values;
        std::string status, error;
        Metrics metrics;
        bool pass = false;
        std::string trace_hash;
    };
    std::vector<Row> result(rows);
    for (std::size_t i = 0; i < rows; ++i) {
        std::size_t rest = i;
        result[i].values.resize(axes.size());
        for (std::size_t k = axes.size(); k-- > 0;) {
            result[i].values[k] = axes[k].values[rest % axes[k].values.size()];
            rest /= axes[k].values.size();
        }
    }
#pragma omp parallel for schedule(dynamic)
    for (std::size_t i = 0; i < rows; ++i) {
        auto& row = result[i];
        try {
            json doc = base;
            for (std::size_t k = 0; k < axes.size(); ++k) {
                const auto ptr = pointer_for(axes[k].key);
                if (!doc.contains(ptr)) throw ConfigError(axes[k].key + ": unknown key");
                doc[ptr] = row.values[k];
            }
            ScenarioConfig cfg = parse_scenario(doc);
            cfg.sim.keep_trace = false;
            validate_scenario(cfg, a.unsafe);
            const SimResult r = simulate(cfg.sim);
            row.metrics = r.metrics;
            row.pass = r.all_pass();
            row.trace_hash = r.trace_hash.hex();
            row.status = row.pass ? "ok" : "check_failed";
        } catch (const std::exception& e) {
            row.status = "error";
            row.error = e.what();
        }
    }

    std::ostringstream csv;
    csv << "index";
    for (const auto& ax : axes) csv << ',' << csv_field(ax.key);
    csv << ",status,error,issued_txs,confirmed_txs,tps,latency_mean,latency_p95,ps_view_changes,fc_view_changes,"
           "longest_gap,all_checks_pass,trace_hash\n";
    bool any_error = false, any_failed = false;
    for (std::size_t i = 0; i < rows; ++i) {
        const auto& r = result[i];
        any_error = any_error || r.status == "error";
        any_failed = any_failed || r.status == "check_failed";
        csv << i;
        for (const auto& v : r.values) csv << ',' << csv_field(v.is_string() ? v.get<std::string>() : v.dump());
        csv << ',' << r.status << ',' << csv_field(r.error);
        if (r.status == "error") {
            csv << ",,,,,,,,,,\n";
            continue;
        }
        const auto& m = r.metrics;
        csv << ',' << m.issued_txs << ',' << m.confirmed_txs << ',' << fmt("%.4f", m.tps) << ','
            << fmt("%.4f", m.latency_mean) << ',' << fmt("%.4f", m.latency_p95) << ',' << m.ps_view_changes << ','
            << m.fc_view_changes << ',' << fmt("%.4f", to_ticks(m.longest_gap)) << ',' << (r.pass ? "true" : "false")
            << ',' << r.trace_hash << '\n';
    }
    if (a.out_csv.empty()) {
        out << csv.str();
    } else {
        try {
            write_file(resolve_output(a.out_csv, a.output_dir), csv.str());
        } catch (const std::exception& e) {
            err << "sweep: " << e.what() << '\n';
            return kValidationError;
        }
        out << rows << " rows\n";
    }
    return any_error ? kValidationError : any_failed ? kCheckFailure : kOk;
}

// --- trace --------------------------------------------------------------------------

struct TraceArgs {
    std::string file;
    bool hash_only = false;
};

int cmd_trace(const TraceArgs& a, std::ostream& out, std::ostream& err) {
    std::ifstream in(a.file);
    if (!in) {
        err << "trace: cannot read " << a.file << '\n';
        return kValidationError;
    }
    std::vector<std::string> lines;
    for (std::string l; std::getline(in, l);) lines.push_back(l);
    if (!a.hash_only) {
        for (std::size_t i = 0; i < lines.size(); ++i) {
            std::istringstream ls(lines[i]);
            long long t = 0;
            std::string kind, node, digest;
            if (!(ls >> t >> kind >> node >> digest)) {
                err << "trace: malformed record on line " << i + 1 << '\n';
                return kValidationError;
            }
            out << fmt("%12.6f  %-16s node %-5s %s\n", to_ticks(t), kind.c_str(), node.c_str(), digest.substr(0, 16).c_str());
        }
        out << lines.size() << " records\n";
    }
    out << trace_hash_of(lines).hex() << '\n';
    return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"DualChain consensus simulator and epoch sizing tool", "dualchain"};
    app.require_subcommand(1);

    ParamsArgs pa;
    auto* params = app.add_subcommand("params", "Epoch sizing table");
    params->add_flag("--table", pa.table, "Rows for the four evaluated network sizes");
    params->add_option("--N", pa.N, "Network size");
    params->add_option("--f", pa.f, "Malicious fraction")->capture_default_str();
    params->add_option("--n", pa.n, "FC size (all divisors of N when omitted)");
    params->add_option("--m", pa.m, "PS size (solved when omitted)");
    params->add_option("--epsilon", pa.epsilon, "Target failure probability")->capture_default_str();
    params->add_option("--format", pa.format, "table, csv or json")->check(CLI::IsMember({"table", "csv", "json"}));

    RunArgs ra;
    auto* runc = app.add_subcommand("run", "Run one scenario and report");
    runc->add_option("config", ra.config, "Scenario config (JSON)")->required();
    runc->add_option("--seed", ra.seed, "Override the config seed");
    runc->add_flag("--unsafe", ra.unsafe, "Allow configs whose failure bound exceeds epsilon");
    runc->add_option("--report", ra.report, "Write the JSON report here");
    runc->add_option("--trace", ra.trace, "Write the event trace here");
    runc->add_option("--output-dir", ra.output_dir, std::string("Base for relative output paths (default $") + kOutputDirEnv + ")");
    runc->add_option("--format", ra.format, "table or json on stdout")->check(CLI::IsMember({"table", "json"}));

    SweepArgs sa;
    auto* sweep = app.add_subcommand("sweep", "Run a grid of configs into CSV");
    sweep->add_option("config", sa.config, "Base scenario config (JSON)")->required();
    sweep->add_option("grid", sa.grid, "Grid document (JSON)")->required();
    sweep->add_option("--out", sa.out_csv, "CSV path (stdout when omitted)");
    sweep->add_option("--output-dir", sa.output_dir, "Base for a relative --out");
    sweep->add_flag("--unsafe", sa.unsafe, "Allow configs whose failure bound exceeds epsilon");

    TraceArgs ta;
    auto* trace = app.add_subcommand("trace", "Pretty-print and hash a trace file");
    trace->add_option("file", ta.file, "Trace file")->required();
    trace->add_flag("--hash", ta.hash_only, "Print only the trace hash");

    std::vector<std::string> argv_store{"dualchain"};
    argv_store.insert(argv_store.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (auto& s : argv_store) argv.push_back(s.data());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kValidationError;
    }
    if (params->parsed()) return cmd_params(pa, out, err);
    if (runc->parsed()) return cmd_run(ra, out, err);
    if (sweep->parsed()) return cmd_sweep(sa, out, err);
    return cmd_trace(ta, out, err);
}

}  // namespace dualchain::cli
