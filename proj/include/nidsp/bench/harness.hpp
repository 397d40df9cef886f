#ifndef NIDSP_BENCH_HARNESS_HPP
#define NIDSP_BENCH_HARNESS_HPP

#include <atomic>
#include <cstdlib>
#include <iostream>
#include <mutex>
#include <thread>

#include "nidsp/bench/config.hpp"
#include "nidsp/bench/metrics.hpp"
#include "nidsp/costmodel/complexity.hpp"

namespace nidsp {

inline constexpr const char* kSchemaLine = "# schema=1";
inline constexpr const char* kWorkersEnv = "NIDSP_WORKERS";

/// Outcome of one grid point (aggregated over its frames).
struct PointResult {
    std::string profile;
    double snr_db{0.0};
    double cfo_hz{0.0};
    std::uint64_t seed{0};
    double ber{std::numeric_limits<double>::quiet_NaN()};
    std::size_t bit_errors{0};
    std::size_t n_bits{0};
    double mse_final{std::numeric_limits<double>::quiet_NaN()};
    double foe_residual_hz{std::numeric_limits<double>::quiet_NaN()};
    std::string status{"ok"}; ///< "ok" or "failed:<stage>"
    rvec mse_trace;           ///< frame-averaged, first mse_trace_len entries
    std::optional<ComplexityReport> measured;
};

/// Worker count from the environment, else the hardware concurrency.
inline unsigned worker_count() {
    if (const char* s = std::getenv(kWorkersEnv)) {
        char* end = nullptr;
        const long v = std::strtol(s, &end, 10);
        if (end != s && *end == '\0' && v > 0) return static_cast<unsigned>(std::min<long>(v, 256));
    }
    return std::max(1U, std::thread::hardware_concurrency());
}

/// Frame seed for frame f of a grid seed; profiles and SNRs share data and
/// noise realizations, so profile comparisons are paired.
inline std::uint64_t frame_seed(std::uint64_t seed, int f) { return seed * 1000003ULL + static_cast<std::uint64_t>(f); }

inline PointResult run_point(const ExperimentConfig& cfg, const DspProfile& prof, double snr, double cfo, std::uint64_t seed) {
    PointResult r;
    r.profile = prof.name;
    r.snr_db = snr;
    r.cfo_hz = cfo;
    r.seed = seed;
    double mse_acc = 0.0, foe_acc = 0.0;
    r.mse_trace.assign(static_cast<std::size_t>(cfg.mse_trace_len), 0.0);
    std::size_t trace_frames = 0;
    for (int f = 0; f < cfg.n_frames; ++f) {
        Scenario sc;
        sc.prof = prof;
        sc.layout = cfg.layout;
        sc.channel = cfg.channel;
        sc.channel.snr_db = snr;
        sc.channel.cfo_hz = cfo;
        sc.channel_on = cfg.channel_on;
        sc.rs = cfg.symbol_rate;
        sc.seed = frame_seed(seed, f);
        sc.guard_symbols = cfg.guard_symbols;
        sc.tr_init = cfg.tr_init;
        sc.train_symbols = cfg.train_symbols;
        sc.count_ops = cfg.count_ops && f == 0;
        try {
            const auto s = run_scenario(sc);
            r.bit_errors += s.rx.bit_errors;
            r.n_bits += s.rx.n_bits;
            const auto& m = s.rx.mse_trace;
            mse_acc += range_mean(m, m.size() - std::min<std::size_t>(m.size(), 256), m.size());
            foe_acc += std::abs(s.rx.foe_total_hz() - (cfg.channel_on ? cfo : 0.0));
            if (m.size() >= r.mse_trace.size()) {
                for (std::size_t i = 0; i < r.mse_trace.size(); ++i) r.mse_trace[i] += m[i];
                ++trace_frames;
            }
            if (sc.count_ops) r.measured = runtime_counters(s.rx);
        } catch (const StageError& e) {
            r.status = std::string("failed:") + stage_name(e.stage());
            break;
        }
    }
    if (r.status == "ok") {
        r.ber = r.n_bits ? static_cast<double>(r.bit_errors) / static_cast<double>(r.n_bits) : 0.0;
        r.mse_final = mse_acc / cfg.n_frames;
        r.foe_residual_hz = foe_acc / cfg.n_frames;
    }
    if (trace_frames > 0) {
        for (auto& v : r.mse_trace) v /= static_cast<double>(trace_frames);
    } else {
        r.mse_trace.clear();
    }
    return r;
}

/// Runs the full grid on `workers` threads; results come back in grid order
/// (profile, snr, cfo, seed), independent of scheduling.
inline std::vector<PointResult> run_grid(const ExperimentConfig& cfg, unsigned workers) {
    struct Job {
        const DspProfile* prof;
        double snr, cfo;
        std::uint64_t seed;
    };
    std::vector<Job> jobs;
    for (const auto& p : cfg.profiles) {
        for (double s : cfg.snr_db) {
            for (double f : cfg.cfo_hz) {
                for (auto seed : cfg.seeds) jobs.push_back({&p, s, f, seed});
            }
        }
    }
    std::vector<PointResult> out(jobs.size());
    std::atomic<std::size_t> next{0};
    std::exception_ptr err;
    std::mutex err_mu;
    auto work = [&] {
        for (;;) {
            const auto i = next.fetch_add(1);
            if (i >= jobs.size()) return;
            try {
                out[i] = run_point(cfg, *jobs[i].prof, jobs[i].snr, jobs[i].cfo, jobs[i].seed);
            } catch (...) {
                const std::lock_guard lk(err_mu);
                if (!err) err = std::current_exception();
            }
        }
    };
    workers = std::max(1U, std::min<unsigned>(workers, static_cast<unsigned>(jobs.size())));
    std::vector<std::jthread> pool;
    for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
    pool.clear();
    if (err) std::rethrow_exception(err);
    return out;
}

namespace detail {

inline std::string csv_num(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return fmt_num(v);
}

inline void write_text(const std::filesystem::path& p, const std::string& s) {
    std::ofstream os(p, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + p.string());
    os << s;
}

} // namespace detail

inline std::string ber_sweep_csv(const std::vector<PointResult>& rs) {
    using detail::csv_num;
    std::ostringstream os;
    os << kSchemaLine << "\nprofile,snr_db,cfo_hz,seed,ber,mse_final,foe_residual_hz,status,bit_errors,n_bits\n";
    for (const auto& r : rs) {
        os << r.profile << ',' << csv_num(r.snr_db) << ',' << csv_num(r.cfo_hz) << ',' << r.seed << ',' << csv_num(r.ber) << ','
           << csv_num(r.mse_final) << ',' << csv_num(r.foe_residual_hz) << ',' << r.status << ',' << r.bit_errors << ','
           << r.n_bits << '\n';
    }
    return os.str();
}

inline std::string mse_trace_csv(const std::vector<PointResult>& rs) {
    using detail::csv_num;
    std::ostringstream os;
    os << kSchemaLine << "\nprofile,snr_db,cfo_hz,seed,index,mse\n";
    for (const auto& r : rs) {
        for (std::size_t i = 0; i < r.mse_trace.size(); ++i) {
            os << r.profile << ',' << csv_num(r.snr_db) << ',' << csv_num(r.cfo_hz) << ',' << r.seed << ',' << i << ','
               << csv_num(r.mse_trace[i]) << '\n';
        }
    }
    return os.str();
}

/// Model complexity for the configured profiles, reductions against 2 sps.
inline std::vector<ComplexityReport> config_complexity(const ExperimentConfig& cfg) {
    const auto base = table1_eval(profile_2(), cfg.layout);
    std::vector<ComplexityReport> reps;
    for (const auto& p : cfg.profiles) {
        reps.push_back(table1_eval(p, cfg.layout));
        compare_to_baseline(reps.back(), base);
    }
    return reps;
}

/// Exit codes of the command-line harness.
enum ExitCode : int { kExitOk = 0, kExitInvalid = 1, kExitStageFailure = 2 };

/// TX → channel → RX over the grid, then writes ber_sweep.csv,
/// mse_trace.csv, complexity.csv and run.ini into the output directory.
inline int cmd_run(const std::filesystem::path& config, std::ostream& log, std::ostream& err,
                   const std::optional<std::filesystem::path>& out_override = std::nullopt) {
    ExperimentConfig cfg;
    try {
        cfg = load_experiment(config);
    } catch (const ConfigError& e) {
        err << "invalid config: " << e.what() << '\n';
        return kExitInvalid;
    }
    if (out_override) cfg.output_dir = *out_override;
    const auto workers = worker_count();
    log << "running " << cfg.point_count() << " grid points x " << cfg.n_frames << " frames on " << workers
        << " workers\n";
    const auto rs = run_grid(cfg, workers);
    std::filesystem::create_directories(cfg.output_dir);
    detail::write_text(cfg.output_dir / "ber_sweep.csv", ber_sweep_csv(rs));
    detail::write_text(cfg.output_dir / "mse_trace.csv", mse_trace_csv(rs));
    detail::write_text(cfg.output_dir / "complexity.csv", complexity_csv(config_complexity(cfg)));
    detail::write_text(cfg.output_dir / "run.ini", cfg.to_ini());
    if (cfg.count_ops) {
        std::vector<ComplexityReport> measured;
        std::set<std::string> seen;
        for (const auto& r : rs) {
            if (r.measured && seen.insert(r.profile).second) measured.push_back(*r.measured);
        }
        detail::write_text(cfg.output_dir / "complexity_measured.csv", complexity_csv(measured));
    }
    int failed = 0;
    for (const auto& r : rs) failed += r.status != "ok";
    log << "wrote " << cfg.output_dir.generic_string() << " (" << rs.size() << " rows, " << failed << " failed)\n";
    if (failed > 0) {
        err << failed << " grid point(s) hit a stage failure; see the status column of ber_sweep.csv\n";
        return kExitStageFailure;
    }
    return kExitOk;
}

namespace detail {

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    [[nodiscard]] std::size_t col(const std::string& name) const {
        const auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) throw std::runtime_error("missing column '" + name + "'");
        return static_cast<std::size_t>(it - header.begin());
    }
};

inline CsvTable read_csv(const std::filesystem::path& p, const std::vector<std::string>& required) {
    std::ifstream is(p);
    if (!is) throw std::runtime_error("missing");
    std::string line;
    if (!std::getline(is, line) || line != kSchemaLine) throw std::runtime_error("first line is not '# schema=1'");
    if (!std::getline(is, line)) throw std::runtime_error("no header row");
    CsvTable t;
    t.header = IniDocument::split_list(line);
    for (const auto& c : required) (void)t.col(c);
    int n = 2;
    while (std::getline(is, line)) {
        ++n;
        if (line.empty()) continue;
        auto row = IniDocument::split_list(line);
        if (row.size() != t.header.size()) throw std::runtime_error("line " + std::to_string(n) + ": wrong field count");
        t.rows.push_back(std::move(row));
    }
    return t;
}

inline double parse_num(const std::string& s, const std::string& what) {
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    double v = 0.0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc{} || r.ptr != s.data() + s.size()) throw std::runtime_error("bad number '" + s + "' in " + what);
    return v;
}

} // namespace detail

/// Summary of a cmd_run results directory: BER tables, sensitivity at the FEC
/// threshold, MSE convergence counts and the complexity table. Writes
/// report.txt, ber_table.csv, sensitivity.csv and mse_convergence.csv, and
/// nothing at all if any input is missing or corrupt.
inline int cmd_report(const std::filesystem::path& dir, std::ostream& out, std::ostream& err) {
    using detail::csv_num;
    using detail::parse_num;
    std::vector<std::string> bad;
    detail::CsvTable ber, mse, cx;
    auto load = [&](const char* name, detail::CsvTable& t, const std::vector<std::string>& cols) {
        try {
            t = detail::read_csv(dir / name, cols);
        } catch (const std::exception& e) {
            bad.push_back((dir / name).generic_string() + ": " + e.what());
        }
    };
    load("ber_sweep.csv", ber, {"profile", "snr_db", "cfo_hz", "seed", "ber", "status", "bit_errors", "n_bits"});
    load("mse_trace.csv", mse, {"profile", "snr_db", "index", "mse"});
    load("complexity.csv", cx, {"profile", "stage", "mul_per_symbol", "add_per_symbol", "mul_reduction_pct", "add_reduction_pct"});
    double fec = 2.0e-2;
    try {
        fec = experiment_from_ini(IniDocument::load(dir / "run.ini")).fec_threshold_ber;
    } catch (const std::exception& e) {
        bad.push_back(e.what());
    }
    if (bad.empty() && ber.rows.empty()) bad.push_back((dir / "ber_sweep.csv").generic_string() + ": no rows");
    if (!bad.empty()) {
        err << "cannot build a report from " << dir.generic_string() << ":\n";
        for (const auto& b : bad) err << "  " << b << '\n';
        return kExitInvalid;
    }

    // BER per (profile, snr), pooled over cfo and seeds
    struct Agg {
        std::size_t errors{0}, bits{0};
        int failed{0};
    };
    std::vector<std::string> order;
    std::map<std::string, std::map<double, Agg>> tab;
    std::ostringstream txt;
    try {
        const auto cp = ber.col("profile"), cs = ber.col("snr_db"), cst = ber.col("status"), ce = ber.col("bit_errors"),
                   cn = ber.col("n_bits");
        for (const auto& row : ber.rows) {
            if (!tab.contains(row[cp])) order.push_back(row[cp]);
            auto& a = tab[row[cp]][parse_num(row[cs], "ber_sweep.csv")];
            if (row[cst] != "ok") {
                ++a.failed;
                continue;
            }
            a.errors += static_cast<std::size_t>(parse_num(row[ce], "ber_sweep.csv"));
            a.bits += static_cast<std::size_t>(parse_num(row[cn], "ber_sweep.csv"));
        }
    } catch (const std::exception& e) {
        err << "cannot build a report from " << dir.generic_string() << ":\n  " << (dir / "ber_sweep.csv").generic_string()
            << ": " << e.what() << '\n';
        return kExitInvalid;
    }

    std::ostringstream ber_csv, sens_csv, mse_csv;
    ber_csv << kSchemaLine << "\nprofile,snr_db,ber,bit_errors,n_bits,failed_points\n";
    sens_csv << kSchemaLine << "\nprofile,fec_threshold_ber,sensitivity_snr_db,gap_vs_2sps_db\n";
    mse_csv << kSchemaLine << "\nprofile,snr_db,convergence_symbols,floor_db\n";

    txt << "BER vs SNR (dB), ROP analogue; the SNR axis stands in for received optical power and is not a physical mapping\n";
    std::map<std::string, double> sens;
    for (const auto& p : order) {
        txt << "\nprofile " << p << "\n  snr_db        ber   bit_errors       n_bits  failed\n";
        rvec snr, bers;
        for (const auto& [s, a] : tab[p]) {
            const double b = a.bits ? static_cast<double>(a.errors) / static_cast<double>(a.bits)
                                    : std::numeric_limits<double>::quiet_NaN();
            char line[160];
            std::snprintf(line, sizeof line, "  %6.2f  %9.3e  %11zu  %11zu  %6d\n", s, b, a.errors, a.bits, a.failed);
            txt << line;
            ber_csv << p << ',' << csv_num(s) << ',' << csv_num(b) << ',' << a.errors << ',' << a.bits << ',' << a.failed << '\n';
            if (a.bits) {
                snr.push_back(s);
                bers.push_back(b);
            }
        }
        sens[p] = ber_crossing(snr, bers, fec);
    }
    txt << "\nsensitivity at BER = " << csv_num(fec) << " (log-linear interpolation), SNR (dB), ROP analogue\n";
    const bool has_base = sens.contains("2");
    for (const auto& p : order) {
        const double gap = has_base ? sens[p] - sens["2"] : std::numeric_limits<double>::quiet_NaN();
        auto show = [](double v, bool sign) {
            if (std::isnan(v)) return std::string(sign ? "n/a" : "not reached");
            if (std::isinf(v)) return std::string("below grid");
            char b[32];
            std::snprintf(b, sizeof b, sign ? "%+.3f dB" : "%.3f dB", v);
            return std::string(b);
        };
        txt << "  " << std::left << std::setw(8) << p << std::right << std::setw(12) << show(sens[p], false)
            << "   gap vs 2 sps " << show(gap, true) << '\n';
        sens_csv << p << ',' << csv_num(fec) << ',' << csv_num(sens[p]) << ',' << csv_num(gap) << '\n';
    }

    // MSE convergence from the frame- and seed-averaged traces
    std::map<std::pair<std::string, double>, std::pair<rvec, int>> traces;
    std::map<std::pair<std::string, double>, std::set<std::string>> trace_ids;
    try {
        const auto cp = mse.col("profile"), cs = mse.col("snr_db"), ci = mse.col("index"), cm = mse.col("mse");
        const auto cf = mse.col("cfo_hz"), cd = mse.col("seed");
        for (const auto& row : mse.rows) {
            const auto key = std::pair{row[cp], parse_num(row[cs], "mse_trace.csv")};
            auto& [tr, n] = traces[key];
            const auto i = static_cast<std::size_t>(parse_num(row[ci], "mse_trace.csv"));
            if (tr.size() <= i) tr.resize(i + 1, 0.0);
            tr[i] += parse_num(row[cm], "mse_trace.csv");
            if (trace_ids[key].insert(row[cf] + "/" + row[cd]).second) ++n;
        }
    } catch (const std::exception& e) {
        err << "cannot build a report from " << dir.generic_string() << ":\n  " << (dir / "mse_trace.csv").generic_string()
            << ": " << e.what() << '\n';
        return kExitInvalid;
    }
    txt << "\nMSE convergence (first symbol within 1 dB of the floor; floor = mean of the last quarter of the trace)\n";
    std::vector<std::pair<std::string, double>> keys;
    for (const auto& p : order) {
        for (const auto& [k, v] : traces) {
            if (k.first == p) keys.push_back(k);
        }
    }
    for (const auto& key : keys) {
        auto& [tr, n] = traces[key];
        for (auto& x : tr) x /= n;
        const double floor = range_mean(tr, tr.size() - tr.size() / 4, tr.size());
        const auto idx = mse_convergence_index(tr, floor);
        char line[160];
        std::snprintf(line, sizeof line, "  %-8s snr %6.2f dB  converged at %5lld symbols  floor %7.2f dB\n",
                      key.first.c_str(), key.second, static_cast<long long>(idx), 10 * std::log10(floor));
        txt << line;
        mse_csv << key.first << ',' << csv_num(key.second) << ',' << idx << ',' << csv_num(10 * std::log10(floor)) << '\n';
    }

    txt << "\ncomplexity per symbol (complex mul / add)\n";
    try {
        const auto cp = cx.col("profile"), cs = cx.col("stage"), cm = cx.col("mul_per_symbol"), ca = cx.col("add_per_symbol");
        const auto rm = cx.col("mul_reduction_pct"), ra = cx.col("add_reduction_pct");
        for (const auto& row : cx.rows) {
            if (row[cs] != "total") continue;
            const double mul = parse_num(row[cm], "complexity.csv");
            char line[200];
            std::snprintf(line, sizeof line, "  %-8s %9.2f mul %9.2f add   reduction %6.2f%% mul %6.2f%% add  |%s\n",
                          row[cp].c_str(), mul, parse_num(row[ca], "complexity.csv"),
                          row[rm].empty() ? 0.0 : parse_num(row[rm], "complexity.csv"),
                          row[ra].empty() ? 0.0 : parse_num(row[ra], "complexity.csv"),
                          std::string(static_cast<std::size_t>(std::clamp(mul / 25.0, 0.0, 80.0)), '#').c_str());
            txt << line;
        }
    } catch (const std::exception& e) {
        err << "cannot build a report from " << dir.generic_string() << ":\n  " << (dir / "complexity.csv").generic_string()
            << ": " << e.what() << '\n';
        return kExitInvalid;
    }

    detail::write_text(dir / "report.txt", txt.str());
    detail::write_text(dir / "ber_table.csv", ber_csv.str());
    detail::write_text(dir / "sensitivity.csv", sens_csv.str());
    detail::write_text(dir / "mse_convergence.csv", mse_csv.str());
    out << txt.str();
    return kExitOk;
}

/// Complexity-model evaluation for one profile (plus the 2-sps baseline comparison).
inline int cmd_complexity(const std::string& profile, std::ostream& out, std::ostream& err) {
    DspProfile p;
    try {
        p = profile_by_name(profile);
    } catch (const std::invalid_argument& e) {
        err << e.what() << '\n';
        return kExitInvalid;
    }
    auto rep = table1_eval(p, FrameLayout{});
    compare_to_baseline(rep, table1_eval(profile_2(), FrameLayout{}));
    out << comparison_table({rep}) << '\n' << complexity_csv({rep});
    return kExitOk;
}

} // namespace nidsp

#endif // NIDSP_BENCH_HARNESS_HPP
