#ifndef NIDSP_COSTMODEL_COMPLEXITY_HPP
#define NIDSP_COSTMODEL_COMPLEXITY_HPP

#include <iomanip>
#include <optional>
#include <sstream>
#include <vector>

#include "nidsp/rxchain/receiver.hpp"

namespace nidsp {

struct StageCost {
    std::string stage;
    double mul{0.0};
    double add{0.0};
};

/// Complex multiplications and additions per symbol, per stage.
struct ComplexityReport {
    std::string profile;
    std::vector<StageCost> stages; ///< in stage_keys() order
    double total_mul{0.0};
    double total_add{0.0};
    std::optional<std::pair<double, double>> reduction_vs_baseline; ///< percent (mul, add)

    [[nodiscard]] const StageCost& stage(const std::string& key) const {
        for (const auto& s : stages) {
            if (s.stage == key) return s;
        }
        throw std::out_of_range("ComplexityReport: no stage '" + key + "'");
    }

    void finalize() {
        total_mul = 0.0;
        total_add = 0.0;
        for (const auto& s : stages) {
            total_mul += s.mul;
            total_add += s.add;
        }
    }
};

/// Per-symbol cost model. The DFT row is charged twice (forward and inverse).
inline ComplexityReport table1_eval(const DspProfile& prof, const FrameLayout& layout) {
    if (prof.N <= prof.overlap) throw std::invalid_argument("table1_eval: overlap rate must exceed 1");
    if (prof.overlap <= 0) throw std::invalid_argument("table1_eval: overlap rate must exceed 1");
    const double eta = prof.eta().value();
    const double n = prof.N;
    const double r = prof.sps().value();
    const double b = prof.beta;
    const double ls = layout.ts_sync_period;
    const double lf = prof.Lf;
    const double f = layout.total_symbols;
    const double l = prof.L;
    const double l1 = prof.L1;
    const double q = prof.Q;
    const double p = layout.pilot_count;

    ComplexityReport rep;
    rep.profile = prof.name;
    rep.stages = {
        {"dft_idft", 2 * eta * n * r, 2 * eta * (n - 1) * r},
        {"match_filter", eta * r, 0.0},
        {"timing_recovery", eta * (b + r), eta * (b - r / n)},
        {"frame_sync", (4 * ls + 4) * lf / f, (3 * ls + 2) * lf / f},
        {"fine_foe", (4 * ls + 1) / f + r, (4 * ls - 1) / f},
        {"mimo_eq", (2 * l + 1) + 2 * l1, 2 * l + 2 * (l1 - 1)},
        {"cpr", p / f + 2 * q + 1, 2 * q},
    };
    rep.finalize();
    return rep;
}

/// Percentage reduction of `r` relative to `baseline`, stored in r.
inline void compare_to_baseline(ComplexityReport& r, const ComplexityReport& baseline) {
    r.reduction_vs_baseline = std::pair{100.0 * (1.0 - r.total_mul / baseline.total_mul),
                                        100.0 * (1.0 - r.total_add / baseline.total_add)};
}

/// Operation counts collected by an instrumented receiver run, per
/// polarization symbol. The frequency-domain stages are normalized by the
/// samples streamed through them, the per-frame stages by the frame length,
/// the equalizer and carrier recovery by the symbols they produced. Counted
/// operations are the filtering work only: LMS tap updates, decisions and
/// derotations are not included, matching the model's scope. The DFT row
/// counts the FFT actually executed, so it sits far below the model's N²
/// charge.
inline ComplexityReport runtime_counters(const RxReport& rx) {
    if (!rx.counters_enabled) {
        throw UnsupportedOperation("runtime_counters: receiver ran without operation counting");
    }
    ComplexityReport rep;
    rep.profile = rx.profile;
    for (const auto& key : stage_keys()) {
        double denom = 2.0 * rx.eq_symbols;
        if (key == "dft_idft" || key == "match_filter" || key == "timing_recovery") denom = 2.0 * rx.fd_symbols;
        if (key == "frame_sync" || key == "fine_foe") denom = 2.0 * rx.frame_symbols;
        const auto& c = rx.ops.at(key);
        rep.stages.push_back({key, c.mul / denom, c.add / denom});
    }
    rep.finalize();
    return rep;
}

/// CSV with one row per stage and a total row.
inline std::string complexity_csv(const std::vector<ComplexityReport>& reps, bool header = true) {
    std::ostringstream os;
    os << std::setprecision(10);
    if (header) os << "# schema=1\nprofile,stage,mul_per_symbol,add_per_symbol,mul_reduction_pct,add_reduction_pct\n";
    for (const auto& r : reps) {
        for (const auto& s : r.stages) os << r.profile << ',' << s.stage << ',' << s.mul << ',' << s.add << ",,\n";
        os << r.profile << ",total," << r.total_mul << ',' << r.total_add << ',';
        if (r.reduction_vs_baseline) {
            os << r.reduction_vs_baseline->first << ',' << r.reduction_vs_baseline->second;
        } else {
            os << ',';
        }
        os << '\n';
    }
    return os.str();
}

/// Fixed-width stage × profile table.
inline std::string comparison_table(const std::vector<ComplexityReport>& reps) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(2);
    os << std::left << std::setw(18) << "stage";
    for (const auto& r : reps) os << std::right << std::setw(12) << (r.profile + " mul") << std::setw(12) << (r.profile + " add");
    os << '\n';
    if (reps.empty()) return os.str();
    for (std::size_t i = 0; i < reps.front().stages.size(); ++i) {
        os << std::left << std::setw(18) << reps.front().stages[i].stage;
        for (const auto& r : reps) os << std::right << std::setw(12) << r.stages[i].mul << std::setw(12) << r.stages[i].add;
        os << '\n';
    }
    os << std::left << std::setw(18) << "total";
    for (const auto& r : reps) os << std::right << std::setw(12) << r.total_mul << std::setw(12) << r.total_add;
    os << '\n' << std::left << std::setw(18) << "reduction %";
    for (const auto& r : reps) {
        if (r.reduction_vs_baseline) {
            os << std::right << std::setw(12) << r.reduction_vs_baseline->first << std::setw(12)
               << r.reduction_vs_baseline->second;
        } else {
            os << std::right << std::setw(12) << "-" << std::setw(12) << "-";
        }
    }
    os << '\n';
    return os.str();
}

/// The three reference profiles with reductions against 2 sps.
inline std::vector<ComplexityReport> reference_comparison(const FrameLayout& layout = {}) {
    auto base = table1_eval(profile_2(), layout);
    std::vector<ComplexityReport> out{table1_eval(profile_9_8(), layout), table1_eval(profile_5_4(), layout), base};
    for (auto& r : out) compare_to_baseline(r, base);
    return out;
}

} // namespace nidsp

#endif // NIDSP_COSTMODEL_COMPLEXITY_HPP
