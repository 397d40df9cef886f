#ifndef NIDSP_BENCH_CONFIG_HPP
#define NIDSP_BENCH_CONFIG_HPP

#include <charconv>
#include <set>

#include "nidsp/bench/ini.hpp"
#include "nidsp/bench/scenario.hpp"

namespace nidsp {

/// One experiment: profiles × SNR × CFO × seeds, n_frames per grid point.
struct ExperimentConfig {
    std::vector<DspProfile> profiles{profile_9_8()};
    FrameLayout layout{};
    ChannelParams channel{default_channel()}; ///< snr, cfo and seed are set per point
    bool channel_on{true};
    std::vector<double> snr_db{15.0};
    std::vector<double> cfo_hz{0.0};
    std::vector<std::uint64_t> seeds{1};
    int n_frames{1};
    std::filesystem::path output_dir{"results"};
    double fec_threshold_ber{2.0e-2};
    double symbol_rate{8e9};
    int train_symbols{256};
    int mse_trace_len{1024};
    bool tr_init{true};
    bool count_ops{false};
    int guard_symbols{300};

    [[nodiscard]] std::size_t point_count() const {
        return profiles.size() * snr_db.size() * cfo_hz.size() * seeds.size();
    }

    /// Canonical text form; parses back to the same configuration.
    [[nodiscard]] std::string to_ini() const;
};

namespace detail {

inline std::string fmt_num(double v) {
    std::ostringstream os;
    os.imbue(std::locale::classic());
    os.precision(12);
    os << v;
    return os.str();
}

template <class T>
std::string join(const std::vector<T>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ", ";
        if constexpr (std::is_floating_point_v<T>) {
            s += fmt_num(v[i]);
        } else {
            s += std::to_string(v[i]);
        }
    }
    return s;
}

} // namespace detail

inline std::string ExperimentConfig::to_ini() const {
    using detail::fmt_num;
    std::ostringstream os;
    os << "[experiment]\nprofiles = ";
    for (std::size_t i = 0; i < profiles.size(); ++i) os << (i ? ", " : "") << profiles[i].name;
    os << "\nn_frames = " << n_frames << "\noutput_dir = " << output_dir.generic_string()
       << "\nfec_threshold_ber = " << fmt_num(fec_threshold_ber) << "\nsymbol_rate = " << fmt_num(symbol_rate)
       << "\ntrain_symbols = " << train_symbols << "\nmse_trace_len = " << mse_trace_len
       << "\ntr_init = " << (tr_init ? "true" : "false") << "\ncount_ops = " << (count_ops ? "true" : "false")
       << "\nguard_symbols = " << guard_symbols << "\n\n[grid]\nsnr_db = " << detail::join(snr_db)
       << "\ncfo_hz = " << detail::join(cfo_hz) << "\nseeds = " << detail::join(seeds) << "\n\n[channel]\nenabled = "
       << (channel_on ? "true" : "false") << "\ncd_ps_per_nm = " << fmt_num(channel.cd_ps_per_nm)
       << "\nwavelength_nm = " << fmt_num(channel.wavelength_nm) << "\nlinewidth_hz = " << fmt_num(channel.linewidth_hz)
       << "\nclock_ppm = " << fmt_num(channel.clock_ppm) << "\nclock_phase = " << fmt_num(channel.clock_phase)
       << "\njones = " << fmt_num(channel.jones[0][0].real()) << ' ' << fmt_num(channel.jones[0][0].imag()) << ' '
       << fmt_num(channel.jones[0][1].real()) << ' ' << fmt_num(channel.jones[0][1].imag()) << ' '
       << fmt_num(channel.jones[1][0].real()) << ' ' << fmt_num(channel.jones[1][0].imag()) << ' '
       << fmt_num(channel.jones[1][1].real()) << ' ' << fmt_num(channel.jones[1][1].imag()) << "\n\n[layout]\ntotal_symbols = "
       << layout.total_symbols << "\nts_tone_len = " << layout.ts_tone_len << "\nts_sync_period = " << layout.ts_sync_period
       << "\nts_sync_repeats = " << layout.ts_sync_repeats << "\nts_total = " << layout.ts_total
       << "\npilot_count = " << layout.pilot_count << '\n';
    for (const auto& p : profiles) {
        if (p.name == "9/8" || p.name == "5/4" || p.name == "2") continue;
        os << "\n[profile." << p.name << "]\nK = " << p.K << "\nM = " << p.M << "\nN = " << p.N << "\noverlap = " << p.overlap
           << "\nL = " << p.L << "\nL1 = " << p.L1 << "\nbeta = " << fmt_num(p.beta) << "\nQ = " << p.Q << "\nLf = " << p.Lf
           << "\nmu_train = " << fmt_num(p.mu_train) << "\nmu_dd = " << fmt_num(p.mu_dd) << "\ntr_kp = " << fmt_num(p.tr_kp)
           << "\ntr_ki = " << fmt_num(p.tr_ki) << '\n';
    }
    return os.str();
}

namespace detail {

class ConfigReader {
public:
    explicit ConfigReader(const IniDocument& doc) : doc_(doc) {}

    void allow(const std::string& section, std::initializer_list<const char*> keys) {
        for (const char* k : keys) allowed_[section].insert(k);
    }

    /// Unknown sections and keys are errors.
    void check_known() const {
        for (const auto& [name, sec] : doc_.sections()) {
            const bool custom = name.rfind("profile.", 0) == 0;
            const auto it = allowed_.find(custom ? "profile.*" : name);
            if (it == allowed_.end()) {
                if (sec.empty() && name.empty()) continue;
                throw ConfigError(doc_.name(), doc_.section_line(name), "unknown section [" + name + "]");
            }
            for (const auto& [k, v] : sec) {
                if (!it->second.contains(k)) throw doc_.error(v, "unknown key '" + k + "' in [" + name + "]");
            }
        }
    }

    double real(const IniValue& v) const {
        double out = 0.0;
        const auto* b = v.text.data();
        const auto* e = b + v.text.size();
        if (!v.text.empty() && v.text[0] == '+') ++b;
        const auto r = std::from_chars(b, e, out);
        if (r.ec != std::errc{} || r.ptr != e) throw doc_.error(v, "expected a number, got '" + v.text + "'");
        return out;
    }

    long long integer(const IniValue& v) const {
        long long out = 0;
        const auto* b = v.text.data();
        const auto* e = b + v.text.size();
        const auto r = std::from_chars(b, e, out);
        if (r.ec != std::errc{} || r.ptr != e) throw doc_.error(v, "expected an integer, got '" + v.text + "'");
        return out;
    }

    bool boolean(const IniValue& v) const {
        if (v.text == "true" || v.text == "1" || v.text == "yes" || v.text == "on") return true;
        if (v.text == "false" || v.text == "0" || v.text == "no" || v.text == "off") return false;
        throw doc_.error(v, "expected true/false, got '" + v.text + "'");
    }

    /// Comma list; an item "a:b:s" expands to a, a+s, … ≤ b.
    std::vector<double> real_list(const IniValue& v) const {
        std::vector<double> out;
        for (const auto& item : IniDocument::split_list(v.text)) {
            if (item.empty()) throw doc_.error(v, "empty list item");
            const auto c1 = item.find(':');
            if (c1 == std::string::npos) {
                out.push_back(real({item, v.line}));
                continue;
            }
            const auto c2 = item.find(':', c1 + 1);
            if (c2 == std::string::npos) throw doc_.error(v, "range must be start:stop:step, got '" + item + "'");
            const double a = real({IniDocument::trim(item.substr(0, c1)), v.line});
            const double b = real({IniDocument::trim(item.substr(c1 + 1, c2 - c1 - 1)), v.line});
            const double s = real({IniDocument::trim(item.substr(c2 + 1)), v.line});
            if (!(s > 0) || b < a) throw doc_.error(v, "range needs step > 0 and stop >= start");
            const auto n = static_cast<long long>(std::floor((b - a) / s + 1e-9));
            if (n > 100000) throw doc_.error(v, "range has too many points");
            for (long long i = 0; i <= n; ++i) out.push_back(a + static_cast<double>(i) * s);
        }
        return out;
    }

    template <class F>
    void with(const std::string& section, const std::string& key, F&& f) const {
        if (const auto* v = doc_.find(section, key)) f(*v);
    }

    [[nodiscard]] const IniDocument& doc() const noexcept { return doc_; }

private:
    const IniDocument& doc_;
    std::map<std::string, std::set<std::string>> allowed_;
};

} // namespace detail

/// Builds and validates an ExperimentConfig. Every error names the offending line.
inline ExperimentConfig experiment_from_ini(const IniDocument& doc) {
    detail::ConfigReader rd(doc);
    rd.allow("experiment", {"profiles", "n_frames", "output_dir", "fec_threshold_ber", "symbol_rate", "train_symbols",
                            "mse_trace_len", "tr_init", "count_ops", "guard_symbols"});
    rd.allow("grid", {"snr_db", "cfo_hz", "seeds"});
    rd.allow("channel", {"enabled", "cd_ps_per_nm", "wavelength_nm", "linewidth_hz", "clock_ppm", "clock_phase", "jones",
                         "jones_theta", "jones_phi"});
    rd.allow("layout", {"total_symbols", "ts_tone_len", "ts_sync_period", "ts_sync_repeats", "ts_total", "pilot_count"});
    rd.allow("profile.*", {"base", "K", "M", "N", "overlap", "L", "L1", "beta", "Q", "Lf", "mu_train", "mu_dd", "tr_kp",
                           "tr_ki"});
    rd.check_known();

    ExperimentConfig c;
    auto as_int = [&](const IniValue& v, long long lo, long long hi) {
        const auto x = rd.integer(v);
        if (x < lo || x > hi) {
            throw doc.error(v, "value " + v.text + " outside [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
        }
        return static_cast<int>(x);
    };

    rd.with("experiment", "n_frames", [&](const IniValue& v) { c.n_frames = as_int(v, 1, 1000000); });
    rd.with("experiment", "output_dir", [&](const IniValue& v) {
        if (v.text.empty()) throw doc.error(v, "output_dir is empty");
        c.output_dir = v.text;
    });
    rd.with("experiment", "fec_threshold_ber", [&](const IniValue& v) {
        c.fec_threshold_ber = rd.real(v);
        if (!(c.fec_threshold_ber > 0 && c.fec_threshold_ber < 0.5)) throw doc.error(v, "fec_threshold_ber must lie in (0, 0.5)");
    });
    rd.with("experiment", "symbol_rate", [&](const IniValue& v) {
        c.symbol_rate = rd.real(v);
        if (!(c.symbol_rate > 0) || !std::isfinite(c.symbol_rate)) throw doc.error(v, "symbol_rate must be positive");
    });
    rd.with("experiment", "train_symbols", [&](const IniValue& v) { c.train_symbols = as_int(v, 1, 1 << 20); });
    rd.with("experiment", "mse_trace_len", [&](const IniValue& v) { c.mse_trace_len = as_int(v, 0, 1 << 20); });
    rd.with("experiment", "tr_init", [&](const IniValue& v) { c.tr_init = rd.boolean(v); });
    rd.with("experiment", "count_ops", [&](const IniValue& v) { c.count_ops = rd.boolean(v); });
    rd.with("experiment", "guard_symbols", [&](const IniValue& v) { c.guard_symbols = as_int(v, 0, 1 << 20); });

    auto axis = [&](const char* key, auto& dst, auto conv) {
        rd.with("grid", key, [&](const IniValue& v) {
            dst = conv(v);
            if (dst.empty()) throw doc.error(v, std::string("grid axis '") + key + "' is empty");
        });
    };
    axis("snr_db", c.snr_db, [&](const IniValue& v) {
        auto out = rd.real_list(v);
        for (double s : out) {
            if (std::isnan(s) || s == -std::numeric_limits<double>::infinity()) throw doc.error(v, "snr_db must be finite or inf");
        }
        return out;
    });
    axis("cfo_hz", c.cfo_hz, [&](const IniValue& v) {
        auto out = rd.real_list(v);
        for (double f : out) {
            if (!std::isfinite(f)) throw doc.error(v, "cfo_hz must be finite");
        }
        return out;
    });
    axis("seeds", c.seeds, [&](const IniValue& v) {
        std::vector<std::uint64_t> out;
        std::set<std::uint64_t> seen;
        for (double s : rd.real_list(v)) {
            if (s < 0 || s != std::floor(s) || s > 9e15) throw doc.error(v, "seeds must be non-negative integers");
            const auto u = static_cast<std::uint64_t>(s);
            if (!seen.insert(u).second) throw doc.error(v, "duplicate seed " + std::to_string(u));
            out.push_back(u);
        }
        return out;
    });

    rd.with("channel", "enabled", [&](const IniValue& v) { c.channel_on = rd.boolean(v); });
    rd.with("channel", "cd_ps_per_nm", [&](const IniValue& v) { c.channel.cd_ps_per_nm = rd.real(v); });
    rd.with("channel", "wavelength_nm", [&](const IniValue& v) { c.channel.wavelength_nm = rd.real(v); });
    rd.with("channel", "linewidth_hz", [&](const IniValue& v) { c.channel.linewidth_hz = rd.real(v); });
    rd.with("channel", "clock_ppm", [&](const IniValue& v) { c.channel.clock_ppm = rd.real(v); });
    rd.with("channel", "clock_phase", [&](const IniValue& v) { c.channel.clock_phase = rd.real(v); });
    const auto* theta = doc.find("channel", "jones_theta");
    const auto* phi = doc.find("channel", "jones_phi");
    const auto* jones = doc.find("channel", "jones");
    if (jones != nullptr && (theta != nullptr || phi != nullptr)) {
        throw doc.error(*jones, "give either 'jones' or 'jones_theta'/'jones_phi', not both");
    }
    if (theta != nullptr || phi != nullptr) {
        c.channel.jones = jones_rotation(theta ? rd.real(*theta) : 0.0, phi ? rd.real(*phi) : 0.0);
    }
    if (jones != nullptr) {
        if (jones->text == "identity") {
            c.channel.jones = jones_identity();
        } else if (jones->text == "swap") {
            c.channel.jones = jones_swap();
        } else {
            std::istringstream is(jones->text);
            is.imbue(std::locale::classic());
            std::array<double, 8> e{};
            for (auto& x : e) {
                if (!(is >> x)) throw doc.error(*jones, "jones must be identity, swap, or 8 numbers (re im of xx xy yx yy)");
            }
            c.channel.jones = {{{cplx{e[0], e[1]}, cplx{e[2], e[3]}}, {cplx{e[4], e[5]}, cplx{e[6], e[7]}}}};
        }
    }
    try {
        auto probe = c.channel;
        probe.snr_db = 0.0;
        probe.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(doc.name(), doc.section_line("channel"), e.what());
    }

    rd.with("layout", "total_symbols", [&](const IniValue& v) { c.layout.total_symbols = as_int(v, 1, 1 << 24); });
    rd.with("layout", "ts_tone_len", [&](const IniValue& v) { c.layout.ts_tone_len = as_int(v, 0, 1 << 20); });
    rd.with("layout", "ts_sync_period", [&](const IniValue& v) { c.layout.ts_sync_period = as_int(v, 0, 1 << 20); });
    rd.with("layout", "ts_sync_repeats", [&](const IniValue& v) { c.layout.ts_sync_repeats = as_int(v, 0, 1 << 10); });
    rd.with("layout", "ts_total", [&](const IniValue& v) { c.layout.ts_total = as_int(v, 0, 1 << 20); });
    rd.with("layout", "pilot_count", [&](const IniValue& v) { c.layout.pilot_count = as_int(v, 0, 1 << 20); });
    try {
        c.layout.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(doc.name(), doc.section_line("layout"), e.what());
    }

    if (const auto* pv = doc.find("experiment", "profiles")) {
        c.profiles.clear();
        std::set<std::string> seen;
        for (const auto& name : IniDocument::split_list(pv->text)) {
            if (name.empty()) throw doc.error(*pv, "empty profile name");
            if (!seen.insert(name).second) throw doc.error(*pv, "profile '" + name + "' listed twice");
            const std::string sec = "profile." + name;
            if (!doc.has(sec)) {
                try {
                    c.profiles.push_back(profile_by_name(name));
                } catch (const std::invalid_argument&) {
                    throw doc.error(*pv, "unknown profile '" + name + "' (use 9/8, 5/4, 2 or define [" + sec + "])");
                }
                continue;
            }
            DspProfile p = profile_9_8();
            rd.with(sec, "base", [&](const IniValue& v) {
                try {
                    p = profile_by_name(v.text);
                } catch (const std::invalid_argument&) {
                    throw doc.error(v, "unknown base profile '" + v.text + "'");
                }
            });
            p.name = name;
            auto set_int = [&](const char* k, int& dst) { rd.with(sec, k, [&](const IniValue& v) { dst = as_int(v, 0, 1 << 20); }); };
            auto set_real = [&](const char* k, double& dst) { rd.with(sec, k, [&](const IniValue& v) { dst = rd.real(v); }); };
            set_int("K", p.K);
            set_int("M", p.M);
            set_int("N", p.N);
            set_int("overlap", p.overlap);
            set_int("L", p.L);
            set_int("L1", p.L1);
            set_int("Q", p.Q);
            set_int("Lf", p.Lf);
            set_real("beta", p.beta);
            set_real("mu_train", p.mu_train);
            set_real("mu_dd", p.mu_dd);
            set_real("tr_kp", p.tr_kp);
            set_real("tr_ki", p.tr_ki);
            try {
                p.validate();
            } catch (const std::invalid_argument& e) {
                throw ConfigError(doc.name(), doc.section_line(sec), e.what());
            }
            c.profiles.push_back(p);
        }
        if (c.profiles.empty()) throw doc.error(*pv, "profile list is empty");
    }
    for (const auto& [name, sec] : doc.sections()) {
        if (name.rfind("profile.", 0) == 0 && std::none_of(c.profiles.begin(), c.profiles.end(),
                                                           [&](const DspProfile& p) { return "profile." + p.name == name; })) {
            throw ConfigError(doc.name(), doc.section_line(name), "[" + name + "] is not listed in experiment.profiles");
        }
    }
    return c;
}

inline ExperimentConfig load_experiment(const std::filesystem::path& p) { return experiment_from_ini(IniDocument::load(p)); }

} // namespace nidsp

#endif // NIDSP_BENCH_CONFIG_HPP
