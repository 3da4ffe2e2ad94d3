#include "demo.hpp"

#include <trace/error.hpp>

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <vector>

namespace trace::cli {

namespace fs = std::filesystem;

namespace {

// mt19937_64 is fully specified by the standard; the distributions are not,
// so uniform and normal draws are derived by hand.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double normal(double mean = 0.0, double sd = 1.0) {
        const double u1 = 1.0 - uniform();
        const double u2 = uniform();
        return mean + sd * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    std::size_t below(std::size_t n) { return static_cast<std::size_t>(uniform() * static_cast<double>(n)); }

    bool chance(double p) { return uniform() < p; }

private:
    std::mt19937_64 engine_;
};

// Eight significant digits keeps the generated files short and readable.
std::string cell(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 8);
    return std::string(buf, res.ptr);
}

std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error("cannot write " + path.string());
    }
    return out;
}

void write_text(const fs::path& path, const std::string& text) {
    auto out = open_out(path);
    out << text;
}

// ---------------------------------------------------------------------------

ScenarioFiles toy(Rng& rng, const fs::path& dir) {
    ScenarioFiles files{dir / "trajectories.csv", dir / "config.json", dir / "corpus.csv", std::nullopt};

    struct Cluster {
        const char* label;
        double cx, cy;
    };
    constexpr Cluster kClusters[] = {{"current", 1.0, 1.0}, {"desired", 4.0, 1.5}, {"undesired", 1.5, 4.0}};
    {
        auto out = open_out(*files.corpus);
        out << "x,y,label\n";
        for (const auto& c : kClusters) {
            for (int i = 0; i < 30; ++i) {
                out << cell(rng.normal(c.cx, 0.3)) << ',' << cell(rng.normal(c.cy, 0.3)) << ',' << c.label << '\n';
            }
        }
    }
    {
        // First step heads for the undesired cluster, second for the desired one.
        auto out = open_out(files.trajectories);
        out << "subject_id,t,x,y\n"
            << "toy,0,1,1\n"
            << "toy,1,1.3,2.2\n"
            << "toy,2,2.6,1.9\n";
    }
    write_text(files.config,
               R"({"lambda":0.9,"k_neighbors":1,"mode":"corpus_knn","polarity":{"desired":"desirable","undesired":"undesirable"}})"
               "\n");
    return files;
}

// ---------------------------------------------------------------------------

struct VitalSign {
    const char* name;
    double base;  // typical value for the good outcome
    double delta; // shift towards the bad outcome
    bool is_static;
};

constexpr std::array<VitalSign, 17> kVitals{{
    {"heart_rate", 85, 25, false},   {"resp_rate", 18, 8, false},   {"sbp", 120, -25, false},
    {"dbp", 70, -15, false},         {"mean_bp", 85, -18, false},   {"spo2", 97, -6, false},
    {"temperature", 37, 1.2, false}, {"gcs", 14, -6, false},        {"glucose", 120, 60, false},
    {"wbc", 9, 7, false},            {"creatinine", 1.0, 1.2, false}, {"lactate", 1.5, 3, false},
    {"ph", 7.40, -0.12, false},      {"fio2", 0.3, 0.35, false},    {"bun", 18, 25, false},
    {"age", 62, 10, true},           {"weight", 80, -5, true},
}};

std::string vital_cell(const VitalSign& v, double u) { return cell(v.base + u * v.delta); }

ScenarioFiles icu(Rng& rng, const fs::path& dir, std::size_t cohort_size) {
    ScenarioFiles files{dir / "trajectories.csv", dir / "config.json", dir / "corpus.csv", std::nullopt};

    {
        // Outcome classes sit at u = 0 (RFD) and u = 1 (mortality) along every
        // feature; NRFD sits between and is not used as a target.
        struct Group {
            const char* label;
            double centre;
            int count;
        };
        constexpr Group kGroups[] = {{"RFD", 0.0, 800}, {"mortality", 1.0, 800}, {"NRFD", 0.5, 400}};
        auto out = open_out(*files.corpus);
        for (const auto& v : kVitals) {
            out << v.name << ',';
        }
        out << "label\n";
        for (const auto& g : kGroups) {
            for (int i = 0; i < g.count; ++i) {
                for (const auto& v : kVitals) {
                    const double u = rng.normal(g.centre, 0.3);
                    out << (rng.chance(0.05) ? "" : vital_cell(v, u)) << ',';
                }
                out << g.label << '\n';
            }
        }
    }

    {
        auto out = open_out(files.trajectories);
        out << "subject_id,t";
        for (const auto& v : kVitals) {
            out << ',' << v.name;
        }
        out << ",label\n";

        for (std::size_t s = 0; s < 2 * cohort_size; ++s) {
            const bool improving = s < cohort_size;
            char id[32];
            std::snprintf(id, sizeof id, "%s-%04zu", improving ? "stay-i" : "stay-d", s % cohort_size + 1);
            const std::size_t length = 6 + rng.below(7);
            const double from = improving ? 0.75 : 0.25;
            const double to = improving ? 0.1 : 0.9;

            std::array<double, kVitals.size()> start{};
            for (auto& u : start) {
                u = rng.normal(from, 0.15);
            }
            // Occasionally a feature is never measured during the stay.
            const std::size_t never_measured = rng.chance(0.02) ? rng.below(15) : kVitals.size();
            // Occasionally a time point carries no new measurement at all.
            const std::size_t empty_row = rng.chance(0.03) ? 1 + rng.below(length - 2) : length;

            for (std::size_t j = 0; j < length; ++j) {
                out << id << ',' << j;
                const double progress = static_cast<double>(j) / static_cast<double>(length - 1);
                for (std::size_t f = 0; f < kVitals.size(); ++f) {
                    const auto& v = kVitals[f];
                    out << ',';
                    if (f == never_measured || j == empty_row) {
                        continue;
                    }
                    if (v.is_static) {
                        if (j == 0) {
                            out << vital_cell(v, start[f]);
                        }
                        continue;
                    }
                    if (j > 0 && rng.chance(0.15)) {
                        continue;
                    }
                    const double u = start[f] + (to - start[f]) * progress + rng.normal(0.0, 0.07);
                    out << vital_cell(v, u);
                }
                out << ',' << (j + 1 == length ? (improving ? "RFD" : "mortality") : "NRFD") << '\n';
            }
        }
    }
    write_text(files.config,
               R"({"lambda":0.9,"k_neighbors":3,"mode":"corpus_knn","polarity":{"RFD":"desirable","mortality":"undesirable"}})"
               "\n");
    return files;
}

// ---------------------------------------------------------------------------

struct Indicator {
    const char* name;
    double base;
    double scale;
};

constexpr std::array<Indicator, 5> kIndicators{{
    {"temperature", 6.5, 2.0},
    {"precipitation", 80, 30},
    {"methane", 1900, 50},
    {"population", 5.3e6, 2e5},
    {"gdp", 4.0e5, 5e4},
}};

using Unit5 = std::array<double, 5>;

Unit5 unit_vector(Rng& rng) {
    Unit5 v{};
    double n = 0.0;
    for (auto& x : v) {
        x = rng.normal();
        n += x * x;
    }
    for (auto& x : v) {
        x /= std::sqrt(n);
    }
    return v;
}

// Component of `v` orthogonal to unit `d`, normalised.
Unit5 orthogonal_to(Unit5 v, const Unit5& d) {
    double dot = 0.0;
    for (std::size_t i = 0; i < 5; ++i) dot += v[i] * d[i];
    double n = 0.0;
    for (std::size_t i = 0; i < 5; ++i) {
        v[i] -= dot * d[i];
        n += v[i] * v[i];
    }
    for (auto& x : v) x /= std::sqrt(n);
    return v;
}

std::string month_label(int month_index) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02d", 2015 + month_index / 12, month_index % 12 + 1);
    return buf;
}

ScenarioFiles ssp(Rng& rng, const fs::path& dir) {
    ScenarioFiles files{dir / "trajectories.csv", dir / "config.json", std::nullopt, dir / "targets"};
    fs::create_directories(*files.targets_dir);

    constexpr int kMonths = 96; // 2015-01 .. 2022-12
    constexpr double kDrift = 0.02;
    constexpr int kLookahead = 6;

    const Unit5 trend = unit_vector(rng);
    const Unit5 across = orthogonal_to(unit_vector(rng), trend);
    auto raw = [](std::size_t f, double u) { return kIndicators[f].base + kIndicators[f].scale * u; };

    // Pathways point `kLookahead` months ahead along directions at increasing
    // angles from the observed trend, so their expected ranking is known.
    struct Pathway {
        const char* name;
        double degrees;
    };
    constexpr Pathway kPathways[] = {{"SSP1", 25}, {"SSP2", 60}, {"SSP3", 75}, {"SSP4", 35}, {"SSP5", 10}};
    for (const auto& p : kPathways) {
        const double a = p.degrees * std::numbers::pi / 180.0;
        auto out = open_out(*files.targets_dir / (std::string(p.name) + ".csv"));
        out << "t";
        for (const auto& ind : kIndicators) out << ',' << ind.name;
        out << '\n';
        for (int m = 0; m < kMonths; ++m) {
            out << month_label(m);
            for (std::size_t f = 0; f < 5; ++f) {
                const double dir_f = std::cos(a) * trend[f] + std::sin(a) * across[f];
                const double u = kDrift * (m * trend[f] + kLookahead * dir_f);
                out << ',' << cell(raw(f, u));
            }
            out << '\n';
        }
    }

    {
        auto out = open_out(files.trajectories);
        out << "subject_id,t";
        for (const auto& ind : kIndicators) out << ',' << ind.name;
        out << '\n';
        for (const char* country : {"norway", "poland"}) {
            for (int m = 0; m < kMonths; ++m) {
                const double noise_level = 0.004;
                Unit5 u{};
                for (std::size_t f = 0; f < 5; ++f) {
                    u[f] = kDrift * m * trend[f] + rng.normal(0.0, noise_level);
                }
                for (const char* day : {"05", "20"}) {
                    out << country << ',' << month_label(m) << '-' << day;
                    for (std::size_t f = 0; f < 5; ++f) {
                        out << ',';
                        if (!rng.chance(0.1)) {
                            out << cell(raw(f, u[f] + rng.normal(0.0, 0.002)));
                        }
                    }
                    out << '\n';
                }
            }
        }
    }
    write_text(files.config, R"({"lambda":0.9,"mode":"fixed_series","period":"month"})"
                             "\n");
    return files;
}

} // namespace

ScenarioFiles generate_scenario(const std::string& scenario, std::uint64_t seed, const fs::path& dir,
                                std::size_t cohort_size) {
    if (scenario != "toy" && scenario != "icu" && scenario != "ssp") {
        throw ConfigError("unknown scenario '" + scenario + "' (expected toy, icu or ssp)");
    }
    if (cohort_size < 2) {
        throw ConfigError("cohort size must be at least 2");
    }
    fs::create_directories(dir);
    Rng rng(seed);
    if (scenario == "toy") {
        return toy(rng, dir);
    }
    if (scenario == "icu") {
        return icu(rng, dir, cohort_size);
    }
    return ssp(rng, dir);
}

} // namespace trace::cli
