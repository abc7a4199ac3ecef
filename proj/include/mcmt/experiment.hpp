// experiment.hpp — experiment configuration (key = value files), the figure
// and divergence runners, and CSV export. Every output is a pure function of
// the configuration and master seed.
#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "mcmt/analysis.hpp"
#include "mcmt/audits.hpp"
#include "mcmt/montecarlo.hpp"

namespace mcmt {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct PriorConfig {
    PriorKind kind = PriorKind::UniformBetaMixture;
    double pi0 = 0.8;
    double beta_a = 0.5;
    double beta_b = 25.0;
    double point = 0.5;
    double eta = 0.0;  // straddle half-width; band comes from the partition

    bool operator==(const PriorConfig&) const = default;

    PriorSpec resolve(const ThresholdPartition& partition) const {
        switch (kind) {
            case PriorKind::Uniform01: return PriorSpec::uniform();
            case PriorKind::UniformBetaMixture: return PriorSpec::mixture(pi0, beta_a, beta_b);
            case PriorKind::PointMass: return PriorSpec::point_mass(point);
            case PriorKind::StraddleTop: return PriorSpec::straddle_top(partition, eta);
        }
        throw ConfigError("config: field 'prior': unknown kind");
    }
};

struct ExperimentConfig {
    std::string kind = "fig1";  // fig1 | diverge | audit | wald
    std::vector<std::size_t> m = {10, 100};
    std::size_t reps = 1000;
    double alpha = 0.1;
    ProcedureKind procedure = ProcedureKind::BenjaminiHochberg;
    PriorConfig prior;
    EngineKind engine = EngineKind::CpSpending;
    double epsilon = 0.01;
    std::int64_t cap = 1000000;
    std::vector<std::int64_t> caps = {1000, 10000, 100000};
    std::uint64_t seed = 20260811;
    unsigned workers = 1;
    std::size_t leave_undecided = 2;
    CellBound boundary = CellBound::Interior;
    std::string out;

    bool operator==(const ExperimentConfig&) const = default;
};

namespace detail {

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        if (pos == std::string::npos) {
            out.push_back(trim(s.substr(start)));
            break;
        }
        out.push_back(trim(s.substr(start, pos - start)));
        start = pos + 1;
    }
    return out;
}

inline double parse_double(const std::string& field, const std::string& v) {
    try {
        std::size_t used = 0;
        const double x = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ConfigError("config: field '" + field + "': expected a number, got '" + v + "'");
    }
}

inline std::uint64_t parse_u64(const std::string& field, const std::string& v) {
    std::uint64_t x = 0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
    if (ec != std::errc() || p != v.data() + v.size())
        throw ConfigError("config: field '" + field + "': expected an integer, got '" + v + "'");
    return x;
}

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    // shortest representation that round-trips
    for (int prec = 1; prec < 17; ++prec) {
        char shorter[40];
        std::snprintf(shorter, sizeof(shorter), "%.*g", prec, v);
        double back = 0.0;
        std::sscanf(shorter, "%lf", &back);
        if (back == v) return shorter;
    }
    return buf;
}

inline std::string prior_to_string(const PriorConfig& p) {
    switch (p.kind) {
        case PriorKind::Uniform01: return "uniform";
        case PriorKind::UniformBetaMixture:
            return "mixture(" + format_double(p.pi0) + "," + format_double(p.beta_a) + ","
                 + format_double(p.beta_b) + ")";
        case PriorKind::PointMass: return "pointmass(" + format_double(p.point) + ")";
        case PriorKind::StraddleTop: return "straddle(" + format_double(p.eta) + ")";
    }
    return "uniform";
}

inline PriorConfig parse_prior(const std::string& v) {
    PriorConfig p;
    if (v == "uniform") {
        p.kind = PriorKind::Uniform01;
        return p;
    }
    const auto open = v.find('(');
    if (open == std::string::npos || v.back() != ')')
        throw ConfigError("config: field 'prior': expected uniform | mixture(pi0,a,b) | "
                          "pointmass(p) | straddle(eta), got '" + v + "'");
    const std::string name = v.substr(0, open);
    const auto args = split(v.substr(open + 1, v.size() - open - 2), ',');
    if (name == "mixture") {
        if (args.size() != 3)
            throw ConfigError("config: field 'prior': mixture takes (pi0,a,b)");
        p.kind = PriorKind::UniformBetaMixture;
        p.pi0 = parse_double("prior", args[0]);
        p.beta_a = parse_double("prior", args[1]);
        p.beta_b = parse_double("prior", args[2]);
    } else if (name == "pointmass") {
        if (args.size() != 1)
            throw ConfigError("config: field 'prior': pointmass takes (p)");
        p.kind = PriorKind::PointMass;
        p.point = parse_double("prior", args[0]);
    } else if (name == "straddle") {
        if (args.size() != 1)
            throw ConfigError("config: field 'prior': straddle takes (eta)");
        p.kind = PriorKind::StraddleTop;
        p.eta = parse_double("prior", args[0]);
    } else {
        throw ConfigError("config: field 'prior': unknown prior '" + name + "'");
    }
    return p;
}

} // namespace detail

inline std::string serialize_config(const ExperimentConfig& c) {
    std::ostringstream os;
    os << "kind = " << c.kind << "\n";
    os << "m = ";
    for (std::size_t i = 0; i < c.m.size(); ++i) os << (i ? "," : "") << c.m[i];
    os << "\n";
    os << "reps = " << c.reps << "\n";
    os << "alpha = " << detail::format_double(c.alpha) << "\n";
    os << "procedure = "
       << (c.procedure == ProcedureKind::BenjaminiHochberg
               ? "bh"
               : c.procedure == ProcedureKind::Holm ? "holm" : "bonferroni")
       << "\n";
    os << "prior = " << detail::prior_to_string(c.prior) << "\n";
    os << "engine = "
       << (c.engine == EngineKind::CpSpending
               ? "cp"
               : c.engine == EngineKind::Robbins ? "robbins" : "normal")
       << "\n";
    os << "epsilon = " << detail::format_double(c.epsilon) << "\n";
    os << "cap = " << c.cap << "\n";
    os << "caps = ";
    for (std::size_t i = 0; i < c.caps.size(); ++i) os << (i ? "," : "") << c.caps[i];
    os << "\n";
    os << "seed = " << c.seed << "\n";
    os << "workers = " << c.workers << "\n";
    os << "leave_undecided = " << c.leave_undecided << "\n";
    os << "boundary = " << (c.boundary == CellBound::Interior ? "interior" : "closed") << "\n";
    os << "out = " << c.out << "\n";
    return os.str();
}

inline ExperimentConfig parse_config(const std::string& text) {
    ExperimentConfig c;
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        const std::string t = detail::trim(line);
        if (t.empty()) continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config: expected 'key = value', got '" + t + "'");
        const std::string key = detail::trim(t.substr(0, eq));
        const std::string value = detail::trim(t.substr(eq + 1));

        if (key == "kind") {
            if (value != "fig1" && value != "diverge" && value != "audit" && value != "wald")
                throw ConfigError("config: field 'kind': unknown experiment '" + value + "'");
            c.kind = value;
        } else if (key == "m") {
            c.m.clear();
            for (const auto& v : detail::split(value, ','))
                c.m.push_back(std::size_t(detail::parse_u64("m", v)));
            if (c.m.empty()) throw ConfigError("config: field 'm': need at least one value");
        } else if (key == "reps") {
            c.reps = std::size_t(detail::parse_u64("reps", value));
        } else if (key == "alpha") {
            c.alpha = detail::parse_double("alpha", value);
            if (!(c.alpha > 0.0 && c.alpha < 1.0))
                throw ConfigError("config: field 'alpha': must be in (0,1)");
        } else if (key == "procedure") {
            if (value == "bh") c.procedure = ProcedureKind::BenjaminiHochberg;
            else if (value == "holm") c.procedure = ProcedureKind::Holm;
            else if (value == "bonferroni") c.procedure = ProcedureKind::Bonferroni;
            else throw ConfigError("config: field 'procedure': expected bh|holm|bonferroni");
        } else if (key == "prior") {
            c.prior = detail::parse_prior(value);
        } else if (key == "engine") {
            if (value == "cp") c.engine = EngineKind::CpSpending;
            else if (value == "robbins") c.engine = EngineKind::Robbins;
            else if (value == "normal") c.engine = EngineKind::NormalApprox;
            else throw ConfigError("config: field 'engine': expected cp|robbins|normal");
        } else if (key == "epsilon") {
            c.epsilon = detail::parse_double("epsilon", value);
            if (!(c.epsilon > 0.0 && c.epsilon < 1.0))
                throw ConfigError("config: field 'epsilon': must be in (0,1)");
        } else if (key == "cap") {
            c.cap = std::int64_t(detail::parse_u64("cap", value));
            if (c.cap < 1) throw ConfigError("config: field 'cap': must be >= 1");
        } else if (key == "caps") {
            c.caps.clear();
            for (const auto& v : detail::split(value, ','))
                c.caps.push_back(std::int64_t(detail::parse_u64("caps", v)));
            if (c.caps.empty() || !std::is_sorted(c.caps.begin(), c.caps.end()))
                throw ConfigError("config: field 'caps': need an ascending list");
        } else if (key == "seed") {
            c.seed = detail::parse_u64("seed", value);
        } else if (key == "workers") {
            c.workers = unsigned(detail::parse_u64("workers", value));
            if (c.workers < 1) throw ConfigError("config: field 'workers': must be >= 1");
        } else if (key == "leave_undecided") {
            c.leave_undecided = std::size_t(detail::parse_u64("leave_undecided", value));
        } else if (key == "boundary") {
            if (value == "interior") c.boundary = CellBound::Interior;
            else if (value == "closed") c.boundary = CellBound::Closed;
            else throw ConfigError("config: field 'boundary': expected interior|closed");
        } else if (key == "out") {
            c.out = value;
        } else {
            throw ConfigError("config: unknown field '" + key + "'");
        }
    }
    return c;
}

inline std::uint64_t config_hash(const ExperimentConfig& c) {
    std::uint64_t h = 1469598103934665603ULL;
    for (const char ch : serialize_config(c)) {
        h ^= std::uint64_t(static_cast<unsigned char>(ch));
        h *= 1099511628211ULL;
    }
    return h;
}

namespace detail {

inline void write_csv_preamble(std::ostream& os, const ExperimentConfig& c,
                               const char* header) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(config_hash(c)));
    os << "# config=" << buf << " seed=" << c.seed << "\n" << header << "\n";
}

inline std::string fixed6(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

} // namespace detail

// Undecided-hypothesis counts: one count per repetition, from mixture-drawn
// p-values with the `leave_undecided` smallest-boundary-distance hypotheses
// masked, run through the configured procedure.
inline std::vector<std::size_t> undecided_counts(const ExperimentConfig& c, std::size_t m) {
    const ProcedureSpec spec{c.procedure, c.alpha, m};
    const auto partition = partition_for(spec);
    const auto prior = c.prior.resolve(partition);
    std::vector<std::size_t> counts(c.reps);
    mcmt::detail::parallel_for(c.reps, c.workers, [&](std::size_t rep) {
        const auto p = sample_prior(prior, m, StreamSeed{c.seed, rep, m});
        counts[rep] = undecided_count_experiment(spec, p, c.leave_undecided, c.boundary);
    });
    return counts;
}

// Survival curves of the undecided count, one block per configured m.
inline void run_fig1(const ExperimentConfig& c, std::ostream& os) {
    if (c.reps < 1) throw ConfigError("config: field 'reps': fig1 needs reps >= 1");
    detail::write_csv_preamble(os, c, "m,t,survival");
    for (const std::size_t m : c.m) {
        const auto counts = undecided_counts(c, m);
        std::vector<double> samples(counts.begin(), counts.end());
        std::vector<double> grid(m + 1);
        for (std::size_t t = 0; t <= m; ++t) grid[t] = double(t);
        const auto curve = empirical_survival(samples, grid);
        for (std::size_t t = 0; t <= m; ++t)
            os << m << "," << t << "," << detail::fixed6(curve.values[t]) << "\n";
    }
}

struct ScenarioTimes {
    // Per-repetition order statistics of the stopping times at the run cap.
    std::vector<double> decided_top;     // largest tau_decided
    std::vector<double> decided_third;   // (m-2)-th smallest, m >= 3
    std::vector<double> oracle_top;
    std::vector<double> oracle_third;
    double blocked_fraction = 0.0;  // straddle scenario only
};

// Runs `reps` repetitions of m hypotheses and collects stopping-time order
// statistics at the cap. Used by the divergence experiment and acceptance.
inline ScenarioTimes run_stopping_scenario(const PriorSpec& prior, const ProcedureSpec& spec,
                                           EngineKind engine, double epsilon,
                                           std::int64_t cap, std::size_t reps,
                                           std::uint64_t seed, unsigned workers,
                                           bool straddle_blocking = false) {
    const auto partition = partition_for(spec);
    ScenarioTimes out;
    out.decided_top.resize(reps);
    out.oracle_top.resize(reps);
    const bool want_third = spec.m >= 3;
    if (want_third) {
        out.decided_third.resize(reps);
        out.oracle_third.resize(reps);
    }
    std::vector<unsigned char> blocked(reps, 0);

    mcmt::detail::parallel_for(reps, workers, [&](std::size_t rep) {
        const auto p = sample_prior(prior, spec.m, StreamSeed{seed, rep, spec.m});
        std::vector<double> decided(spec.m), oracle(spec.m);
        for (std::size_t h = 0; h < spec.m; ++h) {
            const auto run = run_hypothesis(p[h], engine, partition, epsilon, cap,
                                            StreamSeed{seed, rep, h});
            decided[h] = double(run.stopping.tau_decided);
            oracle[h] = double(run.stopping.tau_oracle);
        }
        std::sort(decided.begin(), decided.end());
        std::sort(oracle.begin(), oracle.end());
        out.decided_top[rep] = decided.back();
        out.oracle_top[rep] = oracle.back();
        if (want_third) {
            out.decided_third[rep] = decided[spec.m - 3];
            out.oracle_third[rep] = oracle[spec.m - 3];
        }
        if (straddle_blocking) {
            // Mask only the largest p-value; every decision should hang on it.
            KnowledgeVector k(spec.m);
            for (std::size_t h = 0; h < spec.m; ++h)
                k[h] = Classification::decided(partition.cell_of(p[h]));
            const auto largest =
                std::size_t(std::max_element(p.begin(), p.end()) - p.begin());
            k[largest] = Classification::undecided();
            blocked[rep] =
                partial_decisions(spec, k, partition).undecided_count() == spec.m;
        }
    });
    if (straddle_blocking) {
        std::size_t cnt = 0;
        for (const auto b : blocked) cnt += b;
        out.blocked_fraction = double(cnt) / double(reps);
    }
    return out;
}

namespace detail {

inline void emit_truncated_rows(std::ostream& os, const std::string& scenario,
                                const std::string& statistic,
                                const std::vector<double>& taus,
                                const std::vector<std::int64_t>& caps) {
    for (const auto cap : caps) {
        const double mean = truncated_mean(taus, double(cap));
        std::size_t truncated = 0;
        for (const double t : taus)
            if (t >= double(cap)) truncated += 1;
        os << scenario << "," << cap << "," << statistic << "," << fixed6(mean) << ","
           << fixed6(double(truncated) / double(taus.size())) << "\n";
    }
}

} // namespace detail

// Truncated-mean ladders for the single-hypothesis scenario, the m-hypothesis
// uniform scenario, and the top-threshold straddle scenario.
inline void run_divergence(const ExperimentConfig& c, std::ostream& os) {
    if (c.reps < 1) throw ConfigError("config: field 'reps': diverge needs reps >= 1");
    if (c.caps.empty()) throw ConfigError("config: field 'caps': diverge needs a cap list");
    detail::write_csv_preamble(os, c, "scenario,cap,statistic,value,truncated_fraction");
    const std::int64_t capmax = c.caps.back();

    {
        const ProcedureSpec one{ProcedureKind::Bonferroni, c.alpha, 1};
        const auto times = run_stopping_scenario(PriorSpec::uniform(), one, c.engine,
                                                 c.epsilon, capmax, c.reps, c.seed,
                                                 c.workers);
        detail::emit_truncated_rows(os, "single_uniform", "tau_decided", times.decided_top,
                                    c.caps);
        detail::emit_truncated_rows(os, "single_uniform", "tau_oracle", times.oracle_top,
                                    c.caps);
    }
    {
        const std::size_t m = std::max<std::size_t>(c.m.front(), 3);
        const ProcedureSpec multi{ProcedureKind::Bonferroni, c.alpha, m};
        const auto times = run_stopping_scenario(PriorSpec::uniform(), multi, c.engine,
                                                 c.epsilon, capmax, c.reps, c.seed + 1,
                                                 c.workers);
        detail::emit_truncated_rows(os, "multi_uniform", "tau_decided_max",
                                    times.decided_top, c.caps);
        detail::emit_truncated_rows(os, "multi_uniform", "tau_decided_order_m_minus_2",
                                    times.decided_third, c.caps);
        detail::emit_truncated_rows(os, "multi_uniform", "tau_oracle_max", times.oracle_top,
                                    c.caps);
        detail::emit_truncated_rows(os, "multi_uniform", "tau_oracle_order_m_minus_2",
                                    times.oracle_third, c.caps);
    }
    {
        const std::size_t m = std::max<std::size_t>(c.m.front(), 3);
        const ProcedureSpec spec{ProcedureKind::BenjaminiHochberg, c.alpha, m};
        const auto partition = partition_for(spec);
        const auto& thr = partition.thresholds();
        const double eta = c.prior.kind == PriorKind::StraddleTop && c.prior.eta > 0.0
                               ? c.prior.eta
                               : (thr.back() - thr[thr.size() - 2]) / 8.0;
        const auto prior = PriorSpec::straddle_top(partition, eta);
        const auto times = run_stopping_scenario(prior, spec, c.engine, c.epsilon, capmax,
                                                 c.reps, c.seed + 2, c.workers, true);
        detail::emit_truncated_rows(os, "straddle", "tau_decided_max", times.decided_top,
                                    c.caps);
        for (const auto cap : c.caps)
            os << "straddle," << cap << ",blocked_fraction,"
               << detail::fixed6(times.blocked_fraction) << "," << detail::fixed6(0.0)
               << "\n";
    }
}

// Audit bundle used by the CLI; returns true when everything passed.
inline bool run_audits(const ExperimentConfig& c, std::ostream& os) {
    std::vector<AuditResult> results;
    results.push_back(audit_cp_length());
    results.push_back(audit_robbins_length(c.epsilon, c.seed));
    results.push_back(audit_coverage(c.epsilon, 10000, c.reps,
                                     {0.01, 0.05, 0.1, 0.5}, c.seed, c.workers));
    results.push_back(audit_containment(100000, c.seed));
    results.push_back(audit_partial_decisions(10000, c.seed));

    bool all_pass = true;
    for (const auto& r : results) {
        os << (r.pass ? "[PASS] " : "[FAIL] ") << r.name << "\n";
        for (const auto& n : r.notes) os << "       " << n << "\n";
        for (const auto& v : r.violations) os << "       violation: " << v << "\n";
        if (!r.pass) all_pass = false;
    }
    return all_pass;
}

} // namespace mcmt
