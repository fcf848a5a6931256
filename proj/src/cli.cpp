#include "flagmp/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace flagmp {

using nlohmann::json;

void RunConfig::validate() const {
    auto bad = [](const std::string& what) { throw std::invalid_argument(what); };
    if (level < 1 || level > 3) bad("level must be 1, 2 or 3");
    if (trials < 1) bad("trials must be positive");
    if (weight_lo > weight_hi) bad("weight range is empty");
    if (cap < 0) bad("cap must be non-negative");
    if (weight_hi > static_cast<std::size_t>(cap)) bad("weight range exceeds the cap of " + std::to_string(cap));
    if (!(pmin > 0.0) || !(pmax >= pmin) || pmax > 1.0) bad("p grid needs 0 < pmin <= pmax <= 1");
    if (points < 1) bad("points must be positive");
    if (workers < 0) bad("workers must be non-negative");
    if (max_weight < 1) bad("max weight must be at least 1");
    if (locations && *locations == 0) bad("locations must be positive");
}

std::pair<std::size_t, std::size_t> parse_weight_range(const std::string& s) {
    auto num = [&](const std::string& t) {
        if (t.empty() || t.find_first_not_of("0123456789") != std::string::npos) {
            throw std::invalid_argument("bad weight range '" + s + "'");
        }
        return static_cast<std::size_t>(std::stoull(t));
    };
    const auto dots = s.find("..");
    if (dots == std::string::npos) {
        const auto v = num(s);
        return {v, v};
    }
    return {num(s.substr(0, dots)), num(s.substr(dots + 2))};
}

DecoderMode parse_mode(const std::string& s) {
    if (s == "mp") return DecoderMode::MessagePassing;
    if (s == "uniform") return DecoderMode::Uniform;
    throw std::invalid_argument("mode must be mp or uniform, got '" + s + "'");
}

TieBreaker::Mode parse_tiebreak(const std::string& s) {
    if (s == "random") return TieBreaker::Mode::Random;
    if (s == "priority") return TieBreaker::Mode::Priority;
    throw std::invalid_argument("tiebreak must be random or priority, got '" + s + "'");
}

std::string to_string(TieBreaker::Mode m) {
    switch (m) {
        case TieBreaker::Mode::Random: return "random";
        case TieBreaker::Mode::Priority: return "priority";
        case TieBreaker::Mode::Scripted: return "scripted";
    }
    return "?";
}

Weight parse_weight_value(const std::string& s) {
    if (s == "INF" || s == "inf") return Weight::inf();
    if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos) {
        throw std::invalid_argument("bad flag weight '" + s + "'");
    }
    const auto v = std::stoul(s);
    if (v >= Weight::kInfValue) throw std::invalid_argument("flag weight too large: " + s);
    return Weight(static_cast<std::uint16_t>(v));
}

namespace {

json to_json(const RunConfig& c) {
    json j;
    j["level"] = c.level;
    j["seed"] = c.seed;
    j["trials"] = c.trials;
    j["weights"] = std::to_string(c.weight_lo) + ".." + std::to_string(c.weight_hi);
    j["pmin"] = c.pmin;
    j["pmax"] = c.pmax;
    j["points"] = c.points;
    j["mode"] = to_string(c.mode);
    j["tiebreak"] = to_string(c.tiebreak);
    j["cap"] = c.cap;
    j["locations"] = c.locations ? json(*c.locations) : json(nullptr);
    j["max_weight"] = c.max_weight;
    j["budget"] = c.budget;
    j["allow_sampling"] = c.allow_sampling;
    j["rates"] = c.rates;
    return j;
}

}  // namespace

std::string config_json(const RunConfig& c) { return to_json(c).dump(); }

void apply_config_json(RunConfig& c, const std::string& text) {
    const json j = json::parse(text);
    if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
    for (const auto& [k, v] : j.items()) {
        if (k == "level") c.level = v.get<int>();
        else if (k == "seed") c.seed = v.get<std::uint64_t>();
        else if (k == "trials") c.trials = v.get<std::uint64_t>();
        else if (k == "weights") std::tie(c.weight_lo, c.weight_hi) = parse_weight_range(v.get<std::string>());
        else if (k == "pmin") c.pmin = v.get<double>();
        else if (k == "pmax") c.pmax = v.get<double>();
        else if (k == "points") c.points = v.get<int>();
        else if (k == "mode") c.mode = parse_mode(v.get<std::string>());
        else if (k == "tiebreak") c.tiebreak = parse_tiebreak(v.get<std::string>());
        else if (k == "workers") c.workers = v.get<int>();
        else if (k == "cap") c.cap = v.get<int>();
        else if (k == "locations") c.locations = v.is_null() ? std::nullopt : std::optional(v.get<std::size_t>());
        else if (k == "max_weight") c.max_weight = v.get<std::size_t>();
        else if (k == "budget") c.budget = v.get<std::uint64_t>();
        else if (k == "allow_sampling") c.allow_sampling = v.get<bool>();
        else if (k == "rates") c.rates = v.get<std::vector<std::string>>();
        else if (k == "out") c.out = v.get<std::string>();
        else throw std::invalid_argument("unknown config key '" + k + "'");
    }
}

std::string output_header(const std::string& command, const RunConfig& c) {
    std::ostringstream os;
    os << "# flagmp " << kVersion << " " << command << "\n";
    os << "# config: " << config_json(c) << "\n";
    os << "# seed: " << c.seed << "\n";
    return os.str();
}

void write_rates_csv(std::ostream& os, std::span<const WeightEstimate> rows) {
    os << "level,weight,trials,failures,r,sigma,seed\n";
    os << std::setprecision(10);
    for (const auto& e : rows) {
        os << e.level << ',' << e.weight << ',' << e.trials << ',' << e.failures << ',' << e.r << ',' << e.sigma << ','
           << e.seed << '\n';
    }
}

std::vector<WeightEstimate> read_rates_csv(std::istream& is, const std::string& name) {
    std::vector<WeightEstimate> rows;
    std::string line;
    int lineno = 0;
    bool header = false;
    auto fail = [&](const std::string& why) {
        throw std::runtime_error(name + ":" + std::to_string(lineno) + ": " + why);
    };
    while (std::getline(is, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        if (!header) {
            if (line != "level,weight,trials,failures,r,sigma,seed") fail("expected rates header, got '" + line + "'");
            header = true;
            continue;
        }
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) f.push_back(cell);
        if (f.size() != 7) fail("expected 7 fields, got " + std::to_string(f.size()));
        try {
            std::size_t pos = 0;
            auto whole = [&](const std::string& s) {
                const auto v = std::stoull(s, &pos);
                if (pos != s.size() || s[0] == '-') throw std::invalid_argument(s);
                return v;
            };
            auto real = [&](const std::string& s) {
                const double v = std::stod(s, &pos);
                if (pos != s.size()) throw std::invalid_argument(s);
                return v;
            };
            WeightEstimate e;
            e.level = static_cast<int>(whole(f[0]));
            e.weight = whole(f[1]);
            e.trials = whole(f[2]);
            e.failures = whole(f[3]);
            e.r = real(f[4]);
            e.sigma = real(f[5]);
            e.seed = whole(f[6]);
            if (e.failures > e.trials) fail("failures exceed trials");
            if (e.r < 0.0 || e.r > 1.0) fail("r outside [0, 1]");
            rows.push_back(e);
        } catch (const std::invalid_argument&) {
            fail("malformed field in '" + line + "'");
        } catch (const std::out_of_range&) {
            fail("field out of range in '" + line + "'");
        }
    }
    if (!header) throw std::runtime_error(name + ": no rates header");
    return rows;
}

void write_curve_csv(std::ostream& os, int level, std::span<const CurvePoint> curve, int cap) {
    os << "level,p,p_logical,ci_lo,ci_hi,cap\n";
    os << std::setprecision(10);
    for (const auto& c : curve) {
        if (c.truncated) {
            os << "# warning: tail mass " << c.tail_mass << " above cap " << cap << " at p=" << c.p << "\n";
        }
        os << level << ',' << c.p << ',' << c.p_logical << ',' << c.ci_lo << ',' << c.ci_hi << ',' << cap << '\n';
    }
}

namespace {

json weight_json(Weight w) { return w.is_inf() ? json("INF") : json(w.value()); }

}  // namespace

std::string decode_outcome_json(const FlagSet& flags, int syndrome, const DecodeOutcome& out) {
    json j;
    j["flags"] = {{"AG1", weight_json(flags[Flag::AG1])},
                  {"AG2", weight_json(flags[Flag::AG2])},
                  {"A", weight_json(flags[Flag::A])}};
    j["syndrome"] = syndrome;
    j["match"] = to_string(out.match);
    j["correction"] = to_string(out.correction);
    j["weight"] = weight_json(out.weight);
    j["C_L"] = weight_json(out.c_l);
    j["C_G1"] = weight_json(out.c_g1);
    j["C_G2"] = weight_json(out.c_g2);
    return j.dump();
}

std::string exhaustive_json(const ExhaustiveResult& r) {
    json j;
    j["level"] = r.level;
    j["max_weight"] = r.max_weight;
    j["min_failing_weight"] = r.min_failing ? json(*r.min_failing) : json(nullptr);
    json ws = json::array();
    for (const auto& w : r.weights) {
        ws.push_back({{"weight", w.weight},
                      {"method", w.exhaustive ? "exhaustive" : "sampled"},
                      {"assignments", w.assignments},
                      {"branches", w.branches},
                      {"failures", w.failures}});
    }
    j["weights"] = ws;
    return j.dump();
}

namespace {

// Writes the whole payload at once so a failed run leaves no partial file.
void emit(const RunConfig& c, const std::string& payload, std::ostream& out) {
    if (c.out.empty()) {
        out << payload;
        return;
    }
    std::ofstream f(c.out, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open '" + c.out + "' for writing");
    f << payload;
    f.close();
    if (!f) throw std::runtime_error("write to '" + c.out + "' failed");
}

std::string cmd_count(const RunConfig& c) {
    std::ostringstream os;
    os << output_header("count", c) << "level,total_locations\n" << c.level << ',' << count_locations(c.level) << '\n';
    return os.str();
}

TrialOptions trial_options(const RunConfig& c) {
    TrialOptions t;
    t.engine.mode = c.mode;
    t.tiebreak = c.tiebreak;
    t.workers = c.workers;
    return t;
}

std::string cmd_rates(const RunConfig& c, std::ostream& err, bool verbose) {
    const Circuit circuit = build_exrec(c.level);
    if (c.weight_hi > circuit.size()) throw std::invalid_argument("weight range exceeds the location count");
    std::vector<WeightEstimate> rows;
    for (std::size_t w = c.weight_lo; w <= c.weight_hi; ++w) {
        rows.push_back(estimate_r(circuit, w, c.trials, c.seed, trial_options(c)));
        if (verbose) err << "weight " << w << ": " << rows.back().failures << "/" << rows.back().trials << "\n";
    }
    std::ostringstream os;
    os << output_header("rates", c);
    write_rates_csv(os, rows);
    return os.str();
}

std::string cmd_curve(const RunConfig& c) {
    if (c.rates.empty()) throw std::invalid_argument("curve needs at least one --rates file");
    std::map<int, std::vector<WeightEstimate>> by_level;
    for (const auto& path : c.rates) {
        std::ifstream f(path);
        if (!f) throw std::runtime_error("cannot read '" + path + "'");
        for (auto& e : read_rates_csv(f, path)) by_level[e.level].push_back(e);
    }
    const auto grid = log_grid(c.pmin, c.pmax, c.points);
    std::ostringstream os;
    os << output_header("curve", c);
    bool first = true;
    for (const auto& [level, rows] : by_level) {
        const std::size_t n = c.locations ? *c.locations : count_locations(level);
        const auto curve = assemble_curve(rows, n, grid, c.cap);
        std::ostringstream body;
        write_curve_csv(body, level, curve, c.cap);
        std::string text = body.str();
        if (!first) text = text.substr(text.find('\n') + 1);  // one column header per file
        os << text;
        first = false;
    }
    return os.str();
}

std::string cmd_exhaustive(const RunConfig& c) {
    const Circuit circuit = build_exrec(c.level);
    ExhaustiveOptions opt;
    opt.budget = c.budget;
    opt.allow_sampling = c.allow_sampling;
    opt.sample_trials = c.trials;
    opt.seed = c.seed;
    opt.trial = trial_options(c);
    const ExhaustiveResult r = exhaustive_search(circuit, c.max_weight, opt);
    std::ostringstream out;
    for (const auto& w : r.weights) {
        out << "# weight " << w.weight << " (" << (w.exhaustive ? "exhaustive" : "sampled") << "): " << w.assignments
            << " assignments, " << w.branches << " runs, " << w.failures << " failures\n";
    }
    if (r.min_failing) {
        out << "# minimum failing weight: " << *r.min_failing << "\n";
    } else {
        out << "# none <= " << r.max_weight << "\n";
    }
    return output_header("exhaustive", c) + out.str() + exhaustive_json(r) + "\n";
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Flag-based message-passing decoder simulator for the concatenated [[4,1,2]] code"};
    app.require_subcommand(1);

    RunConfig cfg;
    std::string config_path, weights, mode, tiebreak, ag1 = "INF", ag2 = "INF", a = "INF";
    int syndrome = 0;
    bool verbose = false;
    std::size_t locations = 0;

    auto add_common = [&](CLI::App* s) {
        s->add_option("--config", config_path, "JSON config file (flags override it)");
        s->add_option("--level", cfg.level, "Concatenation level (1..3)");
        s->add_option("--out", cfg.out, "Output file (default stdout)");
    };
    auto add_sim = [&](CLI::App* s) {
        s->add_option("--seed", cfg.seed, "Master seed");
        s->add_option("--trials", cfg.trials, "Trials per weight");
        s->add_option("--mode", mode, "Decoder mode: mp or uniform");
        s->add_option("--tiebreak", tiebreak, "Tie rule: random or priority");
        s->add_option("--workers", cfg.workers, "Worker threads (default FLAGMP_WORKERS or all cores)");
    };

    auto* count = app.add_subcommand("count", "Number of physical locations in the exRec");
    add_common(count);

    auto* rates = app.add_subcommand("rates", "Estimate r_i for a range of weights");
    add_common(rates);
    add_sim(rates);
    rates->add_option("--weights", weights, "Weight range a..b");
    rates->add_option("--cap", cfg.cap, "Truncation cap");
    rates->add_flag("--verbose", verbose, "Per-weight progress on stderr");

    auto* curve = app.add_subcommand("curve", "Assemble p_L(p) from rates files");
    add_common(curve);
    curve->add_option("--rates", cfg.rates, "Rates CSV file(s)")->expected(1, -1);
    curve->add_option("--pmin", cfg.pmin, "Smallest p");
    curve->add_option("--pmax", cfg.pmax, "Largest p");
    curve->add_option("--points", cfg.points, "Log-spaced grid points");
    curve->add_option("--cap", cfg.cap, "Truncation cap");
    curve->add_option("--locations", locations, "Override the location count N");

    auto* exhaustive = app.add_subcommand("exhaustive", "Minimum failing weight by enumeration");
    add_common(exhaustive);
    add_sim(exhaustive);
    exhaustive->add_option("--max-weight", cfg.max_weight, "Largest weight to search");
    exhaustive->add_option("--budget", cfg.budget, "Assignments per weight before sampling");
    exhaustive->add_flag("!--no-sampling", cfg.allow_sampling, "Fail instead of sampling over budget");

    auto* demo = app.add_subcommand("decode-demo", "Decode one flag set and syndrome");
    std::string flag_list;
    demo->add_option("--flags", flag_list, "Flag weights, e.g. AG1=4,AG2=0,A=2");
    demo->add_option("--ag1", ag1, "AG1 weight (integer or INF)");
    demo->add_option("--ag2", ag2, "AG2 weight");
    demo->add_option("--a", a, "A weight");
    demo->add_option("--syndrome", syndrome, "Syndrome bit")->check(CLI::Range(0, 1));
    demo->add_option("--tiebreak", tiebreak, "Tie rule: random or priority");
    demo->add_option("--seed", cfg.seed, "Seed for the random tie rule");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err);
    }

    try {
        if (!config_path.empty()) {
            // Config first, then re-apply anything given on the command line.
            std::ifstream f(config_path);
            if (!f) throw std::runtime_error("cannot read config '" + config_path + "'");
            std::stringstream ss;
            ss << f.rdbuf();
            RunConfig from_file;
            apply_config_json(from_file, ss.str());
            CLI::App* sub = app.get_subcommands().front();
            auto given = [&](const char* name) { return sub->get_option_no_throw(name) && sub->count(name) > 0; };
            RunConfig merged = from_file;
            if (given("--level")) merged.level = cfg.level;
            if (given("--out")) merged.out = cfg.out;
            if (given("--seed")) merged.seed = cfg.seed;
            if (given("--trials")) merged.trials = cfg.trials;
            if (given("--workers")) merged.workers = cfg.workers;
            if (given("--cap")) merged.cap = cfg.cap;
            if (given("--rates")) merged.rates = cfg.rates;
            if (given("--pmin")) merged.pmin = cfg.pmin;
            if (given("--pmax")) merged.pmax = cfg.pmax;
            if (given("--points")) merged.points = cfg.points;
            if (given("--max-weight")) merged.max_weight = cfg.max_weight;
            if (given("--budget")) merged.budget = cfg.budget;
            if (given("--no-sampling")) merged.allow_sampling = cfg.allow_sampling;
            cfg = merged;
        }
        if (!weights.empty()) std::tie(cfg.weight_lo, cfg.weight_hi) = parse_weight_range(weights);
        // The default weight range follows a lowered cap.
        if (weights.empty() && cfg.weight_hi == std::size_t(kDefaultCap) && cfg.cap >= 0 && cfg.cap < kDefaultCap) {
            cfg.weight_hi = static_cast<std::size_t>(cfg.cap);
        }
        if (!mode.empty()) cfg.mode = parse_mode(mode);
        if (!tiebreak.empty()) cfg.tiebreak = parse_tiebreak(tiebreak);
        if (locations > 0) cfg.locations = locations;

        if (*demo) {
            std::stringstream fl(flag_list);
            std::string item;
            while (std::getline(fl, item, ',')) {
                const auto eq = item.find('=');
                const std::string key = item.substr(0, eq);
                if (eq == std::string::npos) throw std::invalid_argument("bad flag entry '" + item + "'");
                if (key == "AG1") ag1 = item.substr(eq + 1);
                else if (key == "AG2") ag2 = item.substr(eq + 1);
                else if (key == "A") a = item.substr(eq + 1);
                else throw std::invalid_argument("unknown flag '" + key + "'");
            }
            FlagSet fs;
            fs[Flag::AG1] = parse_weight_value(ag1);
            fs[Flag::AG2] = parse_weight_value(ag2);
            fs[Flag::A] = parse_weight_value(a);
            std::mt19937_64 rng = trial_stream(cfg.seed, 0);
            TieBreaker tb = cfg.tiebreak == TieBreaker::Mode::Priority ? TieBreaker::priority() : TieBreaker::random(rng);
            const DecodeOutcome o = match_syndrome(fs, syndrome, tb);
            out << decode_outcome_json(fs, syndrome, o) << "\n";
            return 0;
        }

        cfg.validate();
        if (*count) emit(cfg, cmd_count(cfg), out);
        else if (*rates) emit(cfg, cmd_rates(cfg, err, verbose), out);
        else if (*curve) emit(cfg, cmd_curve(cfg), out);
        else if (*exhaustive) emit(cfg, cmd_exhaustive(cfg), out);
        return 0;
    } catch (const InconsistencyFault& e) {
        err << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }
}

}  // namespace flagmp
