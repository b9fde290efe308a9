#include "v2g/config.hpp"

#include "v2g/errors.hpp"
#include "v2g/random.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

extern char** environ;

namespace v2g {

using nlohmann::json;

void TariffSynthesisSpec::validate() const {
    if (mean.empty()) throw std::invalid_argument("tariff mean profile is empty");
    if (!(relative_std >= 0.0)) throw std::invalid_argument("tariff relative_std must be >= 0");
    if (!(scale >= 0.0)) throw std::invalid_argument("tariff variance scale must be >= 0");
}

std::vector<double> synthesize_tariff(const TariffSynthesisSpec& spec, std::uint64_t stream) {
    spec.validate();
    std::vector<double> out(spec.mean.size());
    if (spec.scale == 0.0 || spec.relative_std == 0.0) {
        out = spec.mean;
        return out;
    }
    Rng rng(spec.seed, stream);
    for (std::size_t t = 0; t < out.size(); ++t) {
        const double z = rng.normal();
        out[t] = std::max(0.0, spec.mean[t] * (1.0 + spec.scale * spec.relative_std * z));
    }
    return out;
}

std::string fnv1a_hex(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

SessionConfig StudyConfig::session_kwh() const {
    return per_unit_to_kwh(session, pack);
}

AmbientSeries StudyConfig::ambient() const {
    if (!ambient_csv.empty()) return load_ambient_csv(ambient_csv);
    return AmbientSeries::constant(ambient_c + kCelsiusOffset);
}

EnvEntries environment_overrides() {
    EnvEntries out;
    const std::string prefix = kEnvPrefix;
    for (char** e = environ; e != nullptr && *e != nullptr; ++e) {
        std::string entry = *e;
        if (entry.rfind(prefix, 0) != 0) continue;
        const auto eq = entry.find('=');
        if (eq == std::string::npos) continue;
        out.emplace_back(entry.substr(0, eq), entry.substr(eq + 1));
    }
    std::sort(out.begin(), out.end());
    return out;
}

namespace {

std::string lower(std::string s) {
    for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

// V2GSCHED_SESSION__P_MAX_KW=50 sets session.P_max_kw; segments match existing keys
// case-insensitively. Values parse as JSON, falling back to a plain string.
void apply_env(json& root, const EnvEntries& env, std::vector<std::string>& errors) {
    const std::string prefix = kEnvPrefix;
    for (const auto& [name, value] : env) {
        if (name.rfind(prefix, 0) != 0) continue;
        std::vector<std::string> path;
        std::string rest = name.substr(prefix.size());
        for (std::size_t pos; (pos = rest.find("__")) != std::string::npos;) {
            path.push_back(rest.substr(0, pos));
            rest = rest.substr(pos + 2);
        }
        path.push_back(rest);
        json* node = &root;
        bool ok = true;
        for (std::size_t i = 0; i < path.size(); ++i) {
            if (node->is_null()) *node = json::object();
            if (!node->is_object()) {
                errors.push_back(name + ": cannot descend into a non-object");
                ok = false;
                break;
            }
            std::string key = lower(path[i]);
            for (auto it = node->begin(); it != node->end(); ++it) {
                if (lower(it.key()) == key) {
                    key = it.key();
                    break;
                }
            }
            node = &(*node)[key];
        }
        if (!ok) continue;
        json parsed = json::parse(value, nullptr, false);
        *node = parsed.is_discarded() ? json(value) : parsed;
    }
}

class Reader {
public:
    Reader(const json& root, std::filesystem::path base, std::vector<std::string>& errors)
        : root_(root), base_(std::move(base)), errors_(errors) {}

    const json* section(const char* name) {
        if (!root_.contains(name)) return nullptr;
        const json& s = root_.at(name);
        if (!s.is_object()) {
            errors_.push_back(std::string(name) + ": expected an object");
            return nullptr;
        }
        return &s;
    }

    template <class T>
    void get(const json* obj, const std::string& where, const char* key, T& out) {
        if (obj == nullptr || !obj->contains(key)) return;
        try {
            out = obj->at(key).get<T>();
        } catch (const json::exception&) {
            errors_.push_back(where + key + ": wrong type");
        }
    }

    void path(const json* obj, const std::string& where, const char* key,
              std::filesystem::path& out) {
        std::string s;
        get(obj, where, key, s);
        if (!s.empty()) out = resolve(s);
    }

    std::filesystem::path resolve(const std::string& s) const {
        std::filesystem::path p(s);
        return p.is_absolute() ? p : (base_ / p).lexically_normal();
    }

    // Keys this reader does not know about are almost always typos.
    void unknown_keys(const json* obj, const std::string& where,
                      std::initializer_list<const char*> known) {
        if (obj == nullptr) return;
        for (auto it = obj->begin(); it != obj->end(); ++it) {
            const bool found = std::any_of(known.begin(), known.end(),
                                           [&](const char* k) { return it.key() == k; });
            if (!found) errors_.push_back(where + it.key() + ": unknown key");
        }
    }

private:
    const json& root_;
    std::filesystem::path base_;
    std::vector<std::string>& errors_;
};

// Built-in synthetic tariff used when no profile is configured.
std::vector<double> default_alpha(std::size_t T) {
    std::vector<double> a(T);
    for (std::size_t t = 0; t < T; ++t) {
        const double x = static_cast<double>(t);
        a[t] = 0.20 + 0.08 * std::sin(0.5 * x) + 0.01 * x;
    }
    return a;
}

json to_json(const StudyConfig& c) {
    const auto& s = c.session;
    const auto& p = c.pack;
    const auto& d = c.degradation;
    const auto& th = c.thermal;
    const auto& pr = c.projection;
    return json{
        {"session",
         {{"T", s.T}, {"delta_t_h", s.delta_t_h}, {"P_min_kw", s.P_min}, {"P_max_kw", s.P_max},
          {"E_min_pu", s.E_min_pu}, {"E_max_pu", s.E_max_pu}, {"E_0_pu", s.E_0_pu},
          {"E_des_pu", s.E_des_pu}, {"epsilon_pu", s.epsilon_pu}, {"eta_avg", s.eta_avg},
          {"alpha", s.alpha}}},
        {"pack",
         {{"C_rated_ah", p.C_rated}, {"n_series", p.n_series}, {"n_parallel", p.n_parallel},
          {"V_pack", p.V_pack}, {"capacity_kwh", p.capacity_kwh}, {"R_int_ohm", p.R_int},
          {"gamma", p.gamma}, {"n_max", p.n_max}}},
        {"degradation",
         {{"a", d.a}, {"b", d.b}, {"c", d.c}, {"d", d.d}, {"e", d.e}, {"A_cal", d.A_cal},
          {"E_a", d.E_a}, {"R_gas", d.R_gas}, {"h", d.h}}},
        {"thermal",
         {{"M_c", th.M_c}, {"M_b", th.M_b}, {"K_ac", th.K_ac}, {"K_ab", th.K_ab},
          {"K_bc", th.K_bc}, {"q_rad", th.q_rad}, {"q_hvac", th.q_hvac},
          {"btms_efficiency", th.btms_efficiency}, {"step_s", c.thermal_sim.step_s}}},
        {"ambient", {{"constant_c", c.ambient_c}, {"csv", c.ambient_csv.string()}}},
        {"studies",
         {{"ta_values_c", c.ta_values_c}, {"charger_ratings_kw", c.charger_ratings_kw},
          {"variance_scales", c.variance_scales}, {"w_grid", c.w_grid},
          {"profile_w", c.profile_w}}},
        {"tariff_synthesis", {{"relative_std", c.tariff_relative_std}}},
        {"robustness",
         {{"draws", c.robustness.draws}, {"low_factor", c.robustness.low_factor},
          {"high_factor", c.robustness.high_factor}, {"rho_count", c.robustness.rho_count}}},
        {"projection",
         {{"days", pr.days}, {"session_weekdays", pr.session_weekdays},
          {"session_start_h", pr.session_start_h}, {"session_T", pr.session_T},
          {"daily_drive_kwh", pr.daily_drive_kwh}, {"capacities_kwh", pr.capacities_kwh},
          {"w_grid", pr.w_grid}, {"tariff_csv", pr.tariff_csv.string()},
          {"temperature_csv", pr.temperature_csv.string()}}},
        {"seed", c.seed},
    };
}

void check_file(const std::filesystem::path& p, const std::string& key,
                std::vector<std::string>& errors) {
    if (p.empty()) return;
    std::error_code ec;
    if (!std::filesystem::is_regular_file(p, ec)) {
        errors.push_back(key + ": I/O error, cannot read '" + p.string() + "'");
    }
}

}  // namespace

std::vector<std::string> validate_config(const StudyConfig& cfg) {
    std::vector<std::string> v;
    auto check = [&](bool ok, const std::string& msg) {
        if (!ok) v.push_back(msg);
    };
    try {
        // Session checks run on the kWh form; report them under the config file's key names.
        static const std::pair<const char*, const char*> kNames[] = {
            {"session.E_0 must lie in [E_min, E_max]", "session.E_0_pu must lie in [E_min_pu, E_max_pu]"},
            {"session.E_des must lie in [E_min, E_max]", "session.E_des_pu must lie in [E_min_pu, E_max_pu]"},
            {"session.epsilon must be >= 0", "session.epsilon_pu must be >= 0"},
            {"session.P_min must be <= 0", "session.P_min_kw must be <= 0"},
            {"session.P_max must be >= 0", "session.P_max_kw must be >= 0"},
        };
        for (auto& s : cfg.session_kwh().violations()) {
            for (const auto& [from, to] : kNames)
                if (s == from) s = to;
            v.push_back(std::move(s));
        }
    } catch (const std::exception& e) {
        v.emplace_back(e.what());
    }
    try {
        cfg.degradation.validate();
    } catch (const std::exception& e) {
        v.push_back(std::string("degradation: ") + e.what());
    }
    try {
        cfg.thermal.validate();
    } catch (const std::exception& e) {
        v.push_back(std::string("thermal: ") + e.what());
    }
    check(cfg.thermal_sim.step_s > 0.0, "thermal.step_s must be > 0");
    check(!cfg.ta_values_c.empty(), "studies.ta_values_c must be non-empty");
    check(!cfg.charger_ratings_kw.empty(), "studies.charger_ratings_kw must be non-empty");
    check(std::all_of(cfg.charger_ratings_kw.begin(), cfg.charger_ratings_kw.end(),
                      [](double r) { return r > 0.0; }),
          "studies.charger_ratings_kw must be > 0");
    check(!cfg.variance_scales.empty(), "studies.variance_scales must be non-empty");
    check(std::all_of(cfg.variance_scales.begin(), cfg.variance_scales.end(),
                      [](double s) { return s >= 0.0; }),
          "studies.variance_scales must be >= 0");
    check(!cfg.w_grid.empty(), "studies.w_grid must be non-empty");
    check(std::all_of(cfg.w_grid.begin(), cfg.w_grid.end(),
                      [&](std::size_t w) { return w <= cfg.session.T; }),
          "studies.w_grid entries must be <= session.T");
    check(std::all_of(cfg.profile_w.begin(), cfg.profile_w.end(),
                      [&](std::size_t w) { return w <= cfg.session.T; }),
          "studies.profile_w entries must be <= session.T");
    check(cfg.tariff_relative_std >= 0.0, "tariff_synthesis.relative_std must be >= 0");
    check(cfg.robustness.draws >= 1, "robustness.draws must be >= 1");
    check(cfg.robustness.low_factor > 0.0 && cfg.robustness.low_factor <= 1.0 &&
              cfg.robustness.high_factor >= 1.0,
          "robustness factors must satisfy 0 < low_factor <= 1 <= high_factor");
    const auto& pr = cfg.projection;
    check(pr.days >= 1, "projection.days must be >= 1");
    check(std::all_of(pr.session_weekdays.begin(), pr.session_weekdays.end(),
                      [](int d) { return d >= 0 && d < 7; }),
          "projection.session_weekdays must be in 0..6");
    check(pr.session_start_h >= 0.0 && pr.session_start_h < 24.0,
          "projection.session_start_h must be in [0, 24)");
    check(pr.session_T >= 1, "projection.session_T must be >= 1");
    check(pr.daily_drive_kwh >= 0.0, "projection.daily_drive_kwh must be >= 0");
    check(!pr.capacities_kwh.empty(), "projection.capacities_kwh must be non-empty");
    check(std::all_of(pr.capacities_kwh.begin(), pr.capacities_kwh.end(),
                      [](double c) { return c > 0.0; }),
          "projection.capacities_kwh must be > 0");
    check(!pr.w_grid.empty(), "projection.w_grid must be non-empty");
    check(std::all_of(pr.w_grid.begin(), pr.w_grid.end(),
                      [&](std::size_t w) { return w <= pr.session_T; }),
          "projection.w_grid entries must be <= projection.session_T");
    check_file(cfg.ambient_csv, "ambient.csv", v);
    check_file(pr.tariff_csv, "projection.tariff_csv", v);
    check_file(pr.temperature_csv, "projection.temperature_csv", v);
    if (!cfg.ambient_csv.empty() && std::filesystem::is_regular_file(cfg.ambient_csv)) {
        try {
            (void)load_ambient_csv(cfg.ambient_csv);
        } catch (const std::exception& e) {
            v.push_back(std::string("ambient.csv: ") + e.what());
        }
    }
    return v;
}

StudyConfig parse_config(const std::string& json_text, const std::filesystem::path& base_dir,
                         const EnvEntries& env) {
    std::vector<std::string> errors;
    json root = json::parse(json_text, nullptr, false, true);
    if (root.is_discarded() || !root.is_object()) {
        throw ConfigError({"configuration is not a JSON object"});
    }
    apply_env(root, env, errors);

    StudyConfig c;
    Reader r(root, base_dir, errors);
    r.unknown_keys(&root, "", {"session", "pack", "degradation", "thermal", "ambient", "studies",
                               "tariff_synthesis", "robustness", "projection", "output_dir",
                               "seed", "threads"});

    const json* s = r.section("session");
    r.unknown_keys(s, "session.", {"T", "delta_t_h", "P_min_kw", "P_max_kw", "E_min_pu",
                                   "E_max_pu", "E_0_pu", "E_des_pu", "epsilon_pu", "eta_avg",
                                   "alpha", "tariff_csv"});
    auto& ss = c.session;
    r.get(s, "session.", "T", ss.T);
    r.get(s, "session.", "delta_t_h", ss.delta_t_h);
    r.get(s, "session.", "P_min_kw", ss.P_min);
    r.get(s, "session.", "P_max_kw", ss.P_max);
    r.get(s, "session.", "E_min_pu", ss.E_min_pu);
    r.get(s, "session.", "E_max_pu", ss.E_max_pu);
    r.get(s, "session.", "E_0_pu", ss.E_0_pu);
    r.get(s, "session.", "E_des_pu", ss.E_des_pu);
    r.get(s, "session.", "epsilon_pu", ss.epsilon_pu);
    r.get(s, "session.", "eta_avg", ss.eta_avg);
    r.get(s, "session.", "alpha", ss.alpha);
    r.path(s, "session.", "tariff_csv", c.tariff_csv);
    if (!ss.alpha.empty() && !c.tariff_csv.empty()) {
        errors.emplace_back("session: give either alpha or tariff_csv, not both");
    }
    if (!c.tariff_csv.empty()) {
        try {
            ss.alpha = load_tariff_csv(c.tariff_csv);
        } catch (const std::exception& e) {
            errors.push_back(std::string("session.tariff_csv: I/O error: ") + e.what());
            ss.alpha = default_alpha(ss.T);  // keeps the length check from piling on
        }
    } else if (ss.alpha.empty()) {
        ss.alpha = default_alpha(ss.T);
    }

    const json* p = r.section("pack");
    r.unknown_keys(p, "pack.", {"C_rated_ah", "n_series", "n_parallel", "V_pack", "capacity_kwh",
                                "R_int_ohm", "gamma", "n_max"});
    r.get(p, "pack.", "C_rated_ah", c.pack.C_rated);
    r.get(p, "pack.", "n_series", c.pack.n_series);
    r.get(p, "pack.", "n_parallel", c.pack.n_parallel);
    r.get(p, "pack.", "V_pack", c.pack.V_pack);
    r.get(p, "pack.", "capacity_kwh", c.pack.capacity_kwh);
    r.get(p, "pack.", "R_int_ohm", c.pack.R_int);
    r.get(p, "pack.", "gamma", c.pack.gamma);
    r.get(p, "pack.", "n_max", c.pack.n_max);

    const json* d = r.section("degradation");
    r.unknown_keys(d, "degradation.", {"a", "b", "c", "d", "e", "A_cal", "E_a", "R_gas", "h"});
    auto& dg = c.degradation;
    r.get(d, "degradation.", "a", dg.a);
    r.get(d, "degradation.", "b", dg.b);
    r.get(d, "degradation.", "c", dg.c);
    r.get(d, "degradation.", "d", dg.d);
    r.get(d, "degradation.", "e", dg.e);
    r.get(d, "degradation.", "A_cal", dg.A_cal);
    r.get(d, "degradation.", "E_a", dg.E_a);
    r.get(d, "degradation.", "R_gas", dg.R_gas);
    r.get(d, "degradation.", "h", dg.h);

    const json* th = r.section("thermal");
    r.unknown_keys(th, "thermal.", {"M_c", "M_b", "K_ac", "K_ab", "K_bc", "q_rad", "q_hvac",
                                    "btms_efficiency", "step_s"});
    auto& tp = c.thermal;
    r.get(th, "thermal.", "M_c", tp.M_c);
    r.get(th, "thermal.", "M_b", tp.M_b);
    r.get(th, "thermal.", "K_ac", tp.K_ac);
    r.get(th, "thermal.", "K_ab", tp.K_ab);
    r.get(th, "thermal.", "K_bc", tp.K_bc);
    r.get(th, "thermal.", "q_rad", tp.q_rad);
    r.get(th, "thermal.", "q_hvac", tp.q_hvac);
    r.get(th, "thermal.", "btms_efficiency", tp.btms_efficiency);
    r.get(th, "thermal.", "step_s", c.thermal_sim.step_s);
    c.thermal_sim.sample_interval_h = ss.delta_t_h;

    const json* a = r.section("ambient");
    r.unknown_keys(a, "ambient.", {"constant_c", "csv"});
    r.get(a, "ambient.", "constant_c", c.ambient_c);
    r.path(a, "ambient.", "csv", c.ambient_csv);

    const json* st = r.section("studies");
    r.unknown_keys(st, "studies.", {"ta_values_c", "charger_ratings_kw", "variance_scales",
                                    "w_grid", "profile_w"});
    r.get(st, "studies.", "ta_values_c", c.ta_values_c);
    r.get(st, "studies.", "charger_ratings_kw", c.charger_ratings_kw);
    r.get(st, "studies.", "variance_scales", c.variance_scales);
    const bool explicit_w = st != nullptr && st->contains("w_grid");
    r.get(st, "studies.", "w_grid", c.w_grid);
    if (!explicit_w) {
        for (std::size_t w = 0; w <= ss.T; ++w) c.w_grid.push_back(w);
    }
    const bool explicit_profiles = st != nullptr && st->contains("profile_w");
    r.get(st, "studies.", "profile_w", c.profile_w);
    if (!explicit_profiles) c.profile_w = {0, ss.T / 2, ss.T};

    const json* ts = r.section("tariff_synthesis");
    r.unknown_keys(ts, "tariff_synthesis.", {"relative_std"});
    r.get(ts, "tariff_synthesis.", "relative_std", c.tariff_relative_std);

    const json* rb = r.section("robustness");
    r.unknown_keys(rb, "robustness.", {"draws", "low_factor", "high_factor", "rho_count"});
    r.get(rb, "robustness.", "draws", c.robustness.draws);
    r.get(rb, "robustness.", "low_factor", c.robustness.low_factor);
    r.get(rb, "robustness.", "high_factor", c.robustness.high_factor);
    r.get(rb, "robustness.", "rho_count", c.robustness.rho_count);

    const json* pj = r.section("projection");
    r.unknown_keys(pj, "projection.", {"days", "session_weekdays", "session_start_h", "session_T",
                                       "daily_drive_kwh", "capacities_kwh", "w_grid",
                                       "tariff_csv", "temperature_csv"});
    auto& pr = c.projection;
    r.get(pj, "projection.", "days", pr.days);
    r.get(pj, "projection.", "session_weekdays", pr.session_weekdays);
    r.get(pj, "projection.", "session_start_h", pr.session_start_h);
    r.get(pj, "projection.", "session_T", pr.session_T);
    r.get(pj, "projection.", "daily_drive_kwh", pr.daily_drive_kwh);
    r.get(pj, "projection.", "capacities_kwh", pr.capacities_kwh);
    r.get(pj, "projection.", "w_grid", pr.w_grid);
    r.path(pj, "projection.", "tariff_csv", pr.tariff_csv);
    r.path(pj, "projection.", "temperature_csv", pr.temperature_csv);

    std::string out_dir;
    r.get(&root, "", "output_dir", out_dir);
    if (!out_dir.empty()) c.output_dir = r.resolve(out_dir);
    r.get(&root, "", "seed", c.seed);
    r.get(&root, "", "threads", c.threads);

    for (auto& e : validate_config(c)) errors.push_back(std::move(e));
    if (!errors.empty()) {
        std::sort(errors.begin(), errors.end());
        errors.erase(std::unique(errors.begin(), errors.end()), errors.end());
        throw ConfigError(std::move(errors));
    }
    rehash(c);
    return c;
}

void rehash(StudyConfig& cfg) {
    cfg.canonical_json = to_json(cfg).dump();
    cfg.hash = fnv1a_hex(cfg.canonical_json);
}

StudyConfig load_config(const std::filesystem::path& path, const EnvEntries& env) {
    if (path.empty()) return parse_config("{}", std::filesystem::current_path(), env);
    std::ifstream in(path);
    if (!in) throw ConfigError({"config: I/O error, cannot read '" + path.string() + "'"});
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), std::filesystem::absolute(path).parent_path(), env);
}

}  // namespace v2g
