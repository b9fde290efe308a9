#include "v2g/studies.hpp"

#include "v2g/csv_io.hpp"
#include "v2g/errors.hpp"
#include "v2g/parallel.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <thread>

#ifndef V2G_VERSION
#define V2G_VERSION "0.0.0"
#endif

namespace v2g {

namespace fs = std::filesystem;

const char* tool_version() { return V2G_VERSION; }

namespace {

unsigned worker_count(const StudyConfig& cfg) {
    if (cfg.threads > 0) return cfg.threads;
    return std::max(1u, std::thread::hardware_concurrency());
}

// Separate RNG streams keyed off the global seed.
constexpr std::uint64_t kTariffVarianceStream = 1;
constexpr std::uint64_t kProjectionStreamBase = 1000;

std::string describe(double key, std::size_t w) {
    std::ostringstream s;
    s << "cell (key=" << key << ", w=" << w << ")";
    return s.str();
}

}  // namespace

Metadata output_metadata(const StudyConfig& cfg, const std::string& study) {
    return {{"tool", "v2gsched"},
            {"version", tool_version()},
            {"study", study},
            {"config_hash", cfg.hash},
            {"seed", std::to_string(cfg.seed)}};
}

double fitted_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) {
        throw std::invalid_argument("slope fit needs two or more paired points");
    }
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    if (sxx == 0.0) throw std::invalid_argument("slope fit needs distinct x values");
    return sxy / sxx;
}

double span(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    return *hi - *lo;
}

TemperatureProfile session_temperatures(const StudyConfig& cfg, const SessionConfig& session,
                                        const AmbientSeries& ambient, double rho) {
    const double I = representative_current(rho, session.P_max, session.pack.V_pack);
    const double Q = heat_generation(I, session.pack.R_int);
    ThermalSimOptions opts = cfg.thermal_sim;
    opts.sample_interval_h = session.delta_t_h;
    const double T0 = ambient.at(0.0);
    return simulate_temperatures(ambient, cfg.thermal, Q, session.horizon_h(), T0, T0, opts);
}

SweepRow solve_cell(const StudyConfig& cfg, const SessionConfig& session,
                    const AmbientSeries& ambient, std::size_t w, double key) {
    const double rho = static_cast<double>(w) / static_cast<double>(session.T);
    const auto profile = session_temperatures(cfg, session, ambient, rho);
    const auto g =
        make_instance(session, assign_intervals(session.alpha, w), profile, cfg.degradation);
    auto sched = solve_gne(g);
    if (sched.status != qp::SolveStatus::Optimal) {
        throw StudyError(describe(key, w) + ": solver ended with status " +
                         qp::to_string(sched.status));
    }
    if (!sched.feasibility.feasible()) {
        throw StudyError(describe(key, w) + ": schedule violates session constraints by " +
                         format_double(sched.feasibility.max_violation()));
    }
    SweepRow row;
    row.key = key;
    row.w = w;
    row.charging_cost = sched.revenue_cost;
    row.degradation_cost = sched.degradation_cost;
    row.cyclic_loss_pct = 100.0 * sched.degradation_loss;
    row.max_violation = sched.feasibility.max_violation();
    row.clamped_intervals = static_cast<std::size_t>(
        std::count_if(g.coeffs.begin(), g.coeffs.end(), [](const auto& k) { return k.clamped; }));
    row.P = std::move(sched.P_bat);
    return row;
}

namespace {

struct CellSpec {
    SessionConfig session;
    AmbientSeries ambient;
    double key = 0.0;
};

// Every (scenario, w) pair solved in parallel; results come back grouped per scenario.
std::vector<Sweep> solve_sweeps(const StudyConfig& cfg, const std::vector<CellSpec>& specs,
                                const std::vector<std::size_t>& w_grid) {
    if (w_grid.empty()) throw ConfigError({"studies.w_grid must be non-empty"});
    for (const auto& s : specs) s.session.validate();
    std::vector<Sweep> out(specs.size());
    for (std::size_t i = 0; i < specs.size(); ++i) {
        out[i].key = specs[i].key;
        out[i].rows.resize(w_grid.size());
    }
    const std::size_t nw = w_grid.size();
    parallel_for(specs.size() * nw, worker_count(cfg), [&](std::size_t k) {
        const auto& s = specs[k / nw];
        out[k / nw].rows[k % nw] = solve_cell(cfg, s.session, s.ambient, w_grid[k % nw], s.key);
    });
    return out;
}

}  // namespace

TemperatureStudy run_temperature_study(const StudyConfig& cfg) {
    if (cfg.ta_values_c.empty()) throw ConfigError({"studies.ta_values_c must be non-empty"});
    std::vector<CellSpec> specs;
    for (double ta : cfg.ta_values_c) {
        specs.push_back({cfg.session_kwh(), AmbientSeries::constant(ta + kCelsiusOffset), ta});
    }
    TemperatureStudy out;
    out.sweeps = solve_sweeps(cfg, specs, cfg.w_grid);
    const double T = static_cast<double>(cfg.session.T);
    for (const auto& sw : out.sweeps) {
        std::vector<double> x;
        std::vector<double> y;
        std::size_t clamped = 0;
        for (const auto& r : sw.rows) {
            x.push_back(static_cast<double>(r.w) / T);
            y.push_back(r.cyclic_loss_pct);
            clamped += r.clamped_intervals;
        }
        out.slopes.push_back(x.size() >= 2 ? fitted_slope(x, y) : 0.0);
        out.clamped_intervals.push_back(clamped);
    }
    return out;
}

TariffVarianceStudy run_tariff_variance_study(const StudyConfig& cfg) {
    if (cfg.variance_scales.empty()) {
        throw ConfigError({"studies.variance_scales must be non-empty"});
    }
    const auto base = cfg.session_kwh();
    const auto ambient = cfg.ambient();
    TariffVarianceStudy out;
    std::vector<CellSpec> specs;
    for (double scale : cfg.variance_scales) {
        TariffSynthesisSpec ts{base.alpha, cfg.tariff_relative_std, scale, cfg.seed};
        auto session = base;
        session.alpha = synthesize_tariff(ts, kTariffVarianceStream);
        out.tariffs.push_back(session.alpha);
        specs.push_back({session, ambient, scale});
    }
    out.sweeps = solve_sweeps(cfg, specs, cfg.w_grid);
    return out;
}

ChargerStudy run_charger_study(const StudyConfig& cfg) {
    if (cfg.charger_ratings_kw.empty()) {
        throw ConfigError({"studies.charger_ratings_kw must be non-empty"});
    }
    const auto ambient = cfg.ambient();
    std::vector<CellSpec> specs;
    for (double rating : cfg.charger_ratings_kw) {
        auto session = cfg.session_kwh();
        session.P_max = rating;
        session.P_min = -rating;
        try {
            session.validate();
        } catch (const InfeasibleSession& e) {
            throw InfeasibleSession("charger rating " + format_double(rating) + " kW: " + e.what());
        }
        specs.push_back({session, ambient, rating});
    }
    ChargerStudy out;
    out.sweeps = solve_sweeps(cfg, specs, cfg.w_grid);
    for (const auto& sw : out.sweeps) {
        std::vector<double> c;
        std::vector<double> d;
        for (const auto& r : sw.rows) {
            c.push_back(r.charging_cost);
            d.push_back(r.degradation_cost);
        }
        out.charging_span.push_back(span(c));
        out.degradation_span.push_back(span(d));
    }
    return out;
}

std::vector<ProfileExport> run_profile_export(const StudyConfig& cfg) {
    const auto session = cfg.session_kwh();
    session.validate();
    const auto ambient = cfg.ambient();
    std::vector<ProfileExport> out(cfg.profile_w.size());
    parallel_for(out.size(), worker_count(cfg), [&](std::size_t i) {
        const std::size_t w = cfg.profile_w[i];
        const auto row = solve_cell(cfg, session, ambient, w);
        const auto profile = session_temperatures(
            cfg, session, ambient, static_cast<double>(w) / static_cast<double>(session.T));
        const auto g =
            make_instance(session, assign_intervals(session.alpha, w), profile, cfg.degradation);
        out[i].w = w;
        out[i].schedule = make_schedule(g, row.P);
        out[i].alpha = session.alpha;
    });
    return out;
}

RobustnessSummary run_robustness(const StudyConfig& cfg) {
    const auto session = cfg.session_kwh();
    session.validate();
    const auto ambient = cfg.ambient();
    const std::size_t T = session.T;
    // Thermal participation level: w / T for the game, the weight itself for the weighted sum.
    InstanceFactory factory = [&](Approach a, double hyper) {
        const std::size_t w = a == Approach::GameTheoretic ? static_cast<std::size_t>(hyper) : 0;
        const double rho =
            a == Approach::GameTheoretic ? static_cast<double>(w) / static_cast<double>(T) : hyper;
        const auto profile = session_temperatures(cfg, session, ambient, rho);
        return make_instance(session, assign_intervals(session.alpha, w), profile,
                             cfg.degradation);
    };
    std::vector<double> w_grid;
    for (std::size_t w : cfg.w_grid) w_grid.push_back(static_cast<double>(w));
    const std::size_t rho_count = cfg.robustness.rho_count > 0 ? cfg.robustness.rho_count : T + 1;
    PerturbationSpec spec;
    spec.low_factor = cfg.robustness.low_factor;
    spec.high_factor = cfg.robustness.high_factor;
    spec.sample_count = cfg.robustness.draws;
    spec.rng_seed = cfg.seed;
    return run_comparison(factory, w_grid, rho_grid(rho_count), spec, worker_count(cfg));
}

ProjectionStudy run_projection_year(const StudyConfig& cfg) {
    const auto& pr = cfg.projection;
    std::vector<std::string> missing;
    if (pr.tariff_csv.empty()) missing.emplace_back("projection.tariff_csv is required");
    if (pr.temperature_csv.empty()) missing.emplace_back("projection.temperature_csv is required");
    if (!missing.empty()) throw ConfigError(std::move(missing));

    const auto mean_tariff = load_tariff_csv(pr.tariff_csv);
    if (mean_tariff.size() != pr.session_T) {
        throw ConfigError({"projection.tariff_csv has " + std::to_string(mean_tariff.size()) +
                           " intervals, projection.session_T is " +
                           std::to_string(pr.session_T)});
    }
    const auto ambient = load_ambient_csv(pr.temperature_csv);
    const double year_h = 24.0 * pr.days;
    if (!ambient.covers(0.0, year_h)) {
        const double have = ambient.empty() ? 0.0 : ambient.times().back() / 24.0;
        throw IoError("temperature file '" + pr.temperature_csv.string() + "' covers " +
                      format_double(have) + " days, need " + std::to_string(pr.days));
    }

    std::vector<int> session_days;
    for (int d = 0; d < pr.days; ++d) {
        if (std::find(pr.session_weekdays.begin(), pr.session_weekdays.end(), d % 7) !=
            pr.session_weekdays.end()) {
            session_days.push_back(d);
        }
    }
    // Tariffs are shared by every cell so capacities and w values see identical prices.
    std::vector<std::vector<double>> tariffs;
    for (int d : session_days) {
        TariffSynthesisSpec ts{mean_tariff, cfg.tariff_relative_std, 1.0, cfg.seed};
        tariffs.push_back(synthesize_tariff(ts, kProjectionStreamBase + static_cast<std::uint64_t>(d)));
    }

    SessionConfigPu pu = cfg.session;
    pu.T = pr.session_T;
    ProjectionStudy out;
    for (double cap : pr.capacities_kwh)
        for (std::size_t w : pr.w_grid) out.rows.push_back({cap, w});

    parallel_for(out.rows.size(), worker_count(cfg), [&](std::size_t k) {
        auto& row = out.rows[k];
        auto session = per_unit_to_kwh(pu, cfg.pack.with_capacity(row.capacity_kwh));
        session.alpha = mean_tariff;
        double energy = session.E_0;
        int last_day = -1;
        for (std::size_t s = 0; s < session_days.size(); ++s) {
            const int day = session_days[s];
            // Driving since the previous session drains the pack before plugging in.
            const int idle_days = last_day < 0 ? 0 : day - last_day;
            session.E_0 = std::max(session.E_min, energy - pr.daily_drive_kwh * idle_days);
            session.alpha = tariffs[s];
            const double t0 = 24.0 * day + pr.session_start_h;
            const auto window = ambient.window(t0, session.horizon_h());
            SweepRow cell;
            try {
                cell = solve_cell(cfg, session, window, row.w, row.capacity_kwh);
            } catch (const std::exception& e) {
                throw StudyError("projection day " + std::to_string(day) + ", capacity " +
                                 format_double(row.capacity_kwh) + " kWh, w=" +
                                 std::to_string(row.w) + ": " + e.what());
            }
            row.charging_cost += cell.charging_cost;
            row.cyclic_loss_pct += cell.cyclic_loss_pct;
            row.degradation_cost += cell.degradation_cost;
            row.max_violation = std::max(row.max_violation, cell.max_violation);
            energy = energy_trace(cell.P, session).back();
            last_day = day;
            ++row.sessions;
        }
    });
    return out;
}

namespace {

fs::path write_csv(const fs::path& dir, const std::string& name, const Metadata& meta,
                   const std::string& body) {
    std::ostringstream out;
    write_metadata(out, meta);
    out << body;
    const auto path = dir / name;
    write_text_file(path, out.str());
    return path;
}

std::string sweep_csv(const std::vector<Sweep>& sweeps, const std::string& key_name) {
    std::ostringstream out;
    out << key_name
        << ",w,charging_cost_eur,degradation_cost_eur,cyclic_loss_pct,max_violation\n";
    for (const auto& sw : sweeps)
        for (const auto& r : sw.rows)
            out << format_double(r.key) << ',' << r.w << ',' << format_double(r.charging_cost)
                << ',' << format_double(r.degradation_cost) << ','
                << format_double(r.cyclic_loss_pct) << ',' << format_double(r.max_violation)
                << '\n';
    return out.str();
}

}  // namespace

FileList write_temperature_study(const TemperatureStudy& s, const StudyConfig& cfg,
                                 const fs::path& dir) {
    const auto meta = output_metadata(cfg, "temperature");
    FileList files;
    files.push_back(write_csv(dir, "temperature_tradeoff.csv", meta, sweep_csv(s.sweeps, "ta_c")));
    std::ostringstream loss;
    loss << "ta_c,w_over_T,cyclic_loss_pct\n";
    for (const auto& sw : s.sweeps)
        for (const auto& r : sw.rows)
            loss << format_double(sw.key) << ','
                 << format_double(static_cast<double>(r.w) / static_cast<double>(cfg.session.T))
                 << ',' << format_double(r.cyclic_loss_pct) << '\n';
    files.push_back(write_csv(dir, "temperature_capacity_loss.csv", meta, loss.str()));
    std::ostringstream slopes;
    slopes << "ta_c,loss_slope_pct,clamped_intervals\n";
    for (std::size_t i = 0; i < s.sweeps.size(); ++i) {
        slopes << format_double(s.sweeps[i].key) << ',' << format_double(s.slopes[i]) << ','
               << s.clamped_intervals[i] << '\n';
    }
    files.push_back(write_csv(dir, "temperature_slopes.csv", meta, slopes.str()));
    return files;
}

FileList write_tariff_variance_study(const TariffVarianceStudy& s, const StudyConfig& cfg,
                                     const fs::path& dir) {
    auto meta = output_metadata(cfg, "tariff-variance");
    meta.emplace_back("relative_std", format_double(cfg.tariff_relative_std));
    FileList files;
    files.push_back(
        write_csv(dir, "tariff_variance_tradeoff.csv", meta, sweep_csv(s.sweeps, "variance_scale")));
    std::ostringstream prof;
    prof << "variance_scale,interval,alpha_eur_per_kwh\n";
    for (std::size_t i = 0; i < s.tariffs.size(); ++i)
        for (std::size_t t = 0; t < s.tariffs[i].size(); ++t)
            prof << format_double(s.sweeps[i].key) << ',' << t + 1 << ','
                 << format_double(s.tariffs[i][t]) << '\n';
    files.push_back(write_csv(dir, "tariff_variance_profiles.csv", meta, prof.str()));
    return files;
}

FileList write_charger_study(const ChargerStudy& s, const StudyConfig& cfg, const fs::path& dir) {
    const auto meta = output_metadata(cfg, "charger");
    FileList files;
    files.push_back(write_csv(dir, "charger_tradeoff.csv", meta, sweep_csv(s.sweeps, "rating_kw")));
    std::ostringstream spans;
    spans << "rating_kw,charging_span_eur,degradation_span_eur\n";
    for (std::size_t i = 0; i < s.sweeps.size(); ++i) {
        spans << format_double(s.sweeps[i].key) << ',' << format_double(s.charging_span[i]) << ','
              << format_double(s.degradation_span[i]) << '\n';
    }
    files.push_back(write_csv(dir, "charger_spans.csv", meta, spans.str()));
    return files;
}

FileList write_profiles(const std::vector<ProfileExport>& profiles, const StudyConfig& cfg,
                        const fs::path& dir) {
    FileList files;
    for (const auto& p : profiles) {
        auto meta = output_metadata(cfg, "profiles");
        meta.emplace_back("w", std::to_string(p.w));
        const auto& s = p.schedule;
        std::ostringstream csv;
        csv << "interval,p_kw,energy_kwh,alpha_eur_per_kwh\n";
        for (std::size_t t = 0; t < s.P_bat.size(); ++t) {
            csv << t + 1 << ',' << format_double(s.P_bat[t]) << ','
                << format_double(s.energy_trace[t]) << ',' << format_double(p.alpha[t]) << '\n';
        }
        const std::string stem = "profile_w" + std::to_string(p.w);
        files.push_back(write_csv(dir, stem + ".csv", meta, csv.str()));

        nlohmann::ordered_json j;
        for (const auto& [k, v] : meta) j["metadata"][k] = v;
        j["w"] = p.w;
        j["charging_cost_eur"] = s.revenue_cost;
        j["degradation_cost_eur"] = s.degradation_cost;
        j["total_cost_eur"] = s.revenue_cost + s.degradation_cost;
        j["cyclic_loss_fraction"] = s.degradation_loss;
        j["terminal_energy_kwh"] = s.energy_trace.empty() ? 0.0 : s.energy_trace.back();
        j["max_violation"] = s.feasibility.max_violation();
        j["p_kw"] = s.P_bat;
        const auto path = dir / (stem + ".json");
        write_text_file(path, j.dump(2) + "\n");
        files.push_back(path);
    }
    return files;
}

FileList write_robustness(const RobustnessSummary& s, const StudyConfig& cfg, const fs::path& dir) {
    auto meta = output_metadata(cfg, "robustness");
    meta.emplace_back("draws", std::to_string(s.draws));
    meta.emplace_back("low_factor", format_double(cfg.robustness.low_factor));
    meta.emplace_back("high_factor", format_double(cfg.robustness.high_factor));
    std::ostringstream summary;
    write_summary_csv(summary, s);
    std::ostringstream samples;
    write_samples_csv(samples, s);
    return {write_csv(dir, "robustness_summary.csv", meta, summary.str()),
            write_csv(dir, "robustness_samples.csv", meta, samples.str())};
}

FileList write_projection(const ProjectionStudy& s, const StudyConfig& cfg, const fs::path& dir) {
    auto meta = output_metadata(cfg, "projection");
    meta.emplace_back("days", std::to_string(cfg.projection.days));
    meta.emplace_back("daily_drive_kwh", format_double(cfg.projection.daily_drive_kwh));
    std::ostringstream out;
    out << "capacity_kwh,w,sessions,annual_charging_cost_eur,annual_cyclic_loss_pct,"
           "annual_degradation_cost_eur,max_violation\n";
    for (const auto& r : s.rows) {
        out << format_double(r.capacity_kwh) << ',' << r.w << ',' << r.sessions << ','
            << format_double(r.charging_cost) << ',' << format_double(r.cyclic_loss_pct) << ','
            << format_double(r.degradation_cost) << ',' << format_double(r.max_violation) << '\n';
    }
    return {write_csv(dir, "projection_summary.csv", meta, out.str())};
}

std::vector<double> read_schedule_csv(const fs::path& path) {
    const auto table = read_csv(path);
    const auto it = std::find(table.header.begin(), table.header.end(), "p_kw");
    if (table.header.empty() || table.header.front() != "interval" || it == table.header.end()) {
        throw IoError(path.string() + ": expected an interval,p_kw,... schedule");
    }
    const auto col = static_cast<std::size_t>(it - table.header.begin());
    std::vector<double> P;
    for (const auto& row : table.rows) P.push_back(row[col]);
    return P;
}

}  // namespace v2g
