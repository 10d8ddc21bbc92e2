/**
 * Replays an instance's arrival stream against the ordering engine under the
 * one-desired-window choice model and aggregates per-run metrics, plus a
 * batch runner that writes per-configuration CSV files and an aligned report.
 */
#pragma once

#include "ahd/benchgen.hpp"
#include "ahd/core.hpp"
#include "ahd/local_search.hpp"
#include "ahd/ordering.hpp"

#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

namespace ahd {

enum class ImprovePolicy { None, Local, Hybrid };

NLOHMANN_JSON_SERIALIZE_ENUM(ImprovePolicy,
                             {{ImprovePolicy::None, "none"}, {ImprovePolicy::Local, "local"}, {ImprovePolicy::Hybrid, "hybrid"}})

inline const char* to_string(ImprovePolicy p) noexcept {
    switch (p) {
        case ImprovePolicy::None: return "none";
        case ImprovePolicy::Local: return "local";
        case ImprovePolicy::Hybrid: return "hybrid";
    }
    return "?";
}

inline ImprovePolicy parse_policy(const std::string& s) {
    if (s == "none") return ImprovePolicy::None;
    if (s == "local") return ImprovePolicy::Local;
    if (s == "hybrid") return ImprovePolicy::Hybrid;
    throw std::invalid_argument("unknown improvement policy '" + s + "'");
}

struct SimulationOptions {
    ImprovePolicy policy = ImprovePolicy::Local;
    int improve_every = 1;
    std::chrono::nanoseconds exact_budget = kDefaultTourBudget;
    bool record_timing = true;
    /// Run the full schedule validation after every insertion and improvement.
    bool check_invariants = false;
};

struct RunMetrics {
    double avg_offered_windows = 0.0;
    std::size_t total_inserted = 0;
    double avg_get_tws_ms = 0.0;
    double avg_improvement_ms = 0.0;
    double avg_obj_reduction_pct = 0.0;
    double avg_insertion_cost_recovered_pct = 0.0;
    double avg_exact_solves = 0.0;

    friend bool operator==(const RunMetrics&, const RunMetrics&) = default;
};

/// Metrics plus the diagnostics the harness's own invariants need.
struct SimulationResult {
    RunMetrics metrics;
    std::size_t arrivals = 0;
    std::size_t improvement_steps = 0;
    double final_objective = 0.0;
    /// Largest objective increase over any single improvement step (<= 0 when monotone).
    double worst_step_increase = -std::numeric_limits<double>::infinity();
    /// Customers inserted although their desired window was not offered, or
    /// rejected although it was; must stay zero.
    std::size_t choice_violations = 0;
    /// Exact solves that stopped at the wall-clock budget.
    std::size_t exact_timeouts = 0;
    std::optional<std::string> invariant_failure;
    Schedule schedule;
};

inline std::vector<VehicleConfig> fleet_of(const Instance& inst) {
    auto fleet = inst.fleet;
    for (auto& v : fleet) {
        v.start_depot = inst.depot;
        v.end_depot = inst.depot;
    }
    return fleet;
}

inline SimulationResult run_simulation(const Instance& inst, const SimulationOptions& options = {}) {
    using Clock = std::chrono::steady_clock;
    const auto travel = inst.travel();
    if (options.improve_every < 1) throw std::invalid_argument("improve_every must be at least 1");

    SimulationResult out;
    out.schedule = initialize_schedule(fleet_of(inst), inst.window_set(), travel);
    auto& schedule = out.schedule;

    double offered_sum = 0.0;
    double get_tws_ms = 0.0;
    double improvement_ms = 0.0;
    double reduction_pct_sum = 0.0;
    double reduction_sum = 0.0;
    double insertion_cost_sum = 0.0;
    std::size_t exact_solves = 0;
    double pending_delta = 0.0;
    int since_improvement = 0;

    auto check = [&](const char* when) {
        if (!options.check_invariants || out.invariant_failure) return;
        if (auto problem = validate_schedule(schedule, travel)) out.invariant_failure = std::string(when) + ": " + *problem;
    };

    for (const auto& customer : inst.customers) {
        ++out.arrivals;
        const auto t0 = Clock::now();
        const auto offers = get_time_windows(schedule, customer, travel);
        const auto t1 = Clock::now();
        get_tws_ms += std::chrono::duration<double, std::milli>(t1 - t0).count();
        offered_sum += static_cast<double>(offers.windows.size());

        const Offer* chosen = customer.desired_window ? offers.find(*customer.desired_window) : nullptr;
        if (!chosen) continue;

        // inserted straight from the offer, no double-check
        apply_placement(schedule, chosen->best, make_stop(customer, schedule.windows(), chosen->window), travel);
        if (!schedule.contains(customer.id)) ++out.choice_violations;
        ++out.metrics.total_inserted;
        pending_delta += chosen->best.delta_s;
        check("after insertion");

        if (options.policy == ImprovePolicy::None || ++since_improvement < options.improve_every) continue;
        since_improvement = 0;

        const auto s0 = Clock::now();
        ImprovementStats stats;
        if (options.policy == ImprovePolicy::Local) {
            stats = improve_local(schedule, travel);
            schedule.take_dirty();
        } else {
            stats = improve_hybrid(schedule, travel, options.exact_budget);
        }
        const auto s1 = Clock::now();
        improvement_ms += std::chrono::duration<double, std::milli>(s1 - s0).count();
        ++out.improvement_steps;
        exact_solves += stats.exact_solves;
        out.exact_timeouts += stats.exact_timeouts;

        const double reduction = stats.reduction();
        out.worst_step_increase = std::max(out.worst_step_increase, -reduction);
        if (stats.travel_time_before > 0.0) reduction_pct_sum += 100.0 * reduction / stats.travel_time_before;
        reduction_sum += reduction;
        insertion_cost_sum += pending_delta;
        pending_delta = 0.0;
        check("after improvement");
    }

    auto& m = out.metrics;
    if (out.arrivals > 0) {
        m.avg_offered_windows = offered_sum / static_cast<double>(out.arrivals);
        m.avg_get_tws_ms = options.record_timing ? get_tws_ms / static_cast<double>(out.arrivals) : 0.0;
    }
    if (out.improvement_steps > 0) {
        const auto steps = static_cast<double>(out.improvement_steps);
        m.avg_improvement_ms = options.record_timing ? improvement_ms / steps : 0.0;
        m.avg_obj_reduction_pct = reduction_pct_sum / steps;
        m.avg_exact_solves = static_cast<double>(exact_solves) / steps;
    }
    // summed reduction over summed insertion cost of the improvement steps
    if (insertion_cost_sum > 0.0) m.avg_insertion_cost_recovered_pct = 100.0 * reduction_sum / insertion_cost_sum;
    out.final_objective = total_travel_time(schedule, travel);
    return out;
}

// ---------------------------------------------------------------------------
// Batch runs

/// One column of a report: a generation template plus a simulation policy.
struct BatchConfig {
    std::string name;
    GenerationParams params;
    /// Alternate depot placement by seed parity, as the benchmark sets do.
    bool alternate_depot = true;
    ImprovePolicy policy = ImprovePolicy::Local;
    int improve_every = 1;
};

struct BatchRow {
    std::string config;
    std::uint64_t seed = 0;
    GenerationParams params;
    ImprovePolicy policy = ImprovePolicy::Local;
    int improve_every = 1;
    RunMetrics metrics;
};

struct BatchReport {
    std::vector<BatchConfig> configs;
    std::vector<std::vector<BatchRow>> rows;  // per config
    std::vector<RunMetrics> means;            // per config
};

inline RunMetrics mean_of(const std::vector<BatchRow>& rows) {
    RunMetrics m;
    if (rows.empty()) return m;
    double inserted = 0.0;
    for (const auto& r : rows) {
        m.avg_offered_windows += r.metrics.avg_offered_windows;
        inserted += static_cast<double>(r.metrics.total_inserted);
        m.avg_get_tws_ms += r.metrics.avg_get_tws_ms;
        m.avg_improvement_ms += r.metrics.avg_improvement_ms;
        m.avg_obj_reduction_pct += r.metrics.avg_obj_reduction_pct;
        m.avg_insertion_cost_recovered_pct += r.metrics.avg_insertion_cost_recovered_pct;
        m.avg_exact_solves += r.metrics.avg_exact_solves;
    }
    const auto n = static_cast<double>(rows.size());
    m.avg_offered_windows /= n;
    m.total_inserted = static_cast<std::size_t>(std::llround(inserted / n));
    m.avg_get_tws_ms /= n;
    m.avg_improvement_ms /= n;
    m.avg_obj_reduction_pct /= n;
    m.avg_insertion_cost_recovered_pct /= n;
    m.avg_exact_solves /= n;
    return m;
}

inline GenerationParams params_for_seed(const BatchConfig& config, std::uint64_t seed) {
    auto p = config.params;
    p.seed = seed;
    if (config.alternate_depot) p.depot_mode = seed % 2 == 0 ? DepotMode::Center : DepotMode::TopLeftQuadrantCenter;
    return p;
}

inline BatchReport run_batch(const std::vector<BatchConfig>& configs, const std::vector<std::uint64_t>& seeds,
                             bool record_timing = true) {
    BatchReport report;
    report.configs = configs;
    for (const auto& config : configs) {
        std::vector<BatchRow> rows;
        for (auto seed : seeds) {
            const auto params = params_for_seed(config, seed);
            const auto inst = generate_instance(params);
            SimulationOptions opts;
            opts.policy = config.policy;
            opts.improve_every = config.improve_every;
            opts.record_timing = record_timing;
            rows.push_back({config.name, seed, params, config.policy, config.improve_every, run_simulation(inst, opts).metrics});
        }
        report.means.push_back(mean_of(rows));
        report.rows.push_back(std::move(rows));
    }
    return report;
}

inline std::string format_number(double v, int precision) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(precision) << v;
    return os.str();
}

inline const char* kCsvHeader =
    "config,seed,grid_side_m,customers,tours,capacity,windows,depot_mode,policy,every,"
    "avg_offered_windows,total_inserted,avg_get_tws_ms,avg_improvement_ms,avg_obj_reduction_pct,"
    "avg_insertion_cost_recovered_pct,avg_exact_solves";

inline std::string csv_line(const std::string& config, const std::string& seed, const GenerationParams& p,
                            ImprovePolicy policy, int every, const RunMetrics& m) {
    std::ostringstream os;
    os << config << ',' << seed << ',' << format_number(p.grid_side_m, 0) << ',' << p.customer_count << ','
       << p.tour_count << ',' << format_number(p.tour_capacity, 0) << ',' << p.window_count << ','
       << nlohmann::json(p.depot_mode).get<std::string>() << ',' << to_string(policy) << ',' << every << ','
       << format_number(m.avg_offered_windows, 4) << ',' << m.total_inserted << ',' << format_number(m.avg_get_tws_ms, 4)
       << ',' << format_number(m.avg_improvement_ms, 3) << ',' << format_number(m.avg_obj_reduction_pct, 4) << ','
       << format_number(m.avg_insertion_cost_recovered_pct, 3) << ',' << format_number(m.avg_exact_solves, 3);
    return os.str();
}

/// One CSV per configuration: a row per seed followed by a `mean` row.
inline std::string config_csv(const BatchReport& report, std::size_t index) {
    const auto& config = report.configs[index];
    std::ostringstream os;
    os << kCsvHeader << '\n';
    for (const auto& r : report.rows[index])
        os << csv_line(r.config, std::to_string(r.seed), r.params, r.policy, r.improve_every, r.metrics) << '\n';
    auto mean_params = config.params;
    os << csv_line(config.name, "mean", mean_params, config.policy, config.improve_every, report.means[index]) << '\n';
    return os.str();
}

/// Aligned text table: one column per configuration, rows in the order the
/// Get TWs and Improvement result tables use.
inline std::string report_table(const BatchReport& report) {
    std::vector<std::pair<std::string, std::vector<std::string>>> rows;
    auto add = [&](std::string label, auto cell) {
        std::vector<std::string> cells;
        for (std::size_t i = 0; i < report.configs.size(); ++i) cells.push_back(cell(i));
        rows.emplace_back(std::move(label), std::move(cells));
    };
    add("Configuration", [&](std::size_t i) { return report.configs[i].name; });
    add("Grid (km)", [&](std::size_t i) { return format_number(report.configs[i].params.grid_side_m / 1000.0, 0); });
    add("Capacity", [&](std::size_t i) { return format_number(report.configs[i].params.tour_capacity, 0); });
    add("Time windows", [&](std::size_t i) { return std::to_string(report.configs[i].params.window_count); });
    add("Tours", [&](std::size_t i) { return std::to_string(report.configs[i].params.tour_count); });
    add("Improvement", [&](std::size_t i) { return std::string(to_string(report.configs[i].policy)); });
    add("Instances", [&](std::size_t i) { return std::to_string(report.rows[i].size()); });
    add("Get TWs runtime (ms)", [&](std::size_t i) { return format_number(report.means[i].avg_get_tws_ms, 3); });
    add("Time windows offered (avg.)", [&](std::size_t i) { return format_number(report.means[i].avg_offered_windows, 2); });
    add("Total customers inserted (avg.)", [&](std::size_t i) {
        double s = 0;
        for (const auto& r : report.rows[i]) s += static_cast<double>(r.metrics.total_inserted);
        return format_number(report.rows[i].empty() ? 0.0 : s / static_cast<double>(report.rows[i].size()), 1);
    });
    add("Improvement runtime (ms)", [&](std::size_t i) { return format_number(report.means[i].avg_improvement_ms, 1); });
    add("Improvement over insertion step (%)", [&](std::size_t i) { return format_number(report.means[i].avg_obj_reduction_pct, 2); });
    add("Improvement of cost of insertion (%)",
        [&](std::size_t i) { return format_number(report.means[i].avg_insertion_cost_recovered_pct, 2); });
    add("Exact tour solves (avg.)", [&](std::size_t i) { return format_number(report.means[i].avg_exact_solves, 2); });

    std::size_t label_w = 0;
    std::vector<std::size_t> col_w(report.configs.size(), 0);
    for (const auto& [label, cells] : rows) {
        label_w = std::max(label_w, label.size());
        for (std::size_t i = 0; i < cells.size(); ++i) col_w[i] = std::max(col_w[i], cells[i].size());
    }
    std::ostringstream os;
    for (std::size_t r = 0; r < rows.size(); ++r) {
        os << std::left << std::setw(static_cast<int>(label_w)) << rows[r].first;
        for (std::size_t i = 0; i < rows[r].second.size(); ++i)
            os << " | " << std::right << std::setw(static_cast<int>(col_w[i])) << rows[r].second[i];
        os << '\n';
        if (r == 0 || r == 6) {
            os << std::string(label_w, '-');
            for (auto w : col_w) os << "-+-" << std::string(w, '-');
            os << '\n';
        }
    }
    return os.str();
}

inline void write_batch(const BatchReport& report, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    std::ofstream summary(dir / "summary.csv", std::ios::binary);
    summary << kCsvHeader << '\n';
    for (std::size_t i = 0; i < report.configs.size(); ++i) {
        std::ofstream csv(dir / (report.configs[i].name + ".csv"), std::ios::binary);
        csv << config_csv(report, i);
        summary << csv_line(report.configs[i].name, "mean", report.configs[i].params, report.configs[i].policy,
                            report.configs[i].improve_every, report.means[i])
                << '\n';
    }
    std::ofstream table(dir / "report.txt", std::ios::binary);
    table << report_table(report);
}

/// Batch configuration file:
/// {"base_seed": 1, "configurations": [{"name": ..., "params": {...}, "improve": "local", "every": 1}]}
/// `params` entries override the generator defaults.
struct BatchFile {
    std::uint64_t base_seed = 1;
    std::vector<BatchConfig> configs;
};

inline BatchFile parse_batch_file(const nlohmann::json& j) {
    BatchFile out;
    out.base_seed = j.value("base_seed", std::uint64_t{1});
    for (const auto& c : j.at("configurations")) {
        BatchConfig config;
        config.name = c.at("name").get<std::string>();
        if (config.name.empty() || config.name.find_first_of("/\\,") != std::string::npos)
            throw std::invalid_argument("configuration name '" + config.name + "' is not a plain file name");
        config.params = c.value("params", nlohmann::json::object()).get<GenerationParams>();
        config.alternate_depot = !c.value("params", nlohmann::json::object()).contains("depot_mode");
        config.policy = parse_policy(c.value("improve", std::string("local")));
        config.improve_every = c.value("every", 1);
        if (config.improve_every < 1) throw std::invalid_argument("every must be at least 1");
        validate(config.params);
        out.configs.push_back(std::move(config));
    }
    return out;
}

}  // namespace ahd
