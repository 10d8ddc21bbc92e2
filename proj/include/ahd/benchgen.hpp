/**
 * Benchmark instances for the ordering phase: clustered customer locations on
 * a square grid, consecutive one-hour windows, truncated-normal order weights,
 * and a versioned JSON file format. Every instance is a pure function of its
 * generation parameters and seed.
 */
#pragma once

#include "ahd/core.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace ahd {

inline constexpr int kInstanceFormatVersion = 1;

class InstanceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class DepotMode { Center, TopLeftQuadrantCenter };

NLOHMANN_JSON_SERIALIZE_ENUM(DepotMode, {{DepotMode::Center, "Center"},
                                         {DepotMode::TopLeftQuadrantCenter, "TopLeftQuadrantCenter"}})

struct GenerationParams {
    double grid_side_m = 20000.0;
    int customer_count = 500;
    int cluster_count = 10;
    double uniform_fraction = 0.20;
    double cluster_spread_min_m = 500.0;
    double cluster_spread_max_m = 2000.0;
    DepotMode depot_mode = DepotMode::Center;
    int window_count = 5;
    double window_length_s = 3600.0;
    double first_window_start_s = 8 * 3600.0;
    double tour_pre_roll_s = 1800.0;
    double tour_post_roll_s = 5400.0;
    int tour_count = 30;
    double tour_capacity = 100.0;
    double speed_m_per_s = 20000.0 / 3600.0;
    double service_s = 300.0;
    double weight_mean = 7.0;
    double weight_sd = 2.0;
    double weight_lo = 1.0;
    double weight_hi = 15.0;
    std::uint64_t seed = 1;

    friend bool operator==(const GenerationParams&, const GenerationParams&) = default;
};

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(GenerationParams, grid_side_m, customer_count, cluster_count,
                                                uniform_fraction, cluster_spread_min_m, cluster_spread_max_m,
                                                depot_mode, window_count, window_length_s, first_window_start_s,
                                                tour_pre_roll_s, tour_post_roll_s, tour_count, tour_capacity,
                                                speed_m_per_s, service_s, weight_mean, weight_sd, weight_lo,
                                                weight_hi, seed)

inline void validate(const GenerationParams& p) {
    auto fail = [](const std::string& what) { throw InstanceError("invalid generation parameters: " + what); };
    if (!(p.grid_side_m > 0)) fail("grid_side_m must be positive");
    if (p.customer_count <= 0) fail("customer_count must be positive");
    if (p.cluster_count <= 0) fail("cluster_count must be positive");
    if (!(p.uniform_fraction >= 0 && p.uniform_fraction <= 1)) fail("uniform_fraction must lie in [0,1]");
    if (!(p.cluster_spread_min_m > 0 && p.cluster_spread_min_m <= p.cluster_spread_max_m))
        fail("cluster spread bounds must satisfy 0 < min <= max");
    if (p.window_count <= 0) fail("window_count must be positive");
    if (!(p.window_length_s > 0)) fail("window_length_s must be positive");
    if (!(p.tour_pre_roll_s >= 0 && p.tour_post_roll_s >= 0)) fail("tour pre/post roll must be non-negative");
    if (p.tour_count <= 0) fail("tour_count must be positive");
    if (!(p.tour_capacity > 0)) fail("tour_capacity must be positive");
    if (!(p.speed_m_per_s > 0)) fail("speed_m_per_s must be positive");
    if (!(p.service_s > 0)) fail("service_s must be positive");
    if (!(p.weight_sd >= 0)) fail("weight_sd must be non-negative");
    if (!(p.weight_lo < p.weight_hi)) fail("weight_lo must be below weight_hi");
    if (!(p.weight_lo > 0)) fail("weight_lo must be positive");
    if (!(p.weight_mean >= p.weight_lo && p.weight_mean <= p.weight_hi)) fail("weight_mean must lie in [lo, hi]");
}

/// The two benchmark families: many short tours (capacity 100, five windows)
/// and few long tours (capacity 200, ten windows); sparse regions use the
/// 20 km grid, dense ones the 10 km grid.
enum class Density { Sparse, Dense };
enum class FleetProfile { ManyShort, FewLong };

inline GenerationParams benchmark_params(Density density, FleetProfile profile, int tours, std::uint64_t seed) {
    GenerationParams p;
    p.grid_side_m = density == Density::Sparse ? 20000.0 : 10000.0;
    p.window_count = profile == FleetProfile::ManyShort ? 5 : 10;
    p.tour_capacity = profile == FleetProfile::ManyShort ? 100.0 : 200.0;
    p.tour_count = tours;
    p.seed = seed;
    // Equally many instances per depot placement across consecutive seeds.
    p.depot_mode = seed % 2 == 0 ? DepotMode::Center : DepotMode::TopLeftQuadrantCenter;
    return p;
}

struct Instance {
    int version = kInstanceFormatVersion;
    GenerationParams params;
    Location depot;
    std::vector<TimeWindow> windows;
    std::vector<VehicleConfig> fleet;
    std::vector<Customer> customers;

    EuclideanTravel travel() const { return EuclideanTravel{params.speed_m_per_s}; }
    WindowSet window_set() const { return WindowSet(windows); }
};

/// Rejection sampling from Normal(mean, sd) restricted to [lo, hi].
template <class Rng>
double sample_truncated_normal(double mean, double sd, double lo, double hi, Rng& rng) {
    if (!(lo < hi)) throw std::invalid_argument("truncation bounds must satisfy lo < hi");
    if (sd == 0.0) return mean;
    std::normal_distribution<double> normal(mean, sd);
    for (;;) {
        const double x = normal(rng);
        if (x >= lo && x <= hi) return x;
    }
}

inline Location depot_location(DepotMode mode, double side) {
    if (mode == DepotMode::Center) return {side / 2, side / 2, 0};
    return {side / 4, 3 * side / 4, 0};
}

inline Instance generate_instance(const GenerationParams& params) {
    validate(params);
    std::mt19937_64 rng(params.seed);
    const double side = params.grid_side_m;

    Instance inst;
    inst.params = params;
    inst.depot = depot_location(params.depot_mode, side);

    for (int k = 0; k < params.window_count; ++k) {
        const double start = params.first_window_start_s + k * params.window_length_s;
        inst.windows.push_back(TimeWindow{WindowId(static_cast<std::uint32_t>(k)), start, start + params.window_length_s});
    }
    const double tour_start = inst.windows.front().start_s - params.tour_pre_roll_s;
    const double tour_end = inst.windows.back().end_s + params.tour_post_roll_s;
    for (int k = 0; k < params.tour_count; ++k)
        inst.fleet.push_back(VehicleConfig{TourId(static_cast<std::uint32_t>(k)), params.tour_capacity, tour_start,
                                           tour_end, inst.depot, inst.depot});

    std::uniform_real_distribution<double> on_grid(0.0, side);
    std::uniform_real_distribution<double> spread(params.cluster_spread_min_m, params.cluster_spread_max_m);
    struct Cluster {
        double cx, cy, sx, sy;
    };
    std::vector<Cluster> clusters;
    for (int c = 0; c < params.cluster_count; ++c) {
        const double cx = on_grid(rng);
        const double cy = on_grid(rng);
        const double sx = spread(rng);
        const double sy = spread(rng);
        clusters.push_back({cx, cy, sx, sy});
    }

    const auto p = static_cast<std::size_t>(params.customer_count);
    const auto uniform_count =
        std::min(p, static_cast<std::size_t>(std::ceil(params.uniform_fraction * static_cast<double>(p) - 1e-9)));
    std::vector<Location> spots;
    spots.reserve(p);
    for (std::size_t i = 0; i < uniform_count; ++i) {
        const double x = on_grid(rng);
        const double y = on_grid(rng);
        spots.push_back({x, y, 0});
    }
    std::uniform_int_distribution<int> pick_cluster(0, params.cluster_count - 1);
    std::normal_distribution<double> unit(0.0, 1.0);
    for (std::size_t i = uniform_count; i < p; ++i) {
        const auto& c = clusters[static_cast<std::size_t>(pick_cluster(rng))];
        double x = 0.0;
        double y = 0.0;
        do {
            x = c.cx + c.sx * unit(rng);
            y = c.cy + c.sy * unit(rng);
        } while (x < 0.0 || x > side || y < 0.0 || y > side);
        spots.push_back({x, y, 0});
    }
    std::shuffle(spots.begin(), spots.end(), rng);

    std::uniform_int_distribution<int> pick_window(0, params.window_count - 1);
    for (std::size_t i = 0; i < p; ++i) {
        Customer c;
        c.id = CustomerId(static_cast<std::uint32_t>(i));
        c.location = spots[i];
        c.location.node = static_cast<std::uint32_t>(i + 1);
        c.weight = sample_truncated_normal(params.weight_mean, params.weight_sd, params.weight_lo, params.weight_hi, rng);
        c.service_s = params.service_s;
        c.desired_window = WindowId(static_cast<std::uint32_t>(pick_window(rng)));
        inst.customers.push_back(std::move(c));
    }
    return inst;
}

/// Structural checks applied to every instance read from disk.
inline void validate(const Instance& inst) {
    if (inst.version != kInstanceFormatVersion)
        throw InstanceError("unsupported instance format version " + std::to_string(inst.version));
    const double side = inst.params.grid_side_m;
    auto inside = [side](const Location& l) { return l.x_m >= 0 && l.x_m <= side && l.y_m >= 0 && l.y_m <= side; };
    if (!inside(inst.depot)) throw InstanceError("depot lies outside the grid");
    WindowSet windows;
    try {
        windows = WindowSet(inst.windows);
    } catch (const std::invalid_argument& e) {
        throw InstanceError(e.what());
    }
    if (inst.fleet.empty()) throw InstanceError("fleet is empty");
    for (const auto& v : inst.fleet) {
        if (!(v.capacity > 0)) throw InstanceError("vehicle " + std::to_string(raw(v.id)) + " has no capacity");
        if (!(v.start_s < v.end_s))
            throw InstanceError("vehicle " + std::to_string(raw(v.id)) + " has start >= end");
    }
    for (const auto& c : inst.customers) {
        const auto tag = "customer " + std::to_string(raw(c.id));
        if (!inside(c.location)) throw InstanceError(tag + " lies outside the grid");
        if (!(c.weight > 0)) throw InstanceError(tag + " has non-positive weight");
        if (!(c.service_s > 0)) throw InstanceError(tag + " has non-positive service time");
        if (c.desired_window && !windows.rank_of(*c.desired_window))
            throw InstanceError(tag + " desires an unknown window");
    }
}

inline nlohmann::json instance_to_json(const Instance& inst) {
    using nlohmann::json;
    json j;
    j["version"] = inst.version;
    j["params"] = inst.params;
    j["depot"] = {{"x_m", inst.depot.x_m}, {"y_m", inst.depot.y_m}};
    j["windows"] = json::array();
    for (const auto& w : inst.windows) j["windows"].push_back({{"id", raw(w.id)}, {"start_s", w.start_s}, {"end_s", w.end_s}});
    j["fleet"] = json::array();
    for (const auto& v : inst.fleet)
        j["fleet"].push_back({{"id", raw(v.id)}, {"capacity", v.capacity}, {"start_s", v.start_s}, {"end_s", v.end_s}});
    j["customers"] = json::array();
    for (const auto& c : inst.customers) {
        json cj{{"id", raw(c.id)},
                {"x_m", c.location.x_m},
                {"y_m", c.location.y_m},
                {"weight", c.weight},
                {"service_s", c.service_s}};
        cj["desired_window"] = c.desired_window ? json(raw(*c.desired_window)) : json(nullptr);
        j["customers"].push_back(std::move(cj));
    }
    return j;
}

/// Parses and validates an instance document.
inline Instance instance_from_json(const nlohmann::json& j) {
    Instance inst;
    try {
        inst.version = j.at("version").get<int>();
        if (inst.version != kInstanceFormatVersion)
            throw InstanceError("unsupported instance format version " + std::to_string(inst.version));
        inst.params = j.at("params").get<GenerationParams>();
        inst.depot = {j.at("depot").at("x_m").get<double>(), j.at("depot").at("y_m").get<double>(), 0};
        for (const auto& w : j.at("windows"))
            inst.windows.push_back(
                {WindowId(w.at("id").get<std::uint32_t>()), w.at("start_s").get<double>(), w.at("end_s").get<double>()});
        for (const auto& v : j.at("fleet"))
            inst.fleet.push_back({TourId(v.at("id").get<std::uint32_t>()), v.at("capacity").get<double>(),
                                  v.at("start_s").get<double>(), v.at("end_s").get<double>(), inst.depot, inst.depot});
        std::uint32_t node = 1;
        for (const auto& cj : j.at("customers")) {
            Customer c;
            c.id = CustomerId(cj.at("id").get<std::uint32_t>());
            c.location = {cj.at("x_m").get<double>(), cj.at("y_m").get<double>(), node++};
            c.weight = cj.at("weight").get<double>();
            c.service_s = cj.at("service_s").get<double>();
            if (cj.contains("desired_window") && !cj.at("desired_window").is_null())
                c.desired_window = WindowId(cj.at("desired_window").get<std::uint32_t>());
            inst.customers.push_back(std::move(c));
        }
    } catch (const nlohmann::json::exception& e) {
        throw InstanceError(std::string("malformed instance: ") + e.what());
    }
    validate(inst);
    return inst;
}

inline std::string serialize_instance(const Instance& inst) { return instance_to_json(inst).dump(2) + "\n"; }

inline void write_instance(const std::string& path, const Instance& inst) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InstanceError("cannot open " + path + " for writing");
    out << serialize_instance(inst);
    if (!out) throw InstanceError("failed writing " + path);
}

inline Instance read_instance(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InstanceError("cannot open " + path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw InstanceError(std::string("malformed instance: ") + e.what());
    }
    return instance_from_json(j);
}

}  // namespace ahd
