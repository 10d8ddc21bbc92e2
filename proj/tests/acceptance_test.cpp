// Acceptance suite: one test per criterion, each reported as a single
// "ACCEPTANCE <name>: PASS|FAIL" line.
#include <gtest/gtest.h>

#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>

#include "ahd/simulation.hpp"
#include "service_support.hpp"
#include "support.hpp"

namespace ahd {
namespace {

constexpr int kInstances = 20;

struct ConfigRuns {
    std::string name;
    std::vector<SimulationResult> runs;

    double mean(double RunMetrics::*field) const {
        double s = 0;
        for (const auto& r : runs) s += r.metrics.*field;
        return s / static_cast<double>(runs.size());
    }
    std::size_t timeouts() const {
        std::size_t n = 0;
        for (const auto& r : runs) n += r.exact_timeouts;
        return n;
    }
    double mean_inserted() const {
        double s = 0;
        for (const auto& r : runs) s += static_cast<double>(r.metrics.total_inserted);
        return s / static_cast<double>(runs.size());
    }
};

ConfigRuns simulate(const std::string& name, Density density, FleetProfile profile, int tours, ImprovePolicy policy) {
    ConfigRuns out{name, {}};
    for (int seed = 1; seed <= kInstances; ++seed) {
        const auto inst = generate_instance(benchmark_params(density, profile, tours, static_cast<std::uint64_t>(seed)));
        SimulationOptions opts;
        opts.policy = policy;
        out.runs.push_back(run_simulation(inst, opts));
        out.runs.back().schedule = {};
    }
    std::cout << "  [" << name << "] offered " << std::fixed << std::setprecision(3)
              << out.mean(&RunMetrics::avg_offered_windows) << ", inserted " << out.mean_inserted() << ", get_tws "
              << out.mean(&RunMetrics::avg_get_tws_ms) << " ms, reduction " << out.mean(&RunMetrics::avg_obj_reduction_pct)
              << " %, recovered " << out.mean(&RunMetrics::avg_insertion_cost_recovered_pct) << " %, exact solves "
              << out.mean(&RunMetrics::avg_exact_solves) << ", improvement " << out.mean(&RunMetrics::avg_improvement_ms)
              << " ms, exact timeouts " << out.timeouts() << std::endl;
    return out;
}

// The benchmark simulations are shared by several criteria and run once.
const std::map<std::string, ConfigRuns>& benchmark_runs() {
    static const auto runs = [] {
        std::map<std::string, ConfigRuns> m;
        auto add = [&](ConfigRuns r) { m.emplace(r.name, std::move(r)); };
        add(simulate("sparse30-local", Density::Sparse, FleetProfile::ManyShort, 30, ImprovePolicy::Local));
        add(simulate("sparse30-hybrid", Density::Sparse, FleetProfile::ManyShort, 30, ImprovePolicy::Hybrid));
        add(simulate("sparse40-local", Density::Sparse, FleetProfile::ManyShort, 40, ImprovePolicy::Local));
        add(simulate("dense10-local", Density::Dense, FleetProfile::FewLong, 10, ImprovePolicy::Local));
        add(simulate("dense10-hybrid", Density::Dense, FleetProfile::FewLong, 10, ImprovePolicy::Hybrid));
        return m;
    }();
    return runs;
}

TEST(Acceptance, GetTimeWindowsLatency) {
    for (const auto& [name, runs] : benchmark_runs()) {
        ASSERT_EQ(runs.runs.size(), static_cast<std::size_t>(kInstances));
        EXPECT_LE(runs.mean(&RunMetrics::avg_get_tws_ms), 5.0) << name;
    }
}

TEST(Acceptance, InsertionTablesReproduced) {
    const auto& runs = benchmark_runs();
    for (const char* name : {"sparse30-local", "sparse30-hybrid"}) {
        const auto& r = runs.at(name);
        EXPECT_NEAR(r.mean(&RunMetrics::avg_offered_windows), 4.29, 0.3) << name;
        EXPECT_NEAR(r.mean_inserted(), 428.9, 0.05 * 428.9) << name;
    }
    for (const auto& run : runs.at("sparse40-local").runs) {
        EXPECT_EQ(run.metrics.avg_offered_windows, 5.0);
        EXPECT_EQ(run.metrics.total_inserted, 500u);
    }
    for (const char* name : {"dense10-local", "dense10-hybrid"})
        EXPECT_NEAR(runs.at(name).mean_inserted(), 287.8, 0.05 * 287.8) << name;
}

TEST(Acceptance, ImprovementTablesReproduced) {
    const auto& runs = benchmark_runs();
    for (const char* name : {"sparse30-local", "sparse30-hybrid", "dense10-local", "dense10-hybrid"}) {
        const auto& r = runs.at(name);
        const double reduction = r.mean(&RunMetrics::avg_obj_reduction_pct);
        const double recovered = r.mean(&RunMetrics::avg_insertion_cost_recovered_pct);
        EXPECT_GE(reduction, 0.5) << name;
        EXPECT_LE(reduction, 1.2) << name;
        EXPECT_GE(recovered, 45.0) << name;
        EXPECT_LE(recovered, 85.0) << name;
    }
    for (const char* set : {"sparse30", "dense10"}) {
        const auto& local = runs.at(std::string(set) + "-local");
        const auto& hybrid = runs.at(std::string(set) + "-hybrid");
        EXPECT_GT(hybrid.mean(&RunMetrics::avg_insertion_cost_recovered_pct),
                  local.mean(&RunMetrics::avg_insertion_cost_recovered_pct))
            << set;
        const double solves = hybrid.mean(&RunMetrics::avg_exact_solves);
        EXPECT_GE(solves, 1.5) << set;
        EXPECT_LE(solves, 5.0) << set;
    }
}

TEST(Acceptance, OracleInsertionConditions) {
    std::mt19937_64 rng(101);
    const auto ws = testing::hourly_windows(5);
    const EuclideanTravel travel;
    const VehicleConfig v{TourId(0), 100, 7.5 * 3600.0, 14.5 * 3600.0, {10000, 10000}, {10000, 10000}};
    std::uint32_t next = 0;
    int triples = 0;
    int mismatches = 0;
    int feasible = 0;
    while (triples < 10000) {
        const auto t = testing::random_feasible_tour(rng, v, ws, 1 + rng() % 15, travel, 20000, next);
        for (int k = 0; k < 20 && triples < 10000; ++k, ++triples) {
            const auto s = testing::random_stop(rng, ws, next++, 20000);
            const std::size_t gap = rng() % (t.size() + 1);
            auto stops = t.stops();
            stops.insert(stops.begin() + static_cast<std::ptrdiff_t>(gap), s);
            const bool oracle = testing::route_feasible(v, stops, travel);
            const bool fast = insertion_time_feasible(t, gap, s, travel) && insertion_capacity_feasible(t, s);
            mismatches += oracle != fast;
            feasible += oracle;
        }
    }
    std::cout << "  " << triples << " triples, " << feasible << " feasible, " << mismatches << " mismatches" << std::endl;
    EXPECT_EQ(mismatches, 0);
    EXPECT_GT(feasible, 500);
}

TEST(Acceptance, OracleIncrementalCaches) {
    std::mt19937_64 rng(202);
    const auto ws = testing::hourly_windows(5);
    const EuclideanTravel travel;
    const VehicleConfig v{TourId(0), 100, 7.5 * 3600.0, 14.5 * 3600.0, {10000, 10000}, {10000, 10000}};
    std::uint32_t next = 0;
    int mismatches = 0;
    for (int seq = 0; seq < 1000; ++seq) {
        Tour t(v);
        t.refresh(travel);
        for (int step = 0; step < 25; ++step) {
            const auto op = rng() % 4;
            if (op == 0 && !t.empty()) {
                t.remove(1 + rng() % t.size(), travel);
            } else if (op == 1 && t.size() >= 2) {
                // exchange with a same-window stranger, kept only when feasible
                const std::size_t pos = 1 + rng() % t.size();
                auto s = testing::random_stop(rng, ws, next++, 20000);
                s.window = t.stop(pos).window;
                s.window_rank = t.stop(pos).window_rank;
                auto trial = t.stops();
                trial[pos - 1] = s;
                if (testing::route_feasible(v, trial, travel)) t.replace(pos, s, travel);
            } else {
                const auto s = testing::random_stop(rng, ws, next++, 20000);
                const std::size_t gap = rng() % (t.size() + 1);
                if (insertion_capacity_feasible(t, s) && insertion_time_feasible(t, gap, s, travel))
                    t.insert(gap, s, travel);
            }
            const auto r = testing::recompute(v, t.stops(), travel);
            if (t.alphas() != r.alpha || t.betas() != r.beta || std::abs(t.load() - r.load) > 1e-9) ++mismatches;
        }
    }
    EXPECT_EQ(mismatches, 0);
}

TEST(Acceptance, OracleExactTourSolver) {
    std::mt19937_64 rng(303);
    const auto ws = testing::hourly_windows(3);
    const EuclideanTravel travel;
    const VehicleConfig v{TourId(0), 200, 7.5 * 3600.0, 13 * 3600.0, {3000, 3000}, {3000, 3000}};
    std::uint32_t next = 0;
    int tours = 0;
    int mismatches = 0;
    std::map<std::size_t, int> sizes;
    while (tours < 200) {
        const auto t = testing::random_feasible_tour(rng, v, ws, 2 + rng() % 8, travel, 6000, next);
        if (t.size() < 2) continue;
        ++tours;
        ++sizes[t.size()];
        bool any = false;
        const double oracle = testing::min_over_orders(v, t.stops(), travel, any);
        const auto r = optimize_tour(t, travel, std::chrono::seconds(10));
        if (!any || r.status != TourStatus::Optimal || std::abs(r.travel_seconds - oracle) > 1e-6) ++mismatches;
    }
    std::cout << "  tour sizes:";
    for (const auto& [n, count] : sizes) std::cout << ' ' << n << 'x' << count;
    std::cout << std::endl;
    EXPECT_EQ(mismatches, 0);
    EXPECT_GE(sizes[9], 10);
}

TEST(Acceptance, OracleLocalSearchTermination) {
    int checked = 0;
    for (std::uint64_t seed = 1; seed <= 30; ++seed) {
        auto p = testing::small_params(20 + static_cast<int>(seed % 21), 2 + static_cast<int>(seed % 4), seed);
        p.tour_capacity = 60 + 10.0 * static_cast<double>(seed % 5);
        p.grid_side_m = seed % 2 ? 20000 : 10000;
        const auto inst = generate_instance(p);
        const auto travel = inst.travel();
        auto s = initialize_schedule(fleet_of(inst), inst.window_set(), travel);
        for (const auto& c : inst.customers) set_time_window(s, c, *c.desired_window, travel);
        const double before = total_travel_time(s, travel);
        improve_local(s, travel);
        EXPECT_LE(total_travel_time(s, travel), before + 1e-6) << seed;
        EXPECT_FALSE(validate_schedule(s, travel)) << seed;
        EXPECT_GE(testing::best_neighbor_delta(s, travel), -kMinImprovement) << "seed " << seed;
        ++checked;
    }
    EXPECT_EQ(checked, 30);
}

TEST(Acceptance, MonotoneImprovementSteps) {
    double worst = -std::numeric_limits<double>::infinity();
    std::size_t steps = 0;
    for (const auto& [name, runs] : benchmark_runs())
        for (const auto& r : runs.runs) {
            worst = std::max(worst, r.worst_step_increase);
            steps += r.improvement_steps;
        }
    for (auto policy : {ImprovePolicy::Local, ImprovePolicy::Hybrid})
        for (int every : {1, 5}) {
            SimulationOptions opts;
            opts.policy = policy;
            opts.improve_every = every;
            opts.check_invariants = true;
            const auto r = run_simulation(generate_instance(testing::small_params(200, 8, 40 + every)), opts);
            EXPECT_FALSE(r.invariant_failure) << *r.invariant_failure;
            worst = std::max(worst, r.worst_step_increase);
            steps += r.improvement_steps;
        }
    std::cout << "  " << steps << " improvement steps, largest increase " << worst << " s" << std::endl;
    EXPECT_LE(worst, 1e-6);
}

TEST(Acceptance, Determinism) {
    const auto dir = std::filesystem::temp_directory_path() / "ahd_acceptance";
    std::filesystem::create_directories(dir);
    auto slurp = [](const std::filesystem::path& p) {
        std::ifstream in(p, std::ios::binary);
        return std::string(std::istreambuf_iterator<char>(in), {});
    };
    for (auto [density, profile, tours] : {std::tuple{Density::Sparse, FleetProfile::ManyShort, 30},
                                           std::tuple{Density::Dense, FleetProfile::FewLong, 10}}) {
        for (std::uint64_t seed : {3u, 4u}) {
            const auto params = benchmark_params(density, profile, tours, seed);
            write_instance((dir / "a.json").string(), generate_instance(params));
            write_instance((dir / "b.json").string(), generate_instance(params));
            const auto a = slurp(dir / "a.json");
            EXPECT_FALSE(a.empty());
            EXPECT_EQ(a, slurp(dir / "b.json"));

            const auto inst = read_instance((dir / "a.json").string());
            for (auto policy : {ImprovePolicy::None, ImprovePolicy::Local, ImprovePolicy::Hybrid}) {
                SimulationOptions opts;
                opts.policy = policy;
                opts.record_timing = false;
                const auto first = run_simulation(inst, opts);
                EXPECT_EQ(first.metrics, run_simulation(generate_instance(params), opts).metrics)
                    << to_string(policy) << " seed " << seed;
                EXPECT_EQ(first.exact_timeouts, 0u);
            }
        }
    }
}

TEST(Acceptance, ServiceReplayAndRace) {
    const auto log = testing::fresh_log("acceptance");
    {
        BookingService svc(log);
        ASSERT_EQ(svc.init(testing::session_body(10, 30, 100, 11, 15, "hybrid"), false).status, 201);
        std::mt19937_64 rng(12);
        int booked = 0;
        int attempts = 0;
        int improvements = 0;
        while (booked < 200 && attempts < 2000) {
            ++attempts;
            const auto c = testing::customer_body(rng);
            const auto offers = svc.offers(c).body;
            const auto& avail = offers["available"];
            if (avail.empty()) continue;
            const json body{{"customer", c},
                            {"window", avail[rng() % avail.size()]},
                            {"offer_revision", offers["schedule_revision"]}};
            if (svc.book(body).status == 200) ++booked;
            if (booked % 23 == 22 && svc.improve(json{{"policy", booked % 2 ? "local" : "hybrid"}}).status == 200)
                ++improvements;
        }
        ASSERT_EQ(booked, 200);
        EXPECT_GT(improvements, 0);
        EXPECT_GT(testing::count_events(log, "Improved"), 10u);

        const auto live = *svc.snapshot_schedule();
        EXPECT_EQ(testing::schedule_difference(BookingService::replay(log), live), "");
        BookingService recovered(log);
        recovered.recover();
        EXPECT_EQ(testing::schedule_difference(*recovered.snapshot_schedule(), live), "");
        EXPECT_EQ(recovered.metrics().body["objective_s"], svc.metrics().body["objective_s"]);
    }
    {
        BookingService svc(testing::fresh_log("acceptance-race"));
        ASSERT_EQ(svc.init(testing::session_body(10, 1, 12, 13), false).status, 201);
        std::mt19937_64 rng(14);
        const auto a = testing::customer_body(rng, 20000, 7);
        const auto b = testing::customer_body(rng, 20000, 7);
        const auto oa = svc.offers(a).body;
        const auto ob = svc.offers(b).body;
        ASSERT_TRUE(oa["windows"][2]["available"].get<bool>());
        ASSERT_TRUE(ob["windows"][2]["available"].get<bool>());
        const int first = svc.book({{"customer", a}, {"window", 2}, {"offer_revision", oa["schedule_revision"]}}).status;
        const auto second = svc.book({{"customer", b}, {"window", 2}, {"offer_revision", ob["schedule_revision"]}});
        EXPECT_EQ(first, 200);
        EXPECT_EQ(second.status, 409);
        ASSERT_TRUE(second.body.contains("fresh_offers"));
        EXPECT_FALSE(second.body["fresh_offers"]["windows"][2]["available"].get<bool>());
    }
}

class AcceptanceReporter : public ::testing::EmptyTestEventListener {
    void OnTestEnd(const ::testing::TestInfo& info) override {
        static const std::map<std::string, std::string> names{
            {"GetTimeWindowsLatency", "Get-TWs latency"},
            {"InsertionTablesReproduced", "Insertion tables (offered windows, inserted customers)"},
            {"ImprovementTablesReproduced", "Improvement tables (reduction, recovery, hybrid dominance, exact solves)"},
            {"OracleInsertionConditions", "Oracle (a) insertion conditions vs full rebuild"},
            {"OracleIncrementalCaches", "Oracle (b) incremental caches vs recomputation"},
            {"OracleExactTourSolver", "Oracle (c) exact tour solver vs brute force"},
            {"OracleLocalSearchTermination", "Oracle (d) local search ends at a local minimum"},
            {"MonotoneImprovementSteps", "Monotonicity of improvement steps"},
            {"Determinism", "Determinism of instances and metrics"},
            {"ServiceReplayAndRace", "Service log replay and booking race"}};
        const auto it = names.find(info.name());
        const std::string label = it == names.end() ? info.name() : it->second;
        std::cout << "ACCEPTANCE " << label << ": " << (info.result()->Passed() ? "PASS" : "FAIL") << std::endl;
    }
};

}  // namespace
}  // namespace ahd

int main(int argc, char** argv) {
    ::testing::InitGoogleTest(&argc, argv);
    ::testing::UnitTest::GetInstance()->listeners().Append(new ahd::AcceptanceReporter);
    return RUN_ALL_TESTS();
}
