// Independent oracles and fixtures shared by the unit and acceptance suites.
#pragma once

#include "ahd/benchgen.hpp"
#include "ahd/core.hpp"
#include "ahd/local_search.hpp"
#include "ahd/ordering.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

namespace ahd::testing {

inline constexpr double kEps = 1e-6;

// Hand-written recursions over a plain stop list, no caches involved.
struct Recomputed {
    std::vector<double> alpha;
    std::vector<double> beta;
    double load = 0.0;
    double travel = 0.0;
};

template <class Travel>
Recomputed recompute(const VehicleConfig& v, const std::vector<Stop>& stops, const Travel& travel) {
    const std::size_t n = stops.size();
    auto loc = [&](std::size_t pos) {
        if (pos == 0) return v.start_depot;
        if (pos == n + 1) return v.end_depot;
        return stops[pos - 1].location;
    };
    auto svc = [&](std::size_t pos) { return pos == 0 || pos == n + 1 ? 0.0 : stops[pos - 1].service_s; };
    Recomputed r;
    r.alpha.assign(n + 2, 0.0);
    r.beta.assign(n + 2, 0.0);
    r.alpha[0] = v.start_s;
    for (std::size_t j = 1; j <= n + 1; ++j) {
        const double reach = r.alpha[j - 1] + svc(j - 1) + travel(loc(j - 1), loc(j));
        r.alpha[j] = j <= n ? std::max(stops[j - 1].window.start_s, reach) : reach;
        r.travel += travel(loc(j - 1), loc(j));
    }
    r.beta[n + 1] = v.end_s;
    for (std::size_t j = n; j >= 1; --j)
        r.beta[j] = std::min(stops[j - 1].window.end_s, r.beta[j + 1] - svc(j) - travel(loc(j), loc(j + 1)));
    r.beta[0] = r.beta[1] - travel(loc(0), loc(1));
    for (const auto& s : stops) r.load += s.weight;
    return r;
}

// Drives the route forward and checks every window, the return time and the capacity.
template <class Travel>
bool route_feasible(const VehicleConfig& v, const std::vector<Stop>& stops, const Travel& travel) {
    double t = v.start_s;
    double load = 0.0;
    Location here = v.start_depot;
    for (const auto& s : stops) {
        t = std::max(s.window.start_s, t + travel(here, s.location));
        if (t > s.window.end_s + kEps) return false;
        t += s.service_s;
        here = s.location;
        load += s.weight;
    }
    t += travel(here, v.end_depot);
    return t <= v.end_s + kEps && load <= v.capacity + 1e-9;
}

template <class Travel>
double route_travel(const VehicleConfig& v, const std::vector<Stop>& stops, const Travel& travel) {
    double sum = 0.0;
    Location here = v.start_depot;
    for (const auto& s : stops) {
        sum += travel(here, s.location);
        here = s.location;
    }
    return sum + travel(here, v.end_depot);
}

inline VehicleConfig config_of(const Tour& t) {
    return {t.id(), t.capacity(), t.start_time(), t.end_time(), t.start_depot(), t.end_depot()};
}

template <class Travel>
double min_over_orders(const VehicleConfig& v, std::vector<Stop> stops, const Travel& travel, bool& any) {
    // depth-first over all orders, pruned at the first infeasible prefix
    double best = std::numeric_limits<double>::infinity();
    const std::size_t n = stops.size();
    std::vector<bool> used(n, false);
    std::vector<Stop> path;
    auto rec = [&](auto&& self, double t, double cost, Location here) -> void {
        if (path.size() == n) {
            const double back = travel(here, v.end_depot);
            if (t + back <= v.end_s + kEps) best = std::min(best, cost + back);
            return;
        }
        for (std::size_t i = 0; i < n; ++i) {
            if (used[i]) continue;
            const auto& s = stops[i];
            const double leg = travel(here, s.location);
            const double arrive = std::max(s.window.start_s, t + leg);
            if (arrive > s.window.end_s + kEps) continue;
            used[i] = true;
            path.push_back(s);
            self(self, arrive + s.service_s, cost + leg, s.location);
            path.pop_back();
            used[i] = false;
        }
    };
    rec(rec, v.start_s, 0.0, v.start_depot);
    any = std::isfinite(best);
    return best;
}

// Regular windows of one hour from 08:00.
inline WindowSet hourly_windows(int count, double first = 8 * 3600.0) {
    std::vector<TimeWindow> ws;
    for (int k = 0; k < count; ++k)
        ws.push_back({WindowId(static_cast<std::uint32_t>(k)), first + 3600.0 * k, first + 3600.0 * (k + 1)});
    return WindowSet(ws);
}

inline Stop random_stop(std::mt19937_64& rng, const WindowSet& windows, std::uint32_t id, double side,
                        double weight_hi = 15.0) {
    std::uniform_real_distribution<double> coord(0.0, side);
    std::uniform_real_distribution<double> weight(1.0, weight_hi);
    std::uniform_int_distribution<std::size_t> window(0, windows.size() - 1);
    Customer c;
    c.id = CustomerId(id);
    c.location = {coord(rng), coord(rng), 0};
    c.weight = weight(rng);
    c.service_s = 300.0;
    return make_stop(c, windows, windows[window(rng)].id);
}

// Fills a tour by random feasible insertions, checked by the oracle only.
template <class Travel>
Tour random_feasible_tour(std::mt19937_64& rng, const VehicleConfig& v, const WindowSet& windows, std::size_t target,
                          const Travel& travel, double side, std::uint32_t& next_id, int attempts = 400) {
    Tour tour(v);
    tour.refresh(travel);
    std::vector<Stop> stops;
    for (int a = 0; a < attempts && stops.size() < target; ++a) {
        auto s = random_stop(rng, windows, next_id, side);
        std::uniform_int_distribution<std::size_t> gap(0, stops.size());
        auto trial = stops;
        trial.insert(trial.begin() + static_cast<std::ptrdiff_t>(gap(rng)), s);
        if (!route_feasible(v, trial, travel)) continue;
        stops = std::move(trial);
        ++next_id;
    }
    tour.assign(stops, travel);
    return tour;
}

// Full scan of both neighborhoods on a schedule; returns the best improving
// objective change found (or +inf when none exists).
template <class Travel>
double best_neighbor_delta(const Schedule& schedule, const Travel& travel) {
    double best = std::numeric_limits<double>::infinity();
    const auto& tours = schedule.tours();
    for (std::size_t a = 0; a < tours.size(); ++a) {
        const auto va = config_of(tours[a]);
        const auto& sa = tours[a].stops();
        const double ta = route_travel(va, sa, travel);
        for (std::size_t b = 0; b < tours.size(); ++b) {
            if (a == b) continue;
            const auto vb = config_of(tours[b]);
            const auto& sb = tours[b].stops();
            const double tb = route_travel(vb, sb, travel);
            for (std::size_t i = 0; i < sa.size(); ++i) {
                auto without = sa;
                without.erase(without.begin() + static_cast<std::ptrdiff_t>(i));
                const double ta_new = route_travel(va, without, travel);
                for (std::size_t g = 0; g <= sb.size(); ++g) {
                    auto with = sb;
                    with.insert(with.begin() + static_cast<std::ptrdiff_t>(g), sa[i]);
                    if (!route_feasible(vb, with, travel)) continue;
                    best = std::min(best, ta_new + route_travel(vb, with, travel) - ta - tb);
                }
                if (b < a) continue;
                for (std::size_t j = 0; j < sb.size(); ++j) {
                    if (sb[j].window.id != sa[i].window.id) continue;
                    auto na = sa;
                    auto nb = sb;
                    std::swap(na[i], nb[j]);
                    if (!route_feasible(va, na, travel) || !route_feasible(vb, nb, travel)) continue;
                    best = std::min(best, route_travel(va, na, travel) + route_travel(vb, nb, travel) - ta - tb);
                }
            }
        }
    }
    return best;
}

inline GenerationParams small_params(int customers, int tours, std::uint64_t seed) {
    GenerationParams p;
    p.customer_count = customers;
    p.tour_count = tours;
    p.seed = seed;
    return p;
}

}  // namespace ahd::testing
