/**
 * Exact re-sequencing of one tour under fixed window assignments.
 *
 * With pairwise non-overlapping windows and positive service times, every
 * feasible order visits the window blocks in increasing start time, so the
 * search is a label-setting dynamic program over (block, visited subset,
 * last customer). A label carries arrival time and accumulated travel; since
 * waiting is free, a label dominates another at the same state when it is no
 * later and no more expensive. Blocks are chained by handing the non-dominated
 * labels of a completed block to the next one.
 */
#pragma once

#include "ahd/core.hpp"

#include <chrono>
#include <cstdint>
#include <limits>
#include <vector>

namespace ahd {

enum class TourStatus { Optimal, TimeLimit, Infeasible };

inline const char* to_string(TourStatus s) noexcept {
    switch (s) {
        case TourStatus::Optimal: return "Optimal";
        case TourStatus::TimeLimit: return "TimeLimit";
        case TourStatus::Infeasible: return "Infeasible";
    }
    return "?";
}

struct TourOptimizationResult {
    std::vector<CustomerId> order;
    double travel_seconds = 0.0;
    TourStatus status = TourStatus::Infeasible;
    std::uint64_t nodes_explored = 0;
};

inline constexpr std::chrono::milliseconds kDefaultTourBudget{50};

/// Largest single-window block the subset search accepts; larger blocks fall
/// back to the warm start with TimeLimit status.
inline constexpr std::size_t kMaxBlock = 16;

namespace detail {

struct Label {
    double time;          // arrival at `last`
    double cost;          // travel so far
    std::int32_t parent;  // index into the label arena, -1 at the depot
    std::uint32_t last;   // stop index, or kDepot
};

inline constexpr std::uint32_t kDepot = std::numeric_limits<std::uint32_t>::max();

class LabelArena {
public:
    std::int32_t add(const Label& l) {
        labels_.push_back(l);
        return static_cast<std::int32_t>(labels_.size() - 1);
    }
    const Label& operator[](std::int32_t i) const { return labels_[static_cast<std::size_t>(i)]; }
    std::size_t size() const noexcept { return labels_.size(); }

    std::vector<std::uint32_t> path(std::int32_t i) const {
        std::vector<std::uint32_t> out;
        for (; i >= 0; i = labels_[static_cast<std::size_t>(i)].parent)
            if (labels_[static_cast<std::size_t>(i)].last != kDepot) out.push_back(labels_[static_cast<std::size_t>(i)].last);
        return {out.rbegin(), out.rend()};
    }

private:
    std::vector<Label> labels_;
};

}  // namespace detail

/**
 * Optimal visit order for `tour` within `budget`. The current order is the
 * warm start: the result is never worse than it. When the budget runs out the
 * best of the warm start and any completed search is returned with
 * TimeLimit status.
 */
template <TravelModel Travel>
TourOptimizationResult optimize_tour(const Tour& tour, const Travel& travel,
                                     std::chrono::nanoseconds budget = kDefaultTourBudget) {
    using detail::kDepot;
    using detail::Label;
    using Clock = std::chrono::steady_clock;
    const auto deadline = Clock::now() + budget;

    const auto& stops = tour.stops();
    const std::size_t n = stops.size();

    TourOptimizationResult warm;
    for (const auto& s : stops) warm.order.push_back(s.id);
    warm.travel_seconds = tour.travel_time(travel);
    {
        const auto fresh = compute_arrival_times(tour, travel);
        bool ok = fresh.alpha[n + 1] <= tour.end_time() + kTimeEps;
        for (std::size_t i = 1; i <= n && ok; ++i) ok = fresh.alpha[i] <= stops[i - 1].window.end_s + kTimeEps;
        warm.status = ok ? TourStatus::Optimal : TourStatus::Infeasible;
    }
    if (n <= 1) return warm;

    // Blocks of stop indices sharing a window, in increasing window start.
    std::vector<std::uint32_t> by_window(n);
    for (std::uint32_t i = 0; i < n; ++i) by_window[i] = i;
    std::stable_sort(by_window.begin(), by_window.end(), [&](std::uint32_t a, std::uint32_t b) {
        return stops[a].window.start_s < stops[b].window.start_s;
    });
    std::vector<std::vector<std::uint32_t>> blocks;
    for (std::size_t i = 0; i < n; ++i) {
        if (i == 0 || stops[by_window[i]].window.start_s != stops[by_window[i - 1]].window.start_s)
            blocks.emplace_back();
        blocks.back().push_back(by_window[i]);
    }
    for (const auto& b : blocks) {
        if (b.size() > kMaxBlock) {
            warm.status = warm.status == TourStatus::Infeasible ? warm.status : TourStatus::TimeLimit;
            return warm;
        }
    }

    detail::LabelArena arena;
    std::uint64_t created = 0;
    auto leg = [&](std::uint32_t from, std::uint32_t to) {
        const Location& a = from == kDepot ? tour.start_depot() : stops[from].location;
        return travel(a, stops[to].location);
    };
    auto service_at = [&](std::uint32_t i) { return i == kDepot ? 0.0 : stops[i].service_s; };

    auto dominates = [](const Label& a, const Label& b) {
        return a.time <= b.time + 1e-9 && a.cost <= b.cost + 1e-9;
    };
    auto lex_less = [&](std::int32_t a, std::int32_t b) {
        const auto pa = arena.path(a);
        const auto pb = arena.path(b);
        return std::lexicographical_compare(pa.begin(), pa.end(), pb.begin(), pb.end(),
                                            [&](std::uint32_t x, std::uint32_t y) { return raw(stops[x].id) < raw(stops[y].id); });
    };
    // Adds a label to a Pareto bucket; exact ties keep the lexicographically
    // smaller customer-id sequence.
    auto offer = [&](std::vector<std::int32_t>& bucket, const Label& cand) {
        for (auto it = bucket.begin(); it != bucket.end(); ++it) {
            const Label& cur = arena[*it];
            if (dominates(cur, cand)) {
                const bool tie = std::abs(cur.time - cand.time) <= 1e-9 && std::abs(cur.cost - cand.cost) <= 1e-9;
                if (!tie) return;
                const auto id = arena.add(cand);
                ++created;
                if (lex_less(id, *it)) *it = id;
                return;
            }
        }
        const auto id = arena.add(cand);
        ++created;
        std::erase_if(bucket, [&](std::int32_t other) { return dominates(arena[id], arena[other]); });
        bucket.push_back(id);
    };

    bool timed_out = false;
    std::vector<std::int32_t> frontier{arena.add(Label{tour.start_time(), 0.0, -1, kDepot})};

    for (const auto& block : blocks) {
        const std::size_t k = block.size();
        const std::size_t full = (std::size_t{1} << k) - 1;
        // buckets[mask * k + j]: labels that visited `mask` and stand at block[j].
        std::vector<std::vector<std::int32_t>> buckets((full + 1) * k);
        auto extend = [&](std::int32_t from_id, std::size_t mask) {
            const Label from = arena[from_id];
            const double depart = from.time + service_at(from.last);
            for (std::size_t j = 0; j < k; ++j) {
                if (mask & (std::size_t{1} << j)) continue;
                const auto& s = stops[block[j]];
                const double t = leg(from.last, block[j]);
                const double arrive = std::max(s.window.start_s, depart + t);
                if (arrive > s.window.end_s + kTimeEps) continue;
                offer(buckets[(mask | (std::size_t{1} << j)) * k + j],
                      Label{arrive, from.cost + t, from_id, block[j]});
            }
        };
        for (auto id : frontier) extend(id, 0);
        // Masks in increasing numeric order visit every subset after its subsets.
        for (std::size_t mask = 1; mask < full && !timed_out; ++mask) {
            for (std::size_t j = 0; j < k; ++j) {
                if (!(mask & (std::size_t{1} << j))) continue;
                for (auto id : std::vector<std::int32_t>(buckets[mask * k + j])) extend(id, mask);
            }
            if ((mask & 0xff) == 0 && Clock::now() > deadline) timed_out = true;
        }
        if (timed_out) break;
        frontier.clear();
        for (std::size_t j = 0; j < k; ++j)
            for (auto id : buckets[full * k + j]) frontier.push_back(id);
        if (frontier.empty()) break;
    }

    TourOptimizationResult best = warm;
    best.nodes_explored = created;
    if (timed_out) {
        if (best.status != TourStatus::Infeasible) best.status = TourStatus::TimeLimit;
        return best;
    }

    std::int32_t winner = -1;
    double winner_cost = std::numeric_limits<double>::infinity();
    for (auto id : frontier) {
        const Label& l = arena[id];
        if (l.last == kDepot) continue;
        const double back = travel(stops[l.last].location, tour.end_depot());
        if (l.time + stops[l.last].service_s + back > tour.end_time() + kTimeEps) continue;
        const double cost = l.cost + back;
        if (winner < 0 || cost < winner_cost - 1e-9 ||
            (std::abs(cost - winner_cost) <= 1e-9 && lex_less(id, winner))) {
            winner = id;
            winner_cost = cost;
        }
    }
    if (winner < 0) return best;  // only when the warm start is infeasible too

    if (best.status != TourStatus::Infeasible && winner_cost > best.travel_seconds + 1e-9) {
        best.status = TourStatus::Optimal;  // rounding only; the warm start is itself optimal
        return best;
    }
    best.order.clear();
    for (auto i : arena.path(winner)) best.order.push_back(stops[i].id);
    best.travel_seconds = winner_cost;
    best.status = TourStatus::Optimal;
    return best;
}

/// Reorders `tour` to `result.order` if that is strictly cheaper than the
/// current order. Returns true when the tour changed.
template <TravelModel Travel>
bool apply_tour_order(Tour& tour, const TourOptimizationResult& result, const Travel& travel) {
    if (result.status == TourStatus::Infeasible) return false;
    if (result.travel_seconds >= tour.travel_time(travel) - 1e-9) return false;
    std::vector<Stop> reordered;
    reordered.reserve(tour.size());
    for (auto id : result.order) {
        auto it = std::find_if(tour.stops().begin(), tour.stops().end(), [id](const Stop& s) { return s.id == id; });
        if (it == tour.stops().end()) throw std::invalid_argument("optimized order names a customer not on the tour");
        reordered.push_back(*it);
    }
    if (reordered.size() != tour.size()) throw std::invalid_argument("optimized order is not a permutation of the tour");
    tour.assign(std::move(reordered), travel);
    return true;
}

}  // namespace ahd
