/**
 * Improvement step: inter-tour 1-move and 1-swap neighborhoods restricted to
 * each customer's assigned window, driven to a local minimum of total travel
 * time, optionally followed by exact re-sequencing of every changed tour.
 */
#pragma once

#include "ahd/core.hpp"
#include "ahd/ordering.hpp"
#include "ahd/tsptw.hpp"

#include <chrono>
#include <set>

namespace ahd {

/// Objective change below this (in seconds) does not count as improving.
inline constexpr double kMinImprovement = 1e-3;

struct ImprovementStats {
    std::size_t moves_applied = 0;
    std::size_t swaps_applied = 0;
    double travel_time_before = 0.0;
    double travel_time_after = 0.0;
    std::set<TourId> changed_tours;
    std::size_t exact_solves = 0;
    std::size_t exact_timeouts = 0;
    std::size_t exact_reorders = 0;

    double reduction() const noexcept { return travel_time_before - travel_time_after; }
};

/// Result of evaluating (and possibly applying) one neighborhood operation.
/// `delta_s` is the objective change of the best feasible candidate, negative
/// when improving; absent when no feasible candidate exists.
struct OperationOutcome {
    bool applied = false;
    std::optional<double> delta_s;
};

/// Travel saved by taking position `pos` out of `tour`.
template <TravelModel Travel>
double removal_gain(const Tour& tour, std::size_t pos, const Travel& travel) {
    const auto& prev = tour.place(pos - 1);
    const auto& here = tour.place(pos);
    const auto& next = tour.place(pos + 1);
    return travel(prev, here) + travel(here, next) - travel(prev, next);
}

/// Best relocation of the customer at position `pos` of tour `from` into tour
/// `to`, within its window. Applied only when it decreases total travel time.
template <TravelModel Travel>
OperationOutcome one_move(Schedule& schedule, std::size_t from, std::size_t pos, std::size_t to,
                          const Travel& travel) {
    if (from == to) throw std::invalid_argument("1-move needs two distinct tours");
    Tour& source = schedule.tour(from);
    Tour& target = schedule.tour(to);
    const Stop& stop = source.stop(pos);
    const auto gap = best_gap_in_tour(target, to, stop, travel);
    if (!gap) return {};
    const double delta = gap->delta_s - removal_gain(source, pos, travel);
    if (delta > -kMinImprovement) return {false, delta};

    Stop moved = source.remove(pos, travel);
    target.insert(gap->gap, std::move(moved), travel);
    schedule.mark_dirty(from);
    schedule.mark_dirty(to);
    return {true, delta};
}

/// Change in travel of `tour` when the customer at `pos` is replaced by `stop`.
template <TravelModel Travel>
double replacement_delta(const Tour& tour, std::size_t pos, const Stop& stop, const Travel& travel) {
    const auto& prev = tour.place(pos - 1);
    const auto& here = tour.place(pos);
    const auto& next = tour.place(pos + 1);
    return travel(prev, stop.location) + travel(stop.location, next) - travel(prev, here) - travel(here, next);
}

template <TravelModel Travel>
bool replacement_feasible(const Tour& tour, std::size_t pos, const Stop& stop, const Travel& travel) {
    const double load = tour.load() - tour.stop(pos).weight + stop.weight;
    if (load > tour.capacity() + 1e-9) return false;
    return splice_window(tour, pos - 1, pos + 1, stop, travel).feasible();
}

/// Best exchange of the customer at position `pos` of tour `a` with a
/// customer of tour `b` in the same window, each taking the other's position.
template <TravelModel Travel>
OperationOutcome one_swap(Schedule& schedule, std::size_t a, std::size_t pos, std::size_t b,
                          const Travel& travel) {
    if (a == b) throw std::invalid_argument("1-swap needs two distinct tours");
    Tour& first = schedule.tour(a);
    Tour& second = schedule.tour(b);
    const Stop& mine = first.stop(pos);
    const std::size_t lo = second.first_gap_for_rank(mine.window_rank) + 1;
    const std::size_t hi = second.last_gap_for_rank(mine.window_rank);

    std::optional<double> best;
    std::size_t best_pos = 0;
    for (std::size_t q = lo; q <= hi; ++q) {
        const Stop& theirs = second.stop(q);
        if (!replacement_feasible(first, pos, theirs, travel)) continue;
        if (!replacement_feasible(second, q, mine, travel)) continue;
        const double delta =
            replacement_delta(first, pos, theirs, travel) + replacement_delta(second, q, mine, travel);
        if (!best || delta < *best - 1e-9) {
            best = delta;
            best_pos = q;
        }
    }
    if (!best || *best > -kMinImprovement) return {false, best};

    Stop theirs = second.stop(best_pos);
    Stop mine_copy = first.replace(pos, std::move(theirs), travel);
    second.replace(best_pos, std::move(mine_copy), travel);
    schedule.mark_dirty(a);
    schedule.mark_dirty(b);
    return {true, best};
}

namespace detail {

template <TravelModel Travel, class Op>
std::size_t sweep(Schedule& schedule, const Travel& travel, std::set<TourId>& changed, Op op) {
    std::size_t applied = 0;
    const std::size_t m = schedule.tours().size();
    for (std::size_t a = 0; a < m; ++a) {
        for (std::size_t pos = 1; pos <= schedule.tour(a).size();) {
            bool hit = false;
            for (std::size_t b = 0; b < m && !hit; ++b) {
                if (b == a) continue;
                if (op(schedule, a, pos, b, travel).applied) {
                    hit = true;
                    ++applied;
                    changed.insert(schedule.tour(a).id());
                    changed.insert(schedule.tour(b).id());
                }
            }
            // On a hit the position holds a different customer: the former
            // successor after a move, the exchanged one after a swap.
            if (!hit) ++pos;
        }
    }
    return applied;
}

}  // namespace detail

/**
 * Local search to a local minimum: repeated 1-move sweeps until one applies
 * nothing, then a 1-swap sweep; back to moves whenever a swap applied.
 * Customers are scanned tour by tour in visit order, targets in tour order.
 * Touched tours stay in the schedule's dirty set for a following exact pass.
 */
template <TravelModel Travel>
ImprovementStats improve_local(Schedule& schedule, const Travel& travel) {
    ImprovementStats stats;
    stats.travel_time_before = total_travel_time(schedule, travel);
    if (schedule.tours().size() >= 2) {
        for (;;) {
            std::size_t moved = 0;
            do {
                moved = detail::sweep(schedule, travel, stats.changed_tours,
                                      [](auto&... args) { return one_move(args...); });
                stats.moves_applied += moved;
            } while (moved > 0);
            const std::size_t swapped = detail::sweep(schedule, travel, stats.changed_tours,
                                                      [](auto&... args) { return one_swap(args...); });
            stats.swaps_applied += swapped;
            if (swapped == 0) break;
        }
    }
    stats.travel_time_after = total_travel_time(schedule, travel);
    if (stats.moves_applied + stats.swaps_applied > 0) schedule.bump_revision();
    return stats;
}

/**
 * Local search followed by exact re-sequencing of every tour touched since
 * the previous improvement step (insertions included, via the schedule's
 * dirty set). Each exact solve is warm-started from the current order.
 */
template <TravelModel Travel>
ImprovementStats improve_hybrid(Schedule& schedule, const Travel& travel,
                                std::chrono::nanoseconds budget = kDefaultTourBudget) {
    auto stats = improve_local(schedule, travel);
    const bool local_changed = stats.moves_applied + stats.swaps_applied > 0;
    bool reordered = false;
    for (std::size_t index : schedule.take_dirty()) {
        Tour& tour = schedule.tour(index);
        if (tour.empty()) continue;
        const auto result = optimize_tour(tour, travel, budget);
        ++stats.exact_solves;
        if (result.status == TourStatus::TimeLimit) ++stats.exact_timeouts;
        if (apply_tour_order(tour, result, travel)) {
            ++stats.exact_reorders;
            stats.changed_tours.insert(tour.id());
            reordered = true;
        }
    }
    stats.travel_time_after = total_travel_time(schedule, travel);
    if (reordered && !local_changed) schedule.bump_revision();
    return stats;
}

}  // namespace ahd
