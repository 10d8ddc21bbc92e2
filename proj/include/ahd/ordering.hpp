/**
 * The online steps of the ordering phase over the single working schedule:
 * Initialization, Get TWs (simple insertion), and Set TW (double-check, then
 * insert at the best point).
 */
#pragma once

#include "ahd/core.hpp"

#include <optional>
#include <stdexcept>
#include <vector>

namespace ahd {

/// A concrete insertion point: after position `gap` of tour `tour_index`.
struct Placement {
    std::size_t tour_index = 0;
    TourId tour{};
    std::size_t gap = 0;
    double delta_s = 0.0;

    friend bool operator==(const Placement&, const Placement&) = default;
};

struct Offer {
    WindowId window{};
    Placement best;
};

/// The windows a customer can book, each with its cheapest insertion point,
/// evaluated at `schedule_revision`.
struct OfferSet {
    CustomerId customer{};
    std::vector<Offer> windows;
    std::uint64_t schedule_revision = 0;

    bool offers(WindowId id) const noexcept {
        for (const auto& o : windows)
            if (o.window == id) return true;
        return false;
    }
    const Offer* find(WindowId id) const noexcept {
        for (const auto& o : windows)
            if (o.window == id) return &o;
        return nullptr;
    }
};

enum class BookingOutcome { Booked, NoLongerAvailable };

struct BookingResult {
    BookingOutcome outcome = BookingOutcome::NoLongerAvailable;
    std::optional<Placement> applied;
    std::optional<OfferSet> fresh_offers;
};

inline Schedule initialize_schedule(const std::vector<VehicleConfig>& fleet, WindowSet windows) {
    if (fleet.empty()) throw std::invalid_argument("fleet must contain at least one vehicle");
    std::vector<Tour> tours;
    tours.reserve(fleet.size());
    for (const auto& v : fleet) {
        for (const auto& t : tours)
            if (t.id() == v.id) throw std::invalid_argument("duplicate tour id " + std::to_string(raw(v.id)));
        tours.emplace_back(v);
    }
    return Schedule(std::move(tours), std::move(windows));
}

template <TravelModel Travel>
Schedule initialize_schedule(const std::vector<VehicleConfig>& fleet, WindowSet windows, const Travel& travel) {
    auto schedule = initialize_schedule(fleet, std::move(windows));
    for (auto& t : schedule.tours()) t.refresh(travel);
    return schedule;
}

/// Cheapest feasible insertion of `stop` into one tour, scanning only the gaps
/// adjacent to the stop's window block. Ties keep the lower gap.
template <TravelModel Travel>
std::optional<Placement> best_gap_in_tour(const Tour& tour, std::size_t tour_index, const Stop& stop,
                                          const Travel& travel) {
    if (!insertion_capacity_feasible(tour, stop)) return std::nullopt;
    std::optional<Placement> best;
    const std::size_t lo = tour.first_gap_for_rank(stop.window_rank);
    const std::size_t hi = tour.last_gap_for_rank(stop.window_rank);
    for (std::size_t gap = lo; gap <= hi; ++gap) {
        if (!insertion_time_feasible(tour, gap, stop, travel)) continue;
        const double delta = insertion_delta(tour, gap, stop.location, travel);
        if (!best || delta < best->delta_s - 1e-9) best = Placement{tour_index, tour.id(), gap, delta};
    }
    return best;
}

/// Minimum-delta feasible insertion across all tours for the stop's window.
/// Ties are broken by lower tour id, then lower gap.
template <TravelModel Travel>
std::optional<Placement> best_insertion(const Schedule& schedule, const Stop& stop, const Travel& travel) {
    std::optional<Placement> best;
    for (std::size_t k = 0; k < schedule.tours().size(); ++k) {
        const auto candidate = best_gap_in_tour(schedule.tour(k), k, stop, travel);
        if (!candidate) continue;
        if (!best || candidate->delta_s < best->delta_s - 1e-9 ||
            (candidate->delta_s <= best->delta_s + 1e-9 && candidate->tour < best->tour))
            best = candidate;
    }
    return best;
}

template <TravelModel Travel>
std::optional<Placement> best_insertion(const Schedule& schedule, const Customer& customer, WindowId window,
                                        const Travel& travel) {
    return best_insertion(schedule, make_stop(customer, schedule.windows(), window), travel);
}

/// Get TWs: every window with at least one feasible insertion point. Read-only.
template <TravelModel Travel>
OfferSet get_time_windows(const Schedule& schedule, const Customer& customer, const Travel& travel) {
    OfferSet out{customer.id, {}, schedule.revision()};
    for (const auto& window : schedule.windows()) {
        if (auto best = best_insertion(schedule, make_stop(customer, schedule.windows(), window.id), travel))
            out.windows.push_back(Offer{window.id, *best});
    }
    return out;
}

/// Applies a placement without re-checking availability. The caller
/// guarantees both insertion conditions hold.
template <TravelModel Travel>
void apply_placement(Schedule& schedule, const Placement& placement, Stop stop, const Travel& travel) {
    auto& tour = schedule.tour(placement.tour_index);
    tour = insert_customer(std::move(tour), placement.gap, std::move(stop), travel);
    schedule.mark_dirty(placement.tour_index);
    schedule.bump_revision();
}

/// Set TW: re-checks the chosen window against the current schedule and
/// books it at the best insertion point, or reports fresh offers.
template <TravelModel Travel>
BookingResult set_time_window(Schedule& schedule, const Customer& customer, WindowId window,
                              const Travel& travel) {
    auto stop = make_stop(customer, schedule.windows(), window);
    if (auto best = best_insertion(schedule, stop, travel)) {
        apply_placement(schedule, *best, std::move(stop), travel);
        return {BookingOutcome::Booked, best, std::nullopt};
    }
    return {BookingOutcome::NoLongerAvailable, std::nullopt, get_time_windows(schedule, customer, travel)};
}

}  // namespace ahd
