/**
 * Domain types for the capacitated VRP with structured time windows and the
 * arrival-time kernel: earliest/latest arrival propagation, tour feasibility,
 * constant-time insertion checks and linear-time cache updates.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

namespace ahd {

/// Absolute tolerance for every time comparison, in seconds.
inline constexpr double kTimeEps = 1e-6;

enum class CustomerId : std::uint32_t {};
enum class WindowId : std::uint32_t {};
enum class TourId : std::uint32_t {};

template <class E>
constexpr auto raw(E e) noexcept { return static_cast<std::underlying_type_t<E>>(e); }

/// Planar position in meters. `node` indexes a travel-time table for
/// matrix-based models and is ignored by coordinate-based ones.
struct Location {
    double x_m = 0.0;
    double y_m = 0.0;
    std::uint32_t node = 0;

    friend bool operator==(const Location&, const Location&) = default;
};

template <class T>
concept TravelModel = requires(const T& travel, const Location& a, const Location& b) {
    { travel(a, b) } -> std::convertible_to<double>;
};

/// Travel time proportional to Euclidean distance at a constant speed.
struct EuclideanTravel {
    double speed_m_per_s = 20000.0 / 3600.0;

    double operator()(const Location& a, const Location& b) const noexcept {
        return std::hypot(a.x_m - b.x_m, a.y_m - b.y_m) / speed_m_per_s;
    }
};

inline double euclidean_travel_seconds(const Location& a, const Location& b, double speed_m_per_s) {
    if (!(speed_m_per_s > 0.0)) throw std::invalid_argument("travel speed must be positive");
    return EuclideanTravel{speed_m_per_s}(a, b);
}

/// Dense travel-time table addressed by Location::node.
class MatrixTravel {
public:
    explicit MatrixTravel(std::size_t nodes) : nodes_(nodes), seconds_(nodes * nodes, 0.0) {}

    void set(std::uint32_t from, std::uint32_t to, double seconds) { seconds_.at(from * nodes_ + to) = seconds; }
    void set_symmetric(std::uint32_t a, std::uint32_t b, double seconds) {
        set(a, b, seconds);
        set(b, a, seconds);
    }

    double operator()(const Location& a, const Location& b) const {
        return seconds_[a.node * nodes_ + b.node];
    }

    std::size_t nodes() const noexcept { return nodes_; }

private:
    std::size_t nodes_;
    std::vector<double> seconds_;
};

struct TimeWindow {
    WindowId id{};
    double start_s = 0.0;
    double end_s = 0.0;

    friend bool operator==(const TimeWindow&, const TimeWindow&) = default;
};

inline bool windows_overlap(const TimeWindow& a, const TimeWindow& b) noexcept {
    return b.start_s < a.end_s && a.start_s < b.end_s;
}

/// A structured window set: pairwise non-overlapping, unique, kept sorted by
/// start time. The position of a window in this order is its rank; tours of a
/// feasible schedule visit customers in non-decreasing rank.
class WindowSet {
public:
    WindowSet() = default;

    explicit WindowSet(std::vector<TimeWindow> windows) : windows_(std::move(windows)) {
        std::sort(windows_.begin(), windows_.end(),
                  [](const TimeWindow& a, const TimeWindow& b) { return a.start_s < b.start_s; });
        for (std::size_t i = 0; i < windows_.size(); ++i) {
            const auto& w = windows_[i];
            if (!(w.start_s < w.end_s))
                throw std::invalid_argument("time window " + std::to_string(raw(w.id)) + " has start >= end");
            for (std::size_t j = 0; j < i; ++j) {
                if (windows_[j].id == w.id)
                    throw std::invalid_argument("duplicate time window id " + std::to_string(raw(w.id)));
                if (windows_overlap(windows_[j], w))
                    throw std::invalid_argument("time windows " + std::to_string(raw(windows_[j].id)) + " and " +
                                                std::to_string(raw(w.id)) + " overlap");
            }
        }
    }

    std::size_t size() const noexcept { return windows_.size(); }
    bool empty() const noexcept { return windows_.empty(); }
    const TimeWindow& operator[](std::size_t rank) const { return windows_[rank]; }
    auto begin() const noexcept { return windows_.begin(); }
    auto end() const noexcept { return windows_.end(); }

    std::optional<std::size_t> rank_of(WindowId id) const noexcept {
        for (std::size_t i = 0; i < windows_.size(); ++i)
            if (windows_[i].id == id) return i;
        return std::nullopt;
    }

    const TimeWindow& at(WindowId id) const {
        auto r = rank_of(id);
        if (!r) throw std::invalid_argument("unknown time window id " + std::to_string(raw(id)));
        return windows_[*r];
    }

private:
    std::vector<TimeWindow> windows_;
};

struct Customer {
    CustomerId id{};
    Location location;
    double weight = 0.0;
    double service_s = 0.0;
    std::optional<WindowId> assigned_window;
    std::optional<WindowId> desired_window;
};

/// A customer bound to a window: the unit stored on a tour.
struct Stop {
    CustomerId id{};
    Location location;
    double weight = 0.0;
    double service_s = 0.0;
    TimeWindow window;
    std::size_t window_rank = 0;

    friend bool operator==(const Stop&, const Stop&) = default;
};

inline Stop make_stop(const Customer& customer, const WindowSet& windows, WindowId window) {
    if (!(customer.weight > 0.0)) throw std::invalid_argument("customer weight must be positive");
    if (!(customer.service_s > 0.0)) throw std::invalid_argument("customer service time must be positive");
    auto rank = windows.rank_of(window);
    if (!rank) throw std::invalid_argument("unknown time window id " + std::to_string(raw(window)));
    return Stop{customer.id, customer.location, customer.weight, customer.service_s, windows[*rank], *rank};
}

struct VehicleConfig {
    TourId id{};
    double capacity = 0.0;
    double start_s = 0.0;
    double end_s = 0.0;
    Location start_depot;
    Location end_depot;
};

struct ArrivalTimes {
    std::vector<double> alpha;
    std::vector<double> beta;
};

/**
 * One vehicle's depot-to-depot route. Positions are numbered 0..n+1 with the
 * depots at 0 and n+1; customers occupy 1..n. Earliest (alpha) and latest
 * (beta) arrival times and the load are cached and kept coherent by every
 * mutating member.
 */
class Tour {
public:
    Tour() = default;

    explicit Tour(const VehicleConfig& vehicle)
        : id_(vehicle.id),
          capacity_(vehicle.capacity),
          start_s_(vehicle.start_s),
          end_s_(vehicle.end_s),
          start_depot_(vehicle.start_depot),
          end_depot_(vehicle.end_depot),
          alpha_{vehicle.start_s, vehicle.start_s},
          beta_{vehicle.end_s, vehicle.end_s} {
        if (!(start_s_ < end_s_)) throw std::invalid_argument("tour start time must precede its end time");
        if (!(capacity_ > 0.0)) throw std::invalid_argument("tour capacity must be positive");
    }

    TourId id() const noexcept { return id_; }
    double capacity() const noexcept { return capacity_; }
    double start_time() const noexcept { return start_s_; }
    double end_time() const noexcept { return end_s_; }
    const Location& start_depot() const noexcept { return start_depot_; }
    const Location& end_depot() const noexcept { return end_depot_; }

    std::size_t size() const noexcept { return stops_.size(); }
    bool empty() const noexcept { return stops_.empty(); }
    const std::vector<Stop>& stops() const noexcept { return stops_; }
    /// Customer at 1-based position `pos` (1..n).
    const Stop& stop(std::size_t pos) const { return stops_.at(pos - 1); }

    double load() const noexcept { return load_; }
    double alpha(std::size_t pos) const { return alpha_.at(pos); }
    double beta(std::size_t pos) const { return beta_.at(pos); }
    const std::vector<double>& alphas() const noexcept { return alpha_; }
    const std::vector<double>& betas() const noexcept { return beta_; }

    /// Location at any position 0..n+1, depots included.
    const Location& place(std::size_t pos) const {
        if (pos == 0) return start_depot_;
        if (pos == stops_.size() + 1) return end_depot_;
        return stops_.at(pos - 1).location;
    }
    /// Service duration at a position; zero at both depots.
    double service(std::size_t pos) const {
        if (pos == 0 || pos == stops_.size() + 1) return 0.0;
        return stops_.at(pos - 1).service_s;
    }
    /// Number of customers whose window rank is below `rank`; the first gap
    /// admissible for a customer of that rank.
    std::size_t first_gap_for_rank(std::size_t rank) const noexcept {
        auto it = std::partition_point(stops_.begin(), stops_.end(),
                                       [rank](const Stop& s) { return s.window_rank < rank; });
        return static_cast<std::size_t>(it - stops_.begin());
    }
    /// Number of customers with window rank at most `rank`; the last admissible gap.
    std::size_t last_gap_for_rank(std::size_t rank) const noexcept {
        auto it = std::partition_point(stops_.begin(), stops_.end(),
                                       [rank](const Stop& s) { return s.window_rank <= rank; });
        return static_cast<std::size_t>(it - stops_.begin());
    }

    /// Inserts after position `gap` (0..n); the new customer takes position gap+1.
    template <TravelModel Travel>
    void insert(std::size_t gap, Stop stop, const Travel& travel) {
        if (gap > stops_.size()) throw std::out_of_range("insertion gap out of range");
        stops_.insert(stops_.begin() + static_cast<std::ptrdiff_t>(gap), std::move(stop));
        alpha_.insert(alpha_.begin() + static_cast<std::ptrdiff_t>(gap) + 1, 0.0);
        beta_.insert(beta_.begin() + static_cast<std::ptrdiff_t>(gap) + 1, 0.0);
        propagate_from(gap + 1, travel);
    }

    /// Removes the customer at position `pos` (1..n) and returns it.
    template <TravelModel Travel>
    Stop remove(std::size_t pos, const Travel& travel) {
        if (pos < 1 || pos > stops_.size()) throw std::out_of_range("tour position out of range");
        Stop out = std::move(stops_[pos - 1]);
        stops_.erase(stops_.begin() + static_cast<std::ptrdiff_t>(pos) - 1);
        alpha_.erase(alpha_.begin() + static_cast<std::ptrdiff_t>(pos));
        beta_.erase(beta_.begin() + static_cast<std::ptrdiff_t>(pos));
        // Position `pos` now holds the former successor; its alpha and its
        // predecessor's beta are the first values that can change.
        propagate_from(pos, travel);
        return out;
    }

    /// Replaces the customer at position `pos` and returns the previous one.
    template <TravelModel Travel>
    Stop replace(std::size_t pos, Stop stop, const Travel& travel) {
        if (pos < 1 || pos > stops_.size()) throw std::out_of_range("tour position out of range");
        std::swap(stops_[pos - 1], stop);
        propagate_from(pos, travel);
        return stop;
    }

    /// Replaces the whole visit sequence.
    template <TravelModel Travel>
    void assign(std::vector<Stop> stops, const Travel& travel) {
        stops_ = std::move(stops);
        alpha_.assign(stops_.size() + 2, 0.0);
        beta_.assign(stops_.size() + 2, 0.0);
        propagate_from(1, travel);
    }

    template <TravelModel Travel>
    void refresh(const Travel& travel) {
        propagate_from(1, travel);
    }

    /// Travel time over all legs, depot legs included.
    template <TravelModel Travel>
    double travel_time(const Travel& travel) const {
        double sum = 0.0;
        for (std::size_t pos = 0; pos + 1 < stops_.size() + 2; ++pos) sum += travel(place(pos), place(pos + 1));
        return sum;
    }

private:
    // Forward pass from `pos` to the end depot, then the full backward pass.
    template <TravelModel Travel>
    void propagate_from(std::size_t pos, const Travel& travel) {
        load_ = 0.0;
        for (const auto& s : stops_) load_ += s.weight;
        const std::size_t last = stops_.size() + 1;
        alpha_[0] = start_s_;
        for (std::size_t j = std::max<std::size_t>(pos, 1); j <= last; ++j) {
            const double reach = alpha_[j - 1] + service(j - 1) + travel(place(j - 1), place(j));
            alpha_[j] = j == last ? reach : std::max(stops_[j - 1].window.start_s, reach);
        }
        beta_[last] = end_s_;
        for (std::size_t j = last; j >= 2; --j) {
            const double latest = beta_[j] - service(j - 1) - travel(place(j - 1), place(j));
            beta_[j - 1] = std::min(stops_[j - 2].window.end_s, latest);
        }
        beta_[0] = beta_[1] - travel(place(0), place(1));
    }

    TourId id_{};
    double capacity_ = 0.0;
    double start_s_ = 0.0;
    double end_s_ = 0.0;
    Location start_depot_;
    Location end_depot_;
    std::vector<Stop> stops_;
    std::vector<double> alpha_{0.0, 0.0};
    std::vector<double> beta_{0.0, 0.0};
    double load_ = 0.0;
};

/// From-scratch evaluation of both arrival-time recursions. Used as the
/// reference the incremental caches are compared against.
template <TravelModel Travel>
ArrivalTimes compute_arrival_times(const Tour& tour, const Travel& travel) {
    const std::size_t n = tour.size();
    ArrivalTimes out{std::vector<double>(n + 2), std::vector<double>(n + 2)};
    out.alpha[0] = tour.start_time();
    for (std::size_t j = 0; j < n; ++j) {
        const auto& next = tour.stop(j + 1);
        out.alpha[j + 1] = std::max(next.window.start_s,
                                    out.alpha[j] + tour.service(j) + travel(tour.place(j), next.location));
    }
    out.alpha[n + 1] = out.alpha[n] + tour.service(n) + travel(tour.place(n), tour.end_depot());

    out.beta[n + 1] = tour.end_time();
    for (std::size_t j = n + 1; j >= 2; --j) {
        const auto& prev = tour.stop(j - 1);
        out.beta[j - 1] = std::min(prev.window.end_s,
                                   out.beta[j] - prev.service_s - travel(prev.location, tour.place(j)));
    }
    out.beta[0] = out.beta[1] - travel(tour.start_depot(), tour.place(1));
    return out;
}

/// TFEAS on the cached earliest arrival times.
inline bool tour_time_feasible(const Tour& tour) {
    const std::size_t n = tour.size();
    for (std::size_t i = 1; i <= n; ++i) {
        const auto& w = tour.stop(i).window;
        const double a = tour.alpha(i);
        if (a < w.start_s - kTimeEps || a > w.end_s + kTimeEps) return false;
    }
    return tour.alpha(n + 1) <= tour.end_time() + kTimeEps;
}

/// CFEAS on the cached load.
inline bool tour_capacity_feasible(const Tour& tour) noexcept {
    return tour.load() <= tour.capacity() + 1e-9;
}

/// Earliest and latest arrival at a candidate placed after position `gap`.
struct InsertionWindow {
    double earliest = 0.0;
    double latest = 0.0;
    bool feasible() const noexcept { return earliest <= latest + kTimeEps; }
};

/// Arrival bounds for `stop` slotted between positions `before` and `after`
/// of `tour`. The prefix up to `before` and the suffix from `after` keep their
/// cached alpha and beta.
template <TravelModel Travel>
InsertionWindow splice_window(const Tour& tour, std::size_t before, std::size_t after, const Stop& stop,
                              const Travel& travel) {
    const double earliest = std::max(
        stop.window.start_s, tour.alpha(before) + tour.service(before) + travel(tour.place(before), stop.location));
    const double latest = std::min(stop.window.end_s,
                                   tour.beta(after) - stop.service_s - travel(stop.location, tour.place(after)));
    return {earliest, latest};
}

/// Condition (1): constant-time check that `stop` fits between positions
/// gap and gap+1 with respect to time.
template <TravelModel Travel>
bool insertion_time_feasible(const Tour& tour, std::size_t gap, const Stop& stop, const Travel& travel) {
    if (gap > tour.size()) throw std::out_of_range("insertion gap out of range");
    return splice_window(tour, gap, gap + 1, stop, travel).feasible();
}

/// Condition (2).
inline bool insertion_capacity_feasible(const Tour& tour, double weight) noexcept {
    return tour.load() + weight <= tour.capacity() + 1e-9;
}

inline bool insertion_capacity_feasible(const Tour& tour, const Stop& stop) noexcept {
    return insertion_capacity_feasible(tour, stop.weight);
}

/// Increase of the tour's travel time when `location` is placed after `gap`.
template <TravelModel Travel>
double insertion_delta(const Tour& tour, std::size_t gap, const Location& location, const Travel& travel) {
    if (gap > tour.size()) throw std::out_of_range("insertion gap out of range");
    const auto& a = tour.place(gap);
    const auto& b = tour.place(gap + 1);
    return travel(a, location) + travel(location, b) - travel(a, b);
}

/// Inserts a customer whose insertion satisfies both conditions; returns the
/// updated tour. Throws std::invalid_argument on an infeasible insertion.
template <TravelModel Travel>
Tour insert_customer(Tour tour, std::size_t gap, Stop stop, const Travel& travel) {
    if (!insertion_capacity_feasible(tour, stop))
        throw std::invalid_argument("insertion violates the tour capacity");
    if (!insertion_time_feasible(tour, gap, stop, travel))
        throw std::invalid_argument("insertion violates time windows");
    tour.insert(gap, std::move(stop), travel);
    return tour;
}

template <TravelModel Travel>
Tour remove_customer(Tour tour, std::size_t pos, const Travel& travel) {
    tour.remove(pos, travel);
    return tour;
}

/**
 * The single working schedule: m tours over one structured window set.
 * `revision` increases on every mutation; `dirty` collects tours touched since
 * the last improvement step.
 */
class Schedule {
public:
    Schedule() = default;
    Schedule(std::vector<Tour> tours, WindowSet windows) : tours_(std::move(tours)), windows_(std::move(windows)) {}

    std::vector<Tour>& tours() noexcept { return tours_; }
    const std::vector<Tour>& tours() const noexcept { return tours_; }
    Tour& tour(std::size_t index) { return tours_.at(index); }
    const Tour& tour(std::size_t index) const { return tours_.at(index); }
    const WindowSet& windows() const noexcept { return windows_; }

    std::uint64_t revision() const noexcept { return revision_; }
    void bump_revision() noexcept { ++revision_; }
    void set_revision(std::uint64_t r) noexcept { revision_ = r; }

    const std::set<std::size_t>& dirty() const noexcept { return dirty_; }
    void mark_dirty(std::size_t tour_index) { dirty_.insert(tour_index); }
    std::set<std::size_t> take_dirty() { return std::exchange(dirty_, {}); }

    std::size_t customer_count() const noexcept {
        std::size_t n = 0;
        for (const auto& t : tours_) n += t.size();
        return n;
    }

    std::optional<std::size_t> index_of(TourId id) const noexcept {
        for (std::size_t i = 0; i < tours_.size(); ++i)
            if (tours_[i].id() == id) return i;
        return std::nullopt;
    }

    bool contains(CustomerId id) const noexcept {
        for (const auto& t : tours_)
            for (const auto& s : t.stops())
                if (s.id == id) return true;
        return false;
    }

private:
    std::vector<Tour> tours_;
    WindowSet windows_;
    std::uint64_t revision_ = 0;
    std::set<std::size_t> dirty_;
};

template <TravelModel Travel>
double total_travel_time(const Schedule& schedule, const Travel& travel) {
    double sum = 0.0;
    for (const auto& tour : schedule.tours()) sum += tour.travel_time(travel);
    return sum;
}

/// Full structural check of a schedule: feasibility of every tour, cache
/// coherence against a fresh recomputation, window ordering, and customer
/// uniqueness. Returns a description of the first problem found.
template <TravelModel Travel>
std::optional<std::string> validate_schedule(const Schedule& schedule, const Travel& travel) {
    std::set<CustomerId> seen;
    for (const auto& tour : schedule.tours()) {
        const auto tag = "tour " + std::to_string(raw(tour.id())) + ": ";
        if (!tour_time_feasible(tour)) return tag + "violates time windows";
        if (!tour_capacity_feasible(tour)) return tag + "exceeds capacity";
        const auto fresh = compute_arrival_times(tour, travel);
        for (std::size_t i = 0; i < fresh.alpha.size(); ++i) {
            if (std::abs(fresh.alpha[i] - tour.alpha(i)) > kTimeEps ||
                std::abs(fresh.beta[i] - tour.beta(i)) > kTimeEps)
                return tag + "stale arrival-time cache at position " + std::to_string(i);
        }
        double load = 0.0;
        for (std::size_t i = 0; i < tour.size(); ++i) {
            const auto& s = tour.stops()[i];
            load += s.weight;
            if (i > 0 && tour.stops()[i - 1].window_rank > s.window_rank) return tag + "visits out of window order";
            if (!seen.insert(s.id).second) return "customer " + std::to_string(raw(s.id)) + " appears twice";
        }
        if (std::abs(load - tour.load()) > 1e-6) return tag + "stale load cache";
    }
    return std::nullopt;
}

}  // namespace ahd
