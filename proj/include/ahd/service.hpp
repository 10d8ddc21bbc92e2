/**
 * HTTP booking service over the single working schedule.
 *
 * Offers run under a shared lock; bookings and improvements take the
 * exclusive lock, so writes are serialized while reads proceed concurrently.
 * Every write is appended to a newline-delimited JSON event log (Init, Booked,
 * Improved); replaying the log reproduces the live schedule exactly. A full
 * snapshot is written every `snapshot_every` events to shorten recovery.
 */
#pragma once

#include "ahd/benchgen.hpp"
#include "ahd/core.hpp"
#include "ahd/local_search.hpp"
#include "ahd/ordering.hpp"
#include "ahd/simulation.hpp"

#include <httplib.h>
#include <json.hpp>

#include <atomic>
#include <chrono>
#include <ctime>
#include <deque>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <shared_mutex>
#include <string>

namespace ahd {

using nlohmann::json;

struct ServiceResponse {
    int status = 200;
    json body;
};

inline ServiceResponse error_response(int status, std::string error, std::string detail) {
    return {status, json{{"error", std::move(error)}, {"detail", std::move(detail)}}};
}

inline std::string window_label(const TimeWindow& w) {
    auto hhmm = [](double s) {
        const auto total = static_cast<long>(std::lround(s)) / 60;
        char buf[16];
        std::snprintf(buf, sizeof buf, "%02ld:%02ld", (total / 60) % 24, total % 60);
        return std::string(buf);
    };
    return hhmm(w.start_s) + "-" + hhmm(w.end_s);
}

inline json stop_to_json(const Stop& s) {
    return {{"customer", raw(s.id)},   {"x_m", s.location.x_m},     {"y_m", s.location.y_m},
            {"weight", s.weight},      {"service_s", s.service_s}, {"window", raw(s.window.id)}};
}

template <TravelModel Travel>
json schedule_to_json(const Schedule& schedule, const Travel& travel) {
    json tours = json::array();
    for (const auto& t : schedule.tours()) {
        json visits = json::array();
        for (std::size_t pos = 1; pos <= t.size(); ++pos) {
            auto v = stop_to_json(t.stop(pos));
            v["alpha_s"] = t.alpha(pos);
            v["beta_s"] = t.beta(pos);
            visits.push_back(std::move(v));
        }
        tours.push_back({{"id", raw(t.id())},
                         {"capacity", t.capacity()},
                         {"start_s", t.start_time()},
                         {"end_s", t.end_time()},
                         {"load", t.load()},
                         {"travel_s", t.travel_time(travel)},
                         {"depot", {{"x_m", t.start_depot().x_m}, {"y_m", t.start_depot().y_m}}},
                         {"return_s", t.alpha(t.size() + 1)},
                         {"visits", std::move(visits)}});
    }
    json windows = json::array();
    for (const auto& w : schedule.windows())
        windows.push_back({{"id", raw(w.id)}, {"start_s", w.start_s}, {"end_s", w.end_s}, {"label", window_label(w)}});
    return {{"revision", schedule.revision()},
            {"objective_s", total_travel_time(schedule, travel)},
            {"customers", schedule.customer_count()},
            {"windows", std::move(windows)},
            {"tours", std::move(tours)}};
}

inline json improvement_to_json(const ImprovementStats& s) {
    json changed = json::array();
    for (auto id : s.changed_tours) changed.push_back(raw(id));
    return {{"moves_applied", s.moves_applied},
            {"swaps_applied", s.swaps_applied},
            {"travel_time_before", s.travel_time_before},
            {"travel_time_after", s.travel_time_after},
            {"changed_tours", std::move(changed)},
            {"exact_solves", s.exact_solves},
            {"exact_timeouts", s.exact_timeouts}};
}

/// Append-only NDJSON event log with dense sequence numbers.
class EventLog {
public:
    explicit EventLog(std::filesystem::path path) : path_(std::move(path)) {}

    const std::filesystem::path& path() const noexcept { return path_; }
    std::uint64_t last_seq() const noexcept { return seq_; }

    void reset() {
        out_.close();
        out_.open(path_, std::ios::binary | std::ios::trunc);
        if (!out_) throw std::runtime_error("cannot open event log " + path_.string());
        seq_ = 0;
    }

    /// Reopens an existing log for appending after recovery.
    void resume(std::uint64_t seq) {
        out_.close();
        out_.open(path_, std::ios::binary | std::ios::app);
        if (!out_) throw std::runtime_error("cannot open event log " + path_.string());
        seq_ = seq;
    }

    std::uint64_t append(const std::string& kind, json payload) {
        json event{{"seq", ++seq_}, {"ts", timestamp()}, {"kind", kind}, {"payload", std::move(payload)}};
        out_ << event.dump() << '\n';
        out_.flush();
        return seq_;
    }

    static std::vector<json> read_all(const std::filesystem::path& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw std::runtime_error("cannot open event log " + path.string());
        std::vector<json> events;
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            try {
                events.push_back(json::parse(line));
            } catch (const json::exception&) {
                break;  // torn tail line
            }
        }
        return events;
    }

private:
    static std::string timestamp() {
        const auto now = std::chrono::system_clock::now();
        const std::time_t t = std::chrono::system_clock::to_time_t(now);
        std::tm tm{};
        gmtime_r(&t, &tm);
        char buf[32];
        std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
        return buf;
    }

    std::filesystem::path path_;
    std::ofstream out_;
    std::uint64_t seq_ = 0;
};

class BookingService {
public:
    explicit BookingService(std::filesystem::path log_path, std::uint64_t snapshot_every = 100)
        : log_(std::move(log_path)), snapshot_every_(snapshot_every) {}

    std::filesystem::path snapshot_path() const { return log_.path().string() + ".snapshot.json"; }

    // POST /instance
    ServiceResponse init(const json& body, bool force) {
        std::unique_lock lock(mutex_);
        if (session_ && !force)
            return error_response(409, "session active", "a schedule is already being booked; pass force=true to reset");
        Session fresh;
        try {
            const json& doc = body.contains("instance") ? body.at("instance") : body;
            fresh.instance = instance_from_json(doc);
            fresh.auto_every = body.value("auto_improve_every", 0);
            fresh.auto_policy = parse_policy(body.value("auto_improve_policy", std::string("local")));
            if (fresh.auto_every < 0) throw std::invalid_argument("auto_improve_every must be non-negative");
            if (fresh.auto_policy == ImprovePolicy::None && fresh.auto_every > 0)
                throw std::invalid_argument("auto_improve_policy must be local or hybrid");
            fresh.travel = fresh.instance.travel();
            fresh.schedule = initialize_schedule(fleet_of(fresh.instance), fresh.instance.window_set(), fresh.travel);
        } catch (const std::exception& e) {
            return error_response(400, "invalid instance", e.what());
        }
        session_ = std::move(fresh);
        std::filesystem::remove(snapshot_path());
        log_.reset();
        log_.append("Init", session_config());
        return {201, json{{"revision", session_->schedule.revision()},
                          {"tours", session_->schedule.tours().size()},
                          {"windows", session_->schedule.windows().size()}}};
    }

    // POST /offers
    ServiceResponse offers(const json& body) {
        const auto t0 = std::chrono::steady_clock::now();
        std::shared_lock lock(mutex_);
        if (!session_) return no_session();
        Customer customer;
        try {
            customer = parse_customer(body, /*require_id=*/false);
        } catch (const std::exception& e) {
            return error_response(400, "invalid customer", e.what());
        }
        const auto offer_set = get_time_windows(session_->schedule, customer, session_->travel);
        auto response = offers_json(offer_set, customer, body.contains("id") || body.contains("customer_id"));
        lock.unlock();
        record_latency(offer_latencies_, std::chrono::steady_clock::now() - t0);
        offers_served_.fetch_add(1);
        return {200, std::move(response)};
    }

    // POST /book
    ServiceResponse book(const json& body) {
        std::unique_lock lock(mutex_);
        if (!session_) return no_session();
        auto& s = *session_;
        Customer customer;
        WindowId window{};
        std::optional<std::uint64_t> offer_revision;
        try {
            if (!body.is_object()) throw std::invalid_argument("request body must be a JSON object");
            customer = parse_customer(body.at("customer"), false);
            window = WindowId(body.at("window").get<std::uint32_t>());
            if (body.contains("offer_revision")) offer_revision = body.at("offer_revision").get<std::uint64_t>();
            if (!s.schedule.windows().rank_of(window))
                throw std::invalid_argument("unknown window id " + std::to_string(raw(window)));
            if (body.at("customer").contains("id")) {
                if (s.schedule.contains(customer.id))
                    throw std::invalid_argument("customer " + std::to_string(raw(customer.id)) + " is already booked");
            } else {
                customer.id = CustomerId(s.next_customer_id);
            }
        } catch (const std::exception& e) {
            return error_response(400, "invalid booking", e.what());
        }

        const auto revision_before = s.schedule.revision();
        const auto result = set_time_window(s.schedule, customer, window, s.travel);
        if (result.outcome == BookingOutcome::NoLongerAvailable) {
            bookings_rejected_.fetch_add(1);
            auto body409 = error_response(409, "window no longer available",
                                          "time window " + std::to_string(raw(window)) +
                                              " cannot take this order any more; choose from fresh_offers")
                               .body;
            body409["fresh_offers"] = offers_json(*result.fresh_offers, customer, true);
            return {409, std::move(body409)};
        }
        s.next_customer_id = std::max(s.next_customer_id, raw(customer.id) + 1);
        customer.assigned_window = window;
        const auto& placement = *result.applied;
        append_event("Booked", json{{"customer", customer_json(customer)},
                                    {"window", raw(window)},
                                    {"tour", raw(placement.tour)},
                                    {"gap", placement.gap},
                                    {"delta_s", placement.delta_s},
                                    {"revision", s.schedule.revision()}});
        bookings_ok_.fetch_add(1);

        json response{{"outcome", "Booked"},
                      {"customer_id", raw(customer.id)},
                      {"window", raw(window)},
                      {"tour", raw(placement.tour)},
                      {"gap", placement.gap},
                      {"delta_s", placement.delta_s},
                      {"revision", s.schedule.revision()},
                      {"stale", offer_revision && *offer_revision != revision_before}};

        if (s.auto_every > 0 && ++s.bookings_since_improvement >= s.auto_every) {
            const auto stats = run_improvement(s.auto_policy, /*automatic=*/true);
            response["auto_improvement"] = improvement_to_json(stats);
        }
        return {200, std::move(response)};
    }

    // POST /improve
    ServiceResponse improve(const json& body) {
        ImprovePolicy policy = ImprovePolicy::Local;
        try {
            policy = parse_policy(body.is_object() ? body.value("policy", std::string("local")) : std::string("local"));
            if (policy == ImprovePolicy::None) throw std::invalid_argument("policy must be local or hybrid");
        } catch (const std::exception& e) {
            return error_response(400, "invalid policy", e.what());
        }
        if (improving_.exchange(true)) return error_response(409, "improvement running", "an improvement step is already in progress");
        struct Release {
            std::atomic<bool>& flag;
            ~Release() { flag.store(false); }
        } release{improving_};
        std::unique_lock lock(mutex_);
        if (!session_) return no_session();
        const auto stats = run_improvement(policy, /*automatic=*/false);
        auto out = improvement_to_json(stats);
        out["revision"] = session_->schedule.revision();
        return {200, std::move(out)};
    }

    // GET /schedule
    ServiceResponse schedule() const {
        std::shared_lock lock(mutex_);
        if (!session_) return no_session();
        return {200, schedule_to_json(session_->schedule, session_->travel)};
    }

    // GET /metrics
    ServiceResponse metrics() const {
        json out{{"offers_served", offers_served_.load()},
                 {"bookings_ok", bookings_ok_.load()},
                 {"bookings_rejected", bookings_rejected_.load()},
                 {"improvements", improvements_.load()}};
        {
            std::lock_guard guard(metrics_mutex_);
            out["offers_recent_mean_ms"] = mean_of(offer_latencies_);
            out["improve_recent_mean_ms"] = mean_of(improve_latencies_);
        }
        std::shared_lock lock(mutex_);
        if (session_) {
            out["revision"] = session_->schedule.revision();
            out["customers"] = session_->schedule.customer_count();
            out["objective_s"] = total_travel_time(session_->schedule, session_->travel);
            out["events"] = log_.last_seq();
        }
        return {200, std::move(out)};
    }

    /// Rebuilds the session from the snapshot (if any) and the event log.
    void recover() {
        std::unique_lock lock(mutex_);
        const auto events = EventLog::read_all(log_.path());
        if (events.empty()) throw std::runtime_error("event log is empty");
        std::uint64_t applied = 0;
        std::optional<Session> restored;
        if (std::filesystem::exists(snapshot_path())) {
            std::ifstream in(snapshot_path(), std::ios::binary);
            const auto snap = json::parse(in, nullptr, /*allow_exceptions=*/false);
            if (!snap.is_discarded() && snap.value("seq", std::uint64_t{0}) <= events.back().at("seq").get<std::uint64_t>()) {
                restored = restore_snapshot(snap);
                applied = snap.at("seq").get<std::uint64_t>();
            }
        }
        for (const auto& e : events) {
            const auto seq = e.at("seq").get<std::uint64_t>();
            if (seq <= applied) continue;
            if (seq != applied + 1) throw std::runtime_error("event log has a gap before seq " + std::to_string(seq));
            apply_event(restored, e);
            applied = seq;
        }
        if (!restored) throw std::runtime_error("event log does not start with an Init event");
        session_ = std::move(restored);
        log_.resume(applied);
    }

    /// Replays a log from its Init event only, ignoring snapshots.
    static Schedule replay(const std::filesystem::path& log_path) {
        std::optional<Session> session;
        for (const auto& e : EventLog::read_all(log_path)) apply_event(session, e);
        if (!session) throw std::runtime_error("event log does not start with an Init event");
        return std::move(session->schedule);
    }

    /// Copy of the live schedule, for inspection.
    std::optional<Schedule> snapshot_schedule() const {
        std::shared_lock lock(mutex_);
        if (!session_) return std::nullopt;
        return session_->schedule;
    }

    std::optional<EuclideanTravel> travel() const {
        std::shared_lock lock(mutex_);
        if (!session_) return std::nullopt;
        return session_->travel;
    }

    std::uint64_t events() const {
        std::shared_lock lock(mutex_);
        return log_.last_seq();
    }

private:
    struct Session {
        Instance instance;
        EuclideanTravel travel;
        Schedule schedule;
        std::uint32_t next_customer_id = 0;
        int auto_every = 0;
        ImprovePolicy auto_policy = ImprovePolicy::Local;
        int bookings_since_improvement = 0;
    };

    static ServiceResponse no_session() {
        return error_response(409, "no session", "initialize a schedule with POST /instance first");
    }

    static json customer_json(const Customer& c) {
        return {{"id", raw(c.id)}, {"x_m", c.location.x_m}, {"y_m", c.location.y_m}, {"weight", c.weight}, {"service_s", c.service_s}};
    }

    /// Accepts either {"location": {"x_m", "y_m"}} or flat "x_m"/"y_m".
    static Customer parse_customer(const json& j, bool require_id) {
        if (!j.is_object()) throw std::invalid_argument("customer must be a JSON object");
        Customer c;
        const json& loc = j.contains("location") ? j.at("location") : j;
        c.location = {loc.at("x_m").get<double>(), loc.at("y_m").get<double>(), 0};
        c.weight = j.at("weight").get<double>();
        c.service_s = j.at("service_s").get<double>();
        if (j.contains("id") || j.contains("customer_id") || require_id)
            c.id = CustomerId(j.contains("id") ? j.at("id").get<std::uint32_t>() : j.at("customer_id").get<std::uint32_t>());
        if (!std::isfinite(c.location.x_m) || !std::isfinite(c.location.y_m))
            throw std::invalid_argument("location must be finite");
        if (!(c.weight > 0)) throw std::invalid_argument("weight must be positive");
        if (!(c.service_s > 0)) throw std::invalid_argument("service_s must be positive");
        return c;
    }

    json offers_json(const OfferSet& offers, const Customer& customer, bool with_id) const {
        json windows = json::array();
        json available = json::array();
        for (const auto& w : session_->schedule.windows()) {
            const Offer* o = offers.find(w.id);
            json entry{{"id", raw(w.id)}, {"label", window_label(w)}, {"start_s", w.start_s}, {"end_s", w.end_s},
                       {"available", o != nullptr}};
            if (o) {
                entry["tour"] = raw(o->best.tour);
                entry["gap"] = o->best.gap;
                entry["delta_s"] = o->best.delta_s;
                available.push_back(raw(w.id));
            }
            windows.push_back(std::move(entry));
        }
        json out{{"schedule_revision", offers.schedule_revision}, {"windows", std::move(windows)}, {"available", std::move(available)}};
        if (with_id) out["customer_id"] = raw(customer.id);
        return out;
    }

    json session_config() const {
        return {{"instance", instance_to_json(session_->instance)},
                {"auto_improve_every", session_->auto_every},
                {"auto_improve_policy", to_string(session_->auto_policy)}};
    }

    ImprovementStats run_improvement(ImprovePolicy policy, bool automatic) {
        auto& s = *session_;
        const auto t0 = std::chrono::steady_clock::now();
        ImprovementStats stats;
        if (policy == ImprovePolicy::Hybrid) {
            stats = improve_hybrid(s.schedule, s.travel);
        } else {
            stats = improve_local(s.schedule, s.travel);
            s.schedule.take_dirty();
        }
        record_latency(improve_latencies_, std::chrono::steady_clock::now() - t0);
        improvements_.fetch_add(1);
        s.bookings_since_improvement = 0;

        json tours = json::array();
        for (auto id : stats.changed_tours) {
            const auto& t = s.schedule.tour(*s.schedule.index_of(id));
            json visits = json::array();
            for (const auto& stop : t.stops()) visits.push_back(raw(stop.id));
            tours.push_back({{"id", raw(id)}, {"visits", std::move(visits)}});
        }
        append_event("Improved", json{{"policy", to_string(policy)},
                                      {"automatic", automatic},
                                      {"stats", improvement_to_json(stats)},
                                      {"tours", std::move(tours)},
                                      {"revision", s.schedule.revision()}});
        return stats;
    }

    void append_event(const std::string& kind, json payload) {
        const auto seq = log_.append(kind, std::move(payload));
        if (snapshot_every_ > 0 && seq % snapshot_every_ == 0) write_snapshot(seq);
    }

    void write_snapshot(std::uint64_t seq) const {
        const auto& s = *session_;
        json tours = json::array();
        for (const auto& t : s.schedule.tours()) {
            json visits = json::array();
            for (const auto& stop : t.stops()) visits.push_back(stop_to_json(stop));
            tours.push_back({{"id", raw(t.id())}, {"visits", std::move(visits)}});
        }
        json snap{{"seq", seq},
                  {"config", session_config()},
                  {"next_customer_id", s.next_customer_id},
                  {"bookings_since_improvement", s.bookings_since_improvement},
                  {"revision", s.schedule.revision()},
                  {"tours", std::move(tours)}};
        const auto tmp = snapshot_path().string() + ".tmp";
        {
            std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
            out << snap.dump() << '\n';
        }
        std::filesystem::rename(tmp, snapshot_path());
    }

    static Session session_from_config(const json& config) {
        Session s;
        s.instance = instance_from_json(config.at("instance"));
        s.auto_every = config.value("auto_improve_every", 0);
        s.auto_policy = parse_policy(config.value("auto_improve_policy", std::string("local")));
        s.travel = s.instance.travel();
        s.schedule = initialize_schedule(fleet_of(s.instance), s.instance.window_set(), s.travel);
        return s;
    }

    static Session restore_snapshot(const json& snap) {
        Session s = session_from_config(snap.at("config"));
        s.next_customer_id = snap.at("next_customer_id").get<std::uint32_t>();
        s.bookings_since_improvement = snap.at("bookings_since_improvement").get<int>();
        for (const auto& tj : snap.at("tours")) {
            auto& tour = s.schedule.tour(*s.schedule.index_of(TourId(tj.at("id").get<std::uint32_t>())));
            std::vector<Stop> stops;
            for (const auto& v : tj.at("visits")) {
                Customer c;
                c.id = CustomerId(v.at("customer").get<std::uint32_t>());
                c.location = {v.at("x_m").get<double>(), v.at("y_m").get<double>(), 0};
                c.weight = v.at("weight").get<double>();
                c.service_s = v.at("service_s").get<double>();
                stops.push_back(make_stop(c, s.schedule.windows(), WindowId(v.at("window").get<std::uint32_t>())));
            }
            tour.assign(std::move(stops), s.travel);
        }
        s.schedule.set_revision(snap.at("revision").get<std::uint64_t>());
        return s;
    }

    static void apply_event(std::optional<Session>& session, const json& e) {
        const auto kind = e.at("kind").get<std::string>();
        const auto& p = e.at("payload");
        if (kind == "Init") {
            session = session_from_config(p);
            return;
        }
        if (!session) throw std::runtime_error("event log does not start with an Init event");
        auto& s = *session;
        if (kind == "Booked") {
            const auto customer = parse_customer(p.at("customer"), true);
            const auto window = WindowId(p.at("window").get<std::uint32_t>());
            auto stop = make_stop(customer, s.schedule.windows(), window);
            const auto index = s.schedule.index_of(TourId(p.at("tour").get<std::uint32_t>()));
            if (!index) throw std::runtime_error("Booked event names an unknown tour");
            Placement placement{*index, s.schedule.tour(*index).id(), p.at("gap").get<std::size_t>(),
                                p.at("delta_s").get<double>()};
            apply_placement(s.schedule, placement, std::move(stop), s.travel);
            s.next_customer_id = std::max(s.next_customer_id, raw(customer.id) + 1);
            ++s.bookings_since_improvement;
        } else if (kind == "Improved") {
            // Customers only move among the listed tours.
            std::map<CustomerId, Stop> pool;
            std::vector<std::size_t> touched;
            for (const auto& tj : p.at("tours")) {
                const auto index = s.schedule.index_of(TourId(tj.at("id").get<std::uint32_t>()));
                if (!index) throw std::runtime_error("Improved event names an unknown tour");
                touched.push_back(*index);
                for (const auto& stop : s.schedule.tour(*index).stops()) pool.emplace(stop.id, stop);
            }
            std::size_t k = 0;
            for (const auto& tj : p.at("tours")) {
                std::vector<Stop> stops;
                for (const auto& id : tj.at("visits")) {
                    auto it = pool.find(CustomerId(id.get<std::uint32_t>()));
                    if (it == pool.end()) throw std::runtime_error("Improved event moves an unknown customer");
                    stops.push_back(it->second);
                    pool.erase(it);
                }
                s.schedule.tour(touched[k++]).assign(std::move(stops), s.travel);
            }
            if (!pool.empty()) throw std::runtime_error("Improved event drops customers");
            s.schedule.take_dirty();
            s.schedule.set_revision(p.at("revision").get<std::uint64_t>());
            s.bookings_since_improvement = 0;
        } else {
            throw std::runtime_error("unknown event kind '" + kind + "'");
        }
    }

    void record_latency(std::deque<double>& window, std::chrono::steady_clock::duration d) const {
        std::lock_guard guard(metrics_mutex_);
        window.push_back(std::chrono::duration<double, std::milli>(d).count());
        if (window.size() > kRollingWindow) window.pop_front();
    }

    static double mean_of(const std::deque<double>& xs) {
        if (xs.empty()) return 0.0;
        double s = 0;
        for (double x : xs) s += x;
        return s / static_cast<double>(xs.size());
    }

    static constexpr std::size_t kRollingWindow = 100;

    mutable std::shared_mutex mutex_;
    std::optional<Session> session_;
    EventLog log_;
    std::uint64_t snapshot_every_;
    std::atomic<bool> improving_{false};

    mutable std::mutex metrics_mutex_;
    mutable std::deque<double> offer_latencies_;
    mutable std::deque<double> improve_latencies_;
    std::atomic<std::uint64_t> offers_served_{0};
    std::atomic<std::uint64_t> bookings_ok_{0};
    std::atomic<std::uint64_t> bookings_rejected_{0};
    std::atomic<std::uint64_t> improvements_{0};
};

/// Registers the JSON endpoints on an httplib server.
inline void mount_routes(httplib::Server& server, BookingService& service) {
    auto send = [](httplib::Response& res, const ServiceResponse& r) {
        res.status = r.status;
        res.set_content(r.body.dump(), "application/json");
    };
    auto with_body = [send](auto handler) {
        return [send, handler](const httplib::Request& req, httplib::Response& res) {
            json body = req.body.empty() ? json::object() : json::parse(req.body, nullptr, false);
            if (body.is_discarded()) return send(res, error_response(400, "malformed JSON", "request body is not valid JSON"));
            send(res, handler(req, body));
        };
    };
    server.Post("/instance", with_body([&service](const httplib::Request& req, const json& body) {
                    const bool force = req.has_param("force") && req.get_param_value("force") == "true";
                    return service.init(body, force);
                }));
    server.Post("/offers", with_body([&service](const httplib::Request&, const json& body) { return service.offers(body); }));
    server.Post("/book", with_body([&service](const httplib::Request&, const json& body) { return service.book(body); }));
    server.Post("/improve", with_body([&service](const httplib::Request&, const json& body) { return service.improve(body); }));
    server.Get("/schedule", [&service, send](const httplib::Request&, httplib::Response& res) { send(res, service.schedule()); });
    server.Get("/metrics", [&service, send](const httplib::Request&, httplib::Response& res) { send(res, service.metrics()); });
    server.set_exception_handler([send](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
        try {
            std::rethrow_exception(ep);
        } catch (const std::exception& e) {
            send(res, error_response(500, "internal error", e.what()));
        } catch (...) {
            send(res, error_response(500, "internal error", "unknown exception"));
        }
    });
}

}  // namespace ahd
