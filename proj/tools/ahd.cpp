// Command-line front end: instance generation, single simulations, batch
// experiments, and the booking service.

#include "ahd/benchgen.hpp"
#include "ahd/service.hpp"
#include "ahd/simulation.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>

namespace {

int cmd_generate(const std::string& params_file, ahd::GenerationParams params, std::uint64_t seed,
                 const std::string& out) {
    if (!params_file.empty()) {
        std::ifstream in(params_file);
        if (!in) throw ahd::InstanceError("cannot open " + params_file);
        params = nlohmann::json::parse(in).get<ahd::GenerationParams>();
    }
    params.seed = seed;
    const auto inst = ahd::generate_instance(params);
    if (out.empty() || out == "-") std::cout << ahd::serialize_instance(inst);
    else ahd::write_instance(out, inst);
    return 0;
}

int cmd_simulate(const std::string& instance_path, const std::string& improve, int every, const std::string& out,
                 bool timing) {
    const auto inst = ahd::read_instance(instance_path);
    ahd::SimulationOptions opts;
    opts.policy = ahd::parse_policy(improve);
    opts.improve_every = every;
    opts.record_timing = timing;
    const auto result = ahd::run_simulation(inst, opts);
    std::ostringstream csv;
    csv << ahd::kCsvHeader << '\n'
        << ahd::csv_line(std::filesystem::path(instance_path).stem().string(), std::to_string(inst.params.seed),
                         inst.params, opts.policy, every, result.metrics)
        << '\n';
    if (out.empty() || out == "-") {
        std::cout << csv.str();
    } else {
        std::ofstream f(out, std::ios::binary);
        if (!f) throw std::runtime_error("cannot open " + out + " for writing");
        f << csv.str();
    }
    return 0;
}

int cmd_batch(const std::string& config_path, int reps, const std::string& out, bool timing) {
    std::ifstream in(config_path);
    if (!in) throw std::runtime_error("cannot open " + config_path);
    const auto file = ahd::parse_batch_file(nlohmann::json::parse(in));
    std::vector<std::uint64_t> seeds;
    for (int i = 0; i < reps; ++i) seeds.push_back(file.base_seed + static_cast<std::uint64_t>(i));
    const auto report = ahd::run_batch(file.configs, seeds, timing);
    ahd::write_batch(report, out);
    std::cout << ahd::report_table(report);
    return 0;
}

int cmd_serve(int port, const std::string& log_path, const std::string& host, const std::string& static_dir) {
    ahd::BookingService service(log_path);
    if (std::filesystem::exists(log_path)) {
        service.recover();
        std::cerr << "recovered session from " << log_path << '\n';
    }
    httplib::Server server;
    ahd::mount_routes(server, service);
    if (!static_dir.empty() && !server.set_mount_point("/", static_dir))
        throw std::runtime_error("cannot serve static files from " + static_dir);
    std::cerr << "listening on " << host << ':' << port << '\n';
    if (!server.listen(host, port)) throw std::runtime_error("cannot listen on port " + std::to_string(port));
    return 0;
}

int env_int(const char* name, int fallback) {
    const char* v = std::getenv(name);
    return v ? std::atoi(v) : fallback;
}

std::string env_string(const char* name, std::string fallback) {
    const char* v = std::getenv(name);
    return v ? std::string(v) : fallback;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Attended home delivery ordering-phase engine"};
    app.require_subcommand(1);

    auto* gen = app.add_subcommand("generate", "Generate a benchmark instance");
    std::string params_file;
    std::string gen_out;
    std::uint64_t seed = 1;
    ahd::GenerationParams gp;
    std::string depot = "center";
    gen->add_option("--params", params_file, "JSON file with generation parameters (overrides the flags)");
    gen->add_option("--seed", seed, "Random seed")->required();
    gen->add_option("--out", gen_out, "Output path ('-' for stdout)");
    gen->add_option("--grid", gp.grid_side_m, "Grid side in meters")->capture_default_str();
    gen->add_option("--customers", gp.customer_count, "Number of customers")->capture_default_str();
    gen->add_option("--tours", gp.tour_count, "Number of tours")->capture_default_str();
    gen->add_option("--capacity", gp.tour_capacity, "Tour capacity")->capture_default_str();
    gen->add_option("--windows", gp.window_count, "Number of one-hour windows")->capture_default_str();
    gen->add_option("--depot", depot, "Depot placement")->check(CLI::IsMember({"center", "top-left"}))->capture_default_str();

    auto* sim = app.add_subcommand("simulate", "Replay an instance against the ordering engine");
    std::string instance_path;
    std::string improve = "local";
    int every = 1;
    std::string sim_out;
    bool no_timing = false;
    sim->add_option("--instance", instance_path, "Instance file")->required()->check(CLI::ExistingFile);
    sim->add_option("--improve", improve, "Improvement policy")
        ->check(CLI::IsMember({"none", "local", "hybrid"}))
        ->capture_default_str();
    sim->add_option("--every", every, "Improve after every K-th insertion")->check(CLI::PositiveNumber)->capture_default_str();
    sim->add_option("--out", sim_out, "Metrics CSV path ('-' for stdout)");
    sim->add_flag("--no-timing", no_timing, "Report zero for wall-clock metrics (byte-reproducible output)");

    auto* batch = app.add_subcommand("batch", "Run configurations over consecutive seeds");
    std::string config_path;
    int reps = 100;
    std::string batch_out = "batch-out";
    batch->add_option("--config", config_path, "Batch configuration JSON")->required()->check(CLI::ExistingFile);
    batch->add_option("--reps", reps, "Instances per configuration")->check(CLI::PositiveNumber)->capture_default_str();
    batch->add_option("--out", batch_out, "Output directory")->capture_default_str();
    batch->add_flag("--no-timing", no_timing, "Report zero for wall-clock metrics (byte-reproducible output)");

    auto* serve = app.add_subcommand("serve", "Run the HTTP booking service (PORT and LOG_PATH from the environment)");
    std::string host = "0.0.0.0";
    std::string static_dir;
    serve->add_option("--host", host, "Bind address")->capture_default_str();
    serve->add_option("--static", static_dir, "Directory of static assets served at /");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) {
            gp.depot_mode = depot == "center" ? ahd::DepotMode::Center : ahd::DepotMode::TopLeftQuadrantCenter;
            return cmd_generate(params_file, gp, seed, gen_out);
        }
        if (sim->parsed()) return cmd_simulate(instance_path, improve, every, sim_out, !no_timing);
        if (batch->parsed()) return cmd_batch(config_path, reps, batch_out, !no_timing);
        if (serve->parsed())
            return cmd_serve(env_int("PORT", 8080), env_string("LOG_PATH", "ahd-events.ndjson"), host, static_dir);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
