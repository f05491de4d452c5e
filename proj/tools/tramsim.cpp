// tramsim: map building, scenario validation, closed-loop runs and log reports.

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/spdlog.h>

#include "tram/errors.hpp"
#include "tram/map_io.hpp"
#include "tram/metrics.hpp"
#include "tram/simulator.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace
{

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitSafetyFault = 3;

int cmd_map_build(const fs::path& trajectory, const fs::path& elements_path, double tolerance, const fs::path& out)
{
  if (!(tolerance > 0.0))
  {
    std::cerr << "error: --tolerance must be > 0\n";
    return kExitValidation;
  }
  try
  {
    const auto points = tram::map::read_trajectory_csv(trajectory);
    std::ifstream in(elements_path);
    if (!in)
      throw tram::ValidationError({elements_path.string() + ": cannot open"});
    json doc;
    try
    {
      doc = json::parse(in);
    }
    catch (const json::parse_error& e)
    {
      throw tram::ValidationError({elements_path.string() + ": " + e.what()});
    }
    const json& list = doc.is_object() && doc.contains("elements") ? doc.at("elements") : doc;
    auto elements = tram::map::elements_from_json(list, {}, "$.elements");
    const auto map = tram::map::build_map(points, tolerance, std::move(elements));

    std::ofstream o(out);
    if (!o)
      throw tram::ValidationError({out.string() + ": cannot write"});
    o << tram::map::to_json(map).dump(2) << '\n';

    const double reduction = points.empty() ? 0.0 : 100.0 * (1.0 - double(map.points().size()) / double(points.size()));
    std::cout << "points: " << points.size() << " -> " << map.points().size() << " (" << reduction
              << "% reduction)\n"
              << "length: " << map.total_length() << " m, elements: " << map.elements().size() << '\n';
    return kExitOk;
  }
  catch (const tram::ParseError& e)
  {
    std::cerr << "error: " << trajectory.string() << ": " << e.what() << '\n';
  }
  catch (const tram::ValidationError& e)
  {
    for (const auto& issue : e.issues())
      std::cerr << "error: " << issue << '\n';
  }
  catch (const std::exception& e)
  {
    std::cerr << "error: " << e.what() << '\n';
  }
  return kExitValidation;
}

int cmd_validate(const fs::path& scenario)
{
  try
  {
    const auto sc = tram::sim::load_scenario(scenario);
    std::cout << scenario.string() << ": ok (" << sc.name << ", " << sc.map->elements().size() << " elements, "
              << sc.actors.size() << " actors)\n";
    return kExitOk;
  }
  catch (const tram::ValidationError& e)
  {
    for (const auto& issue : e.issues())
      std::cerr << scenario.string() << ": " << issue << '\n';
    return kExitValidation;
  }
}

std::optional<std::uint64_t> env_seed()
{
  const char* v = std::getenv("TRAM_SIM_SEED");
  if (!v || !*v)
    return std::nullopt;
  try
  {
    return std::stoull(v);
  }
  catch (const std::exception&)
  {
    spdlog::warn("ignoring TRAM_SIM_SEED='{}': not an unsigned integer", v);
    return std::nullopt;
  }
}

int run_one(const fs::path& scenario_path, const fs::path& out_dir, std::optional<std::uint64_t> seed,
            bool conservative, std::mutex& io)
{
  tram::sim::Scenario sc;
  try
  {
    sc = tram::sim::load_scenario(scenario_path);
  }
  catch (const tram::ValidationError& e)
  {
    std::lock_guard lock(io);
    for (const auto& issue : e.issues())
      std::cerr << scenario_path.string() << ": " << issue << '\n';
    return kExitValidation;
  }

  tram::sim::RunOptions opts;
  opts.seed = seed;
  if (conservative)
    opts.conservative_freespace = true;

  const auto start = std::chrono::steady_clock::now();
  tram::sim::RunResult result;
  try
  {
    result = tram::sim::run_scenario(sc, opts);
  }
  catch (const std::exception& e)
  {
    std::lock_guard lock(io);
    std::cerr << scenario_path.string() << ": run aborted: " << e.what() << '\n';
    return kExitValidation;
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  fs::create_directories(out_dir);
  result.log.write(out_dir / "events.jsonl");
  const json report{{"metrics", result.metrics.to_json()},
                    {"events_sha", result.log.hash_hex()},
                    {"seed", seed.value_or(sc.seed)},
                    {"runtime",
                     {{"wall_seconds", wall},
                      {"per_tick_ms", result.metrics.ticks ? 1000.0 * wall / double(result.metrics.ticks) : 0.0}}}};
  std::ofstream(out_dir / "report.json") << report.dump(2) << '\n';

  std::lock_guard lock(io);
  std::cout << sc.name << ": " << result.metrics.status << ", " << result.metrics.ticks << " ticks, "
            << result.metrics.signal_pass_violations << " signal violations, " << result.metrics.safety_faults
            << " safety faults -> " << out_dir.string() << '\n';
  return result.exit_code();
}

int cmd_run(const std::vector<fs::path>& scenarios, const fs::path& out, std::optional<std::uint64_t> seed,
            bool conservative, unsigned jobs)
{
  if (!seed)
    seed = env_seed();
  std::mutex io;
  std::vector<int> codes(scenarios.size(), kExitOk);
  auto out_for = [&](std::size_t i) {
    return scenarios.size() == 1 ? out : out / scenarios[i].stem();
  };

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < scenarios.size(); i = next++)
      codes[i] = run_one(scenarios[i], out_for(i), seed, conservative, io);
  };
  std::vector<std::thread> pool;
  for (unsigned k = 1; k < std::max(1u, jobs) && k < scenarios.size(); ++k)
    pool.emplace_back(worker);
  worker();
  for (auto& th : pool)
    th.join();

  int code = kExitOk;
  for (int c : codes)
    code = std::max(code, c);
  return code;
}

int cmd_report(const fs::path& log_path, const std::string& csv)
{
  std::ifstream in(log_path);
  if (!in)
  {
    std::cerr << "error: cannot open " << log_path.string() << '\n';
    return kExitValidation;
  }
  try
  {
    const auto acc = tram::sim::summarize_log(in, !csv.empty());
    std::cout << acc.report().to_json().dump(2) << '\n';
    if (csv == "-")
      tram::sim::write_csv(std::cout, acc.series());
    else if (!csv.empty())
    {
      std::ofstream o(csv);
      tram::sim::write_csv(o, acc.series());
    }
    return kExitOk;
  }
  catch (const tram::ParseError& e)
  {
    std::cerr << "error: " << log_path.string() << ": " << e.what() << '\n';
    return kExitValidation;
  }
}

} // namespace

int main(int argc, char** argv)
{
  CLI::App app{"Tram automation simulator"};
  app.require_subcommand(1);

  auto* map_cmd = app.add_subcommand("map", "Track map tools");
  map_cmd->require_subcommand(1);
  auto* build = map_cmd->add_subcommand("build", "Simplify a surveyed trajectory and attach elements");
  fs::path traj, elements, map_out = "map.json";
  double tolerance = 0.1;
  build->add_option("trajectory", traj, "Trajectory CSV (x_m,y_m)")->required();
  build->add_option("elements", elements, "Infrastructure elements JSON")->required();
  build->add_option("--tolerance", tolerance, "Simplification tolerance in metres");
  build->add_option("--out", map_out, "Output map JSON");

  auto* validate = app.add_subcommand("validate", "Validate a scenario file");
  fs::path validate_path;
  validate->add_option("scenario", validate_path)->required();

  auto* run = app.add_subcommand("run", "Run one or more scenarios");
  std::vector<fs::path> scenarios;
  fs::path run_out = "out";
  std::optional<std::uint64_t> seed;
  bool conservative = false;
  unsigned jobs = 1;
  run->add_option("scenario", scenarios)->required();
  run->add_option("--seed", seed, "Seed override (beats TRAM_SIM_SEED and the scenario seed)");
  run->add_option("--out", run_out, "Output directory");
  run->add_flag("--conservative-freespace", conservative, "Treat occluded areas as occupied");
  run->add_option("--jobs", jobs, "Scenarios to run in parallel")->check(CLI::PositiveNumber);

  auto* report = app.add_subcommand("report", "Summarise an event log");
  fs::path log_path;
  std::string csv;
  report->add_option("events", log_path)->required();
  report->add_option("--csv", csv, "Write per-tick t,s,v,mal,bell columns ('-' for stdout)");

  try
  {
    app.parse(argc, argv);
  }
  catch (const CLI::ParseError& e)
  {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  if (*build)
    return cmd_map_build(traj, elements, tolerance, map_out);
  if (*validate)
    return cmd_validate(validate_path);
  if (*run)
    return cmd_run(scenarios, run_out, seed, conservative, jobs);
  if (*report)
    return cmd_report(log_path, csv);
  return kExitValidation;
}
