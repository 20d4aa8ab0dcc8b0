// decaycert: certify, simulate and cross-check decay bounds from JSON scenarios.
//
//   decaycert <certify|simulate|synthesize|discrete|end2end> <scenario.json>... [options]
//
// Exit codes: 0 pass, 1 fail/infeasible, 2 parse error, 3 validation error, 4 I/O error.
// With several scenario files each one writes into its own subdirectory of --out.

#include <algorithm>
#include <atomic>
#include <iostream>
#include <map>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "decaycert/runner.hpp"

namespace
{

struct Job
{
  std::filesystem::path file;
  decaycert::ScenarioOverrides overrides;
  int exit_code = decaycert::exit_pass;
  std::string message;
};

void execute(Job& job, decaycert::Mode mode)
{
  try
  {
    const auto scenario = decaycert::load_scenario(job.file, mode, job.overrides);
    const auto result = decaycert::run(scenario);
    job.exit_code = result.exit_code;
    job.message = fmt::format("{}: {} ({})", job.file.string(), result.exit_code == 0 ? "PASS" : "FAIL",
                              scenario.output.string());
  }
  catch (const decaycert::ScenarioError& e)
  {
    job.exit_code = e.code();
    job.message = fmt::format("{}: error: {}", job.file.string(), e.what());
  }
  catch (const std::exception& e)
  {
    job.exit_code = decaycert::exit_validation;
    job.message = fmt::format("{}: error: {}", job.file.string(), e.what());
  }
}

} // namespace

int main(int argc, char** argv)
{
  CLI::App app{"Certify large-time decay bounds for dissipative evolution problems"};

  std::string mode_name;
  std::vector<std::string> files;
  std::optional<std::string> out_dir;
  std::optional<long long> grid_points;
  std::optional<double> t_end;
  std::optional<double> tol;
  unsigned jobs = 1;

  app.add_option("mode", mode_name, "Pipeline to run")
      ->required()
      ->check(CLI::IsMember({"certify", "simulate", "synthesize", "discrete", "end2end"}));
  app.add_option("scenario", files, "Scenario file(s)")->required()->check(CLI::ExistingFile);
  app.add_option("--out", out_dir, "Output directory");
  app.add_option("--grid-points", grid_points, "Number of grid points");
  app.add_option("--t-end", t_end, "Grid horizon");
  app.add_option("--tol", tol, "Absolute tolerance on slacks");
  app.add_option("--jobs", jobs, "Scenarios to run concurrently")->check(CLI::PositiveNumber);

  try
  {
    app.parse(argc, argv);
  }
  catch (const CLI::ParseError& e)
  {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : decaycert::exit_parse;
  }

  const auto mode = *decaycert::parse_mode(mode_name);
  std::vector<Job> batch(files.size());
  std::map<std::string, int> seen;
  for (std::size_t i = 0; i < files.size(); ++i)
  {
    auto& job = batch[i];
    job.file = files[i];
    job.overrides.grid_points = grid_points;
    job.overrides.t_end = t_end;
    job.overrides.tol = tol;
    if (out_dir)
    {
      if (files.size() == 1)
        job.overrides.output = *out_dir;
      else
      {
        std::string stem = job.file.stem().string();
        if (const int n = seen[stem]++; n > 0)
          stem += "-" + std::to_string(n);
        job.overrides.output = std::filesystem::path(*out_dir) / stem;
      }
    }
  }

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < batch.size(); i = next++)
      execute(batch[i], mode);
  };
  const unsigned workers = std::min<unsigned>(jobs, static_cast<unsigned>(batch.size()));
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < workers; ++w)
    pool.emplace_back(worker);
  worker();
  for (auto& t : pool)
    t.join();

  int rc = 0;
  for (const auto& job : batch)
  {
    (job.exit_code == 0 ? std::cout : std::cerr) << job.message << '\n';
    rc = std::max(rc, job.exit_code);
  }
  return rc;
}
