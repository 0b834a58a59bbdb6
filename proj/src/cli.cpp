#include "vservo/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "vservo/config.hpp"
#include "vservo/errors.hpp"
#include "vservo/image_io.hpp"
#include "vservo/selfcheck.hpp"
#include "vservo/sim.hpp"

namespace vservo::cli {
namespace {

namespace fs = std::filesystem;

struct RunOptions {
  std::vector<std::string> configs;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> overrides;
  int jobs = 1;
  bool dump_frames = false;
};

struct MetricsOptions {
  std::string trace;
  int width = 320;
  int height = 240;
  std::size_t lost_frames = 25;
  bool json = false;
};

struct Job {
  std::string config_path;  // empty: built-in defaults
  fs::path out_dir;
  int status = kExitOk;
  std::string report;
  std::string error;
};

int classify(const std::exception_ptr& ep, std::string& message) {
  try {
    std::rethrow_exception(ep);
  } catch (const ConfigError& e) {
    message = e.what();
    return kExitConfig;
  } catch (const IoError& e) {
    message = std::string("i/o error: ") + e.what();
    return kExitIo;
  } catch (const fs::filesystem_error& e) {
    message = std::string("i/o error: ") + e.what();
    return kExitIo;
  } catch (const std::exception& e) {
    message = std::string("error: ") + e.what();
    return kExitFailure;
  }
}

sim::ScenarioConfig resolve_config(const Job& job, const RunOptions& opt) {
  sim::ScenarioConfig cfg;
  if (!job.config_path.empty()) cfg = config::load(job.config_path);
  const auto env = config::process_environment();
  config::apply_environment(cfg, env);
  for (const auto& o : opt.overrides) config::apply_override(cfg, o);
  if (opt.seed) cfg.seed = *opt.seed;
  cfg.validate();
  return cfg;
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot write '" + path.string() + "'");
  return os;
}

void finish_output(std::ofstream& os, const fs::path& path) {
  os.close();
  if (!os) throw IoError("failed writing '" + path.string() + "'");
}

void execute(Job& job, const RunOptions& opt) {
  const auto cfg = resolve_config(job, opt);
  fs::create_directories(job.out_dir);

  sim::FrameSink sink;
  if (opt.dump_frames) {
    const fs::path frames = job.out_dir / "frames";
    fs::create_directories(frames);
    sink = [frames](std::size_t i, const imaging::Frame& frame) {
      char name[32];
      std::snprintf(name, sizeof name, "frame_%05zu.ppm", i);
      imaging::save_ppm(frames / name, frame);
    };
  }
  const auto result = sim::run_scenario(cfg, sink);

  const auto write = [&](const char* name, auto&& body) {
    const fs::path path = job.out_dir / name;
    auto os = open_output(path);
    body(os);
    finish_output(os, path);
  };
  write("config.resolved.cfg", [&](std::ostream& os) { os << config::dump(cfg); });
  write("trace.csv", [&](std::ostream& os) { sim::write_trace_csv(os, result.trace); });
  write("metrics.json", [&](std::ostream& os) { sim::write_metrics_json(os, result.metrics); });
  write("metrics.txt", [&](std::ostream& os) { sim::write_metrics_text(os, result.metrics); });

  std::ostringstream report;
  report << "scenario: " << (job.config_path.empty() ? "<defaults>" : job.config_path) << '\n'
         << "output: " << job.out_dir.string() << '\n';
  sim::write_metrics_text(report, result.metrics);
  job.report = report.str();
}

int do_run(const RunOptions& opt, std::ostream& out, std::ostream& err) {
  std::vector<Job> jobs;
  const fs::path root = opt.out_dir;
  if (opt.configs.size() <= 1) {
    jobs.push_back({opt.configs.empty() ? "" : opt.configs.front(), root, kExitOk, {}, {}});
  } else {
    std::set<std::string> stems;
    for (const auto& c : opt.configs) {
      const std::string stem = fs::path(c).stem().string();
      if (!stems.insert(stem).second) {
        err << "error: two configs share the name '" << stem
            << "'; their outputs would collide under " << root.string() << '\n';
        return kExitConfig;
      }
      jobs.push_back({c, root / stem, kExitOk, {}, {}});
    }
  }

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < jobs.size();) {
      try {
        execute(jobs[i], opt);
      } catch (...) {
        jobs[i].status = classify(std::current_exception(), jobs[i].error);
      }
    }
  };
  const auto workers =
      static_cast<std::size_t>(std::clamp<int>(opt.jobs, 1, static_cast<int>(jobs.size())));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t i = 0; i < workers; ++i) pool.emplace_back(worker);
  }

  int status = kExitOk;
  for (const auto& job : jobs) {
    if (job.status == kExitOk) {
      out << job.report;
    } else {
      err << job.error << '\n';
      if (status == kExitOk) status = job.status;
    }
  }
  return status;
}

int do_selfcheck(double tolerance, std::ostream& out) {
  selfcheck::Options options;
  options.normalization_tolerance = tolerance;
  bool all = true;
  for (const auto& r : selfcheck::run(options)) {
    out << (r.passed ? "PASS  " : "FAIL  ") << r.name;
    if (!r.detail.empty()) out << "  (" << r.detail << ")";
    out << '\n';
    all = all && r.passed;
  }
  return all ? kExitOk : kExitFailure;
}

int do_metrics(const MetricsOptions& opt, std::ostream& out, std::ostream& err) {
  try {
    std::ifstream in(opt.trace, std::ios::binary);
    if (!in) throw IoError("cannot open trace '" + opt.trace + "'");
    const auto rows = sim::read_trace_csv(in);
    const auto m = sim::compute_metrics(rows, {opt.width, opt.height, opt.lost_frames});
    if (opt.json) {
      sim::write_metrics_json(out, m);
    } else {
      sim::write_metrics_text(out, m);
    }
    return kExitOk;
  } catch (...) {
    std::string message;
    const int code = classify(std::current_exception(), message);
    err << message << '\n';
    return code;
  }
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Image-based visual servoing: closed-loop simulator and self-checks", "vservo"};
  app.require_subcommand(1);

  RunOptions run;
  auto* run_cmd = app.add_subcommand("run", "Simulate one or more scenario configs");
  run_cmd->add_option("config", run.configs,
                      "Scenario config files (none: built-in defaults). Environment variables "
                      "VSERVO_<SECTION>__<KEY> override file values; --set overrides both");
  run_cmd->add_option("--out", run.out_dir, "Output directory")->required();
  run_cmd->add_option("--seed", run.seed, "Override the scenario seed");
  run_cmd->add_option("--set", run.overrides, "Override one key, as key=value (repeatable)")
      ->allow_extra_args(false);
  run_cmd->add_option("--jobs", run.jobs, "Scenarios to run in parallel")
      ->check(CLI::PositiveNumber);
  run_cmd->add_flag("--dump-frames", run.dump_frames, "Write every rendered frame as PPM");

  double tolerance = 1e-6;
  auto* check_cmd = app.add_subcommand("selfcheck", "Verify the control laws and invariants");
  check_cmd->add_option("--normalization-tolerance", tolerance)->group("");

  MetricsOptions metrics;
  auto* metrics_cmd = app.add_subcommand("metrics", "Recompute metrics from a trace CSV");
  metrics_cmd->add_option("trace", metrics.trace, "trace.csv written by 'run'")->required();
  metrics_cmd->add_option("--width", metrics.width, "Frame width (px)")->check(CLI::PositiveNumber);
  metrics_cmd->add_option("--height", metrics.height, "Frame height (px)")
      ->check(CLI::PositiveNumber);
  metrics_cmd->add_option("--lost-frames", metrics.lost_frames,
                          "Consecutive undetected frames that count as lost")
      ->check(CLI::PositiveNumber);
  metrics_cmd->add_flag("--json", metrics.json, "Print JSON instead of key: value text");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  if (*run_cmd) {
    try {
      return do_run(run, out, err);
    } catch (...) {
      std::string message;
      const int code = classify(std::current_exception(), message);
      err << message << '\n';
      return code;
    }
  }
  if (*check_cmd) return do_selfcheck(tolerance, out);
  return do_metrics(metrics, out, err);
}

}  // namespace vservo::cli
