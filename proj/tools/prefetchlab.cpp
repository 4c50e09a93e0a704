// prefetchlab: run prefetcher simulations over traces or synthetic workloads.

#include <algorithm>
#include <atomic>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <thread>

#include "CLI11.hpp"
#include "prefetchlab/factory.hpp"
#include "prefetchlab/runner.hpp"
#include "prefetchlab/workload.hpp"

namespace fs = std::filesystem;
using namespace prefetchlab;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;

struct CommonArgs {
  std::string config_path;
  std::string trace;
  std::string workload;
  std::string out = "out";
  std::vector<std::string> sets;
};

Config load_config(const CommonArgs& a) {
  Config c = a.config_path.empty() ? Config{} : Config::load(a.config_path);
  for (const auto& s : a.sets) c.set_assignment(s);
  return c;
}

TraceSource source_of(const CommonArgs& a) {
  TraceSource s;
  if (!a.trace.empty()) s.trace = a.trace;
  if (!a.workload.empty()) s.workload = a.workload;
  return s;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

void write_reports(const fs::path& dir, const std::vector<MetricsReport>& rows) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir.string() + "': " + ec.message());
  write_file(dir / "report.json", to_json(rows));
  write_file(dir / "report.csv", to_csv(rows));
}

void add_common(CLI::App* cmd, CommonArgs& a) {
  cmd->add_option("--config", a.config_path, "key=value configuration file");
  auto* trace = cmd->add_option("--trace", a.trace, "trace file (.btrace for binary, text otherwise)");
  auto* work = cmd->add_option("--workload", a.workload, "synthetic workload, e.g. temporal:seq=1000,repeats=2");
  trace->excludes(work);
  cmd->add_option("--out", a.out, "output directory")->capture_default_str();
  cmd->add_option("--set", a.sets, "override a configuration key (key=value)");
}

int run_cmd(const CommonArgs& a) {
  const Config config = load_config(a);
  const TraceSource src = source_of(a);
  const Trace trace = load_trace_source(src, geometry_from(config));
  const MetricsReport r = simulate(config, trace, src.describe());
  write_reports(a.out, {r});
  std::cout << csv_header() << "\n" << to_csv_row(r) << "\n";
  return 0;
}

int sweep_cmd(const CommonArgs& a, const std::vector<std::string>& axes, unsigned jobs) {
  const Config base = load_config(a);
  const TraceSource src = source_of(a);
  const auto points = expand_sweep(base, axes);
  // Validate every point before spending time on simulations.
  for (const auto& p : points) make_prefetcher(p.config, geometry_from(p.config));
  const Trace trace = load_trace_source(src, geometry_from(base));

  std::vector<MetricsReport> rows(points.size());
  std::atomic<std::size_t> next{0};
  std::mutex err_mu;
  std::exception_ptr err;
  const auto worker = [&] {
    for (std::size_t i = next++; i < points.size(); i = next++) {
      try {
        rows[i] = simulate(points[i].config, trace, src.describe(), points[i].label);
      } catch (...) {
        std::lock_guard lock(err_mu);
        if (!err) err = std::current_exception();
      }
    }
  };
  const unsigned n = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(points.size())));
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < n; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);

  write_reports(a.out, rows);
  std::cout << to_csv(rows);
  return 0;
}

int gen_cmd(const std::string& spec, const std::string& out, const std::vector<std::string>& sets) {
  Config c;
  for (const auto& s : sets) c.set_assignment(s);
  write_trace(out, generate_workload(spec, geometry_from(c)));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"prefetchlab: trace-driven cache prefetcher simulator"};
  app.require_subcommand(1);

  CommonArgs run_args;
  auto* run = app.add_subcommand("run", "simulate one configuration");
  add_common(run, run_args);

  CommonArgs sweep_args;
  std::vector<std::string> axes;
  unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
  auto* sweep = app.add_subcommand("sweep", "simulate the cartesian product of parameter axes");
  add_common(sweep, sweep_args);
  sweep->add_option("--param", axes, "axis key=v1,v2,... (repeatable)")->required();
  sweep->add_option("--jobs", jobs, "parallel sweep points")->capture_default_str();

  std::string gen_spec;
  std::string gen_out;
  std::vector<std::string> gen_sets;
  auto* gen = app.add_subcommand("gen", "write a synthetic workload as a trace file");
  gen->add_option("--workload", gen_spec, "workload spec")->required();
  gen->add_option("--out", gen_out, "trace path (.btrace for binary)")->required();
  gen->add_option("--set", gen_sets, "geometry override (cache.block_size, region.blocks)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*run) return run_cmd(run_args);
    if (*sweep) return sweep_cmd(sweep_args, axes, jobs);
    if (*gen) return gen_cmd(gen_spec, gen_out, gen_sets);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kExitIo;
  } catch (const ParseError& e) {
    std::cerr << "trace error: " << e.what() << "\n";
    return kExitIo;
  }
  return 0;
}
