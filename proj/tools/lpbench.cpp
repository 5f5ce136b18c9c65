// lpbench: throughput and verification runs for the lpmap tables.

#include <lpmap/bench/csv.hpp>
#include <lpmap/bench/scenario.hpp>

#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <iostream>
#include <string>

namespace {

constexpr int kExitOracleFailure = 1;
constexpr int kExitUsage = 2;

}  // namespace

int main(int argc, char** argv) {
  using namespace lpmap::bench;

  CLI::App app{"Benchmark and verification harness for the lpmap hash tables"};
  app.set_help_flag("-h,--help", "Print this help message and exit");

  std::string scenario_name = "insert_grow";
  std::string variant_name = "uaGrow";
  Scenario s;
  std::uint64_t prefill = 0;
  std::size_t capacity = 0;
  std::string out_path;
  std::string verify = "on";
  std::string pin = "auto";

  app.add_option("--scenario", scenario_name, "Workload to run")
      ->check(CLI::IsMember({"insert_prealloc", "insert_grow", "find_succ", "find_unsucc", "contention_update",
                             "contention_find", "aggregation", "deletion_window", "mixed"}))
      ->capture_default_str();
  app.add_option("--variant", variant_name, "Table variant")
      ->check(CLI::IsMember({"folklore", "uaGrow", "usGrow", "paGrow", "psGrow", "sequential"}))
      ->capture_default_str();
  app.add_option("--threads", s.threads, "Worker threads p")->check(CLI::PositiveNumber)->capture_default_str();
  app.add_option("--ops", s.ops, "Timed operations")->check(CLI::PositiveNumber)->capture_default_str();
  auto* prefill_opt = app.add_option("--prefill", prefill, "Elements inserted before timing");
  auto* capacity_opt = app.add_option("--capacity", capacity, "Initial table capacity")->check(CLI::PositiveNumber);
  app.add_option("--zipf-s", s.zipf_s, "Zipf exponent s")->check(CLI::NonNegativeNumber)->capture_default_str();
  app.add_option("--zipf-n", s.zipf_n, "Zipf universe size N")->check(CLI::PositiveNumber)->capture_default_str();
  app.add_option("--wp", s.wp, "Insert fraction of the mixed workload")->check(CLI::Range(0.0, 1.0))->capture_default_str();
  app.add_option("--window", s.window, "Sliding window of the deletion workload")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--seed", s.seed, "Seed of all generated inputs")->capture_default_str();
  app.add_option("--reps", s.reps, "Repetitions, averaged")->check(CLI::PositiveNumber)->capture_default_str();
  app.add_option("--out", out_path, "CSV file to append to (metadata goes to <out>.meta)");
  app.add_option("--verify", verify, "Run correctness oracles")->check(CLI::IsMember({"on", "off"}))->capture_default_str();
  app.add_option("--pin", pin, "Pin worker threads")->check(CLI::IsMember({"auto", "off"}))->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  s.kind = *parse_kind(scenario_name);
  s.variant = *parse_variant(variant_name);
  if (prefill_opt->count() > 0) s.prefill = prefill;
  if (capacity_opt->count() > 0) s.capacity = capacity;
  s.verify = verify == "on";
  s.pin = pin == "auto";

  if (const std::string error = validate(s); !error.empty()) {
    std::cerr << "lpbench: " << error << '\n';
    return kExitUsage;
  }

  RunResult result;
  try {
    result = run(s);
  } catch (const std::exception& e) {
    std::cerr << "lpbench: " << e.what() << '\n';
    return kExitOracleFailure;
  }

  const RunResult results[] = {result};
  try {
    if (out_path.empty()) {
      std::cout << kCsvHeader << '\n';
      for (const CsvRow& row : to_rows(result)) std::cout << format_row(row) << '\n';
    } else {
      emit_csv(results, out_path);
      emit_metadata(results, out_path + ".meta");
    }
  } catch (const std::exception& e) {
    std::cerr << "lpbench: " << e.what() << '\n';
    return kExitUsage;
  }

  for (const RepResult& rep : result.reps) {
    if (!rep.oracle_pass) std::cerr << "lpbench: rep " << rep.rep << " failed verification: " << rep.failure << '\n';
  }
  std::fprintf(stderr, "%s/%s p=%u: %.3f Mops/s over %u rep(s), verification %s\n",
               std::string(to_string(s.kind)).c_str(), std::string(to_string(s.variant)).c_str(), s.threads,
               result.mops(), s.reps, !s.verify ? "off" : result.oracle_pass() ? "passed" : "FAILED");
  return result.oracle_pass() ? 0 : kExitOracleFailure;
}
