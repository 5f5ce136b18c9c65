#pragma once

#include <lpmap/bench/scenario.hpp>

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace lpmap::bench {

inline constexpr const char* kCsvHeader =
    "scenario,variant,threads,ops,param_s,param_wp,seed,rep,wall_ms,mops,capacity_final,mem_bytes,oracle_pass";

struct CsvRow {
  std::string scenario;
  std::string variant;
  unsigned threads = 0;
  std::uint64_t ops = 0;
  double param_s = 0;
  double param_wp = 0;
  std::uint64_t seed = 0;
  /// Repetition number, or "mean" for the summary row.
  std::string rep;
  double wall_ms = 0;
  double mops = 0;
  std::size_t capacity_final = 0;
  std::size_t mem_bytes = 0;
  bool oracle_pass = false;

  friend bool operator==(const CsvRow&, const CsvRow&) = default;
};

/// One row per repetition, plus a "mean" row when there is more than one.
std::vector<CsvRow> to_rows(const RunResult& result);

std::string format_row(const CsvRow& row);
CsvRow parse_row(const std::string& line);

/// Appends the rows of `results` to `path`, writing the header first if the
/// file is new or empty. Throws std::runtime_error if the file can't be written.
void emit_csv(std::span<const RunResult> results, const std::filesystem::path& path);

/// Reads a file written by emit_csv.
std::vector<CsvRow> parse_csv(const std::filesystem::path& path);

/// Appends run metadata that has no CSV column (pinning, generator, oracle
/// failure records) to `path` as key=value lines.
void emit_metadata(std::span<const RunResult> results, const std::filesystem::path& path);

}  // namespace lpmap::bench
