#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace lpmap::bench {

/// Operations handed out per claim of the shared work counter.
inline constexpr std::uint64_t kWorkBlock = 4096;

enum class ScenarioKind {
  insert_prealloc,
  insert_grow,
  find_succ,
  find_unsucc,
  contention_update,
  contention_find,
  aggregation,
  deletion_window,
  mixed,
};

enum class Variant { folklore, uaGrow, usGrow, paGrow, psGrow, sequential };

std::optional<ScenarioKind> parse_kind(std::string_view name);
std::optional<Variant> parse_variant(std::string_view name);
std::string_view to_string(ScenarioKind kind);
std::string_view to_string(Variant variant);

struct Scenario {
  ScenarioKind kind = ScenarioKind::insert_grow;
  Variant variant = Variant::uaGrow;
  unsigned threads = 1;
  std::uint64_t ops = 1'000'000;
  /// Elements inserted before timing starts. Defaults depend on the scenario.
  std::optional<std::uint64_t> prefill;
  /// Initial capacity. Defaults depend on the scenario.
  std::optional<std::size_t> capacity;
  double zipf_s = 1.0;
  std::uint64_t zipf_n = 1'000'000;
  double wp = 0.5;
  std::uint64_t window = 10'000;
  std::uint64_t seed = 1;
  unsigned reps = 5;
  bool verify = true;
  bool pin = true;
  /// Quiescent checks of the deletion scenario.
  unsigned checkpoints = 10;
};

/// Empty if the scenario can be run, otherwise what is wrong with it.
std::string validate(const Scenario& scenario);

struct RepResult {
  unsigned rep = 0;
  double wall_ms = 0;
  double mops = 0;
  std::size_t capacity_final = 0;
  std::size_t mem_bytes = 0;
  bool oracle_pass = true;
  /// First oracle failure, empty on success or with verification off.
  std::string failure;
  /// Checks that were skipped and why; empty if none.
  std::string note;
  std::uint64_t ops_executed = 0;
  std::uint64_t finds = 0;
  std::uint64_t unsuccessful_finds = 0;
  std::size_t migrations = 0;
};

struct RunResult {
  Scenario scenario;
  std::vector<RepResult> reps;
  bool pinned = false;
  /// How the key sequences were produced.
  std::string provenance;

  double mean_wall_ms() const;
  /// ops / mean wall time, in million operations per second.
  double mops() const;
  bool oracle_pass() const;
};

/// Runs every repetition of `scenario`, rebuilding the table each time. Key
/// sequences are generated once, before any timing.
RunResult run(const Scenario& scenario);

}  // namespace lpmap::bench
