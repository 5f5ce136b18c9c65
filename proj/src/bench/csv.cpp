#include <lpmap/bench/csv.hpp>

#include <lpmap/workload.hpp>

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace lpmap::bench {

namespace {

// Shortest representation that parses back to the same double.
std::string number(double x) {
  char buffer[64];
  const auto [end, ec] = std::to_chars(buffer, buffer + sizeof buffer, x);
  return std::string(buffer, end);
}

template <class T>
T parse_number(const std::string& field, const char* column) {
  T value{};
  const auto [end, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc{} || end != field.data() + field.size()) {
    throw std::runtime_error(std::string("bad value for ") + column + ": '" + field + "'");
  }
  return value;
}

CsvRow base_row(const Scenario& s) {
  CsvRow row;
  row.scenario = to_string(s.kind);
  row.variant = to_string(s.variant);
  row.threads = s.threads;
  row.ops = s.ops;
  row.param_s = s.zipf_s;
  row.param_wp = s.wp;
  row.seed = s.seed;
  return row;
}

}  // namespace

std::vector<CsvRow> to_rows(const RunResult& result) {
  std::vector<CsvRow> rows;
  for (const RepResult& rep : result.reps) {
    CsvRow row = base_row(result.scenario);
    row.rep = std::to_string(rep.rep);
    row.wall_ms = rep.wall_ms;
    row.mops = rep.mops;
    row.capacity_final = rep.capacity_final;
    row.mem_bytes = rep.mem_bytes;
    row.oracle_pass = rep.oracle_pass;
    rows.push_back(std::move(row));
  }
  if (result.reps.size() > 1) {
    CsvRow row = base_row(result.scenario);
    row.rep = "mean";
    row.wall_ms = result.mean_wall_ms();
    row.mops = result.mops();
    row.capacity_final = result.reps.back().capacity_final;
    row.mem_bytes = result.reps.back().mem_bytes;
    row.oracle_pass = result.oracle_pass();
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string format_row(const CsvRow& row) {
  std::ostringstream out;
  out << row.scenario << ',' << row.variant << ',' << row.threads << ',' << row.ops << ',' << number(row.param_s)
      << ',' << number(row.param_wp) << ',' << row.seed << ',' << row.rep << ',' << number(row.wall_ms) << ','
      << number(row.mops) << ',' << row.capacity_final << ',' << row.mem_bytes << ','
      << (row.oracle_pass ? "true" : "false");
  return out.str();
}

CsvRow parse_row(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream in(line);
  for (std::string field; std::getline(in, field, ',');) fields.push_back(field);
  if (fields.size() != 13) throw std::runtime_error("expected 13 columns: '" + line + "'");
  CsvRow row;
  row.scenario = fields[0];
  row.variant = fields[1];
  row.threads = parse_number<unsigned>(fields[2], "threads");
  row.ops = parse_number<std::uint64_t>(fields[3], "ops");
  row.param_s = parse_number<double>(fields[4], "param_s");
  row.param_wp = parse_number<double>(fields[5], "param_wp");
  row.seed = parse_number<std::uint64_t>(fields[6], "seed");
  row.rep = fields[7];
  row.wall_ms = parse_number<double>(fields[8], "wall_ms");
  row.mops = parse_number<double>(fields[9], "mops");
  row.capacity_final = parse_number<std::size_t>(fields[10], "capacity_final");
  row.mem_bytes = parse_number<std::size_t>(fields[11], "mem_bytes");
  if (fields[12] != "true" && fields[12] != "false") throw std::runtime_error("bad oracle_pass: " + fields[12]);
  row.oracle_pass = fields[12] == "true";
  return row;
}

void emit_csv(std::span<const RunResult> results, const std::filesystem::path& path) {
  std::error_code ec;
  const bool fresh = !std::filesystem::exists(path, ec) || std::filesystem::file_size(path, ec) == 0;
  std::ofstream out(path, std::ios::app);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  if (fresh) out << kCsvHeader << '\n';
  for (const RunResult& result : results) {
    for (const CsvRow& row : to_rows(result)) out << format_row(row) << '\n';
  }
  out.flush();
  if (!out) throw std::runtime_error("write to " + path.string() + " failed");
}

std::vector<CsvRow> parse_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) throw std::runtime_error(path.string() + ": missing header");
  std::vector<CsvRow> rows;
  while (std::getline(in, line)) {
    if (line == kCsvHeader) continue;
    if (!line.empty()) rows.push_back(parse_row(line));
  }
  return rows;
}

void emit_metadata(std::span<const RunResult> results, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::app);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  for (const RunResult& result : results) {
    const Scenario& s = result.scenario;
    out << "run scenario=" << to_string(s.kind) << " variant=" << to_string(s.variant) << " threads=" << s.threads
        << " ops=" << s.ops << " seed=" << s.seed << '\n';
    out << "  rng=" << kKeyRngName << '\n';
    out << "  keys=" << result.provenance << '\n';
    out << "  pinned=" << (result.pinned ? "yes" : "no") << '\n';
    out << "  rebuilt_per_rep=yes\n";
    out << "  verify=" << (s.verify ? "on" : "off") << '\n';
    for (const RepResult& rep : result.reps) {
      out << "  rep=" << rep.rep << " ops_executed=" << rep.ops_executed << " finds=" << rep.finds
          << " unsuccessful_finds=" << rep.unsuccessful_finds << " migrations=" << rep.migrations
          << " oracle=" << (rep.oracle_pass ? "pass" : "fail");
      if (!rep.failure.empty()) out << " failure=\"" << rep.failure << '"';
      if (!rep.note.empty()) out << " note=\"" << rep.note << '"';
      out << '\n';
    }
  }
  if (!out) throw std::runtime_error("write to " + path.string() + " failed");
}

}  // namespace lpmap::bench
