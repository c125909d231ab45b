#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "simopt/bench.hpp"

namespace simopt::bench {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string trace_file_name(const RunMetadata& meta) {
  return "trace_" + meta.task + "_" + std::to_string(meta.size) + "_" + meta.backend + "_rep" +
         std::to_string(meta.rep) + ".csv";
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double to_double(const std::string& s, const std::filesystem::path& path) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  require(!s.empty() && end == s.c_str() + s.size(), ErrorKind::io,
          path.string() + ": malformed number '" + s + "'");
  return v;
}

long long to_integer(const std::string& s, const std::filesystem::path& path) {
  char* end = nullptr;
  const long long v = std::strtoll(s.c_str(), &end, 10);
  require(!s.empty() && end == s.c_str() + s.size(), ErrorKind::io,
          path.string() + ": malformed integer '" + s + "'");
  return v;
}

std::ifstream open_csv(const std::filesystem::path& path, std::string_view header) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorKind::io, "cannot open " + path.string());
  std::string first;
  std::getline(in, first);
  if (!first.empty() && first.back() == '\r') first.pop_back();
  require(first == header, ErrorKind::io, path.string() + ": unexpected header '" + first + "'");
  return in;
}

}  // namespace

void write_trace_csv(const std::filesystem::path& path, const RunRecord& record) {
  std::ofstream out(path);
  require(static_cast<bool>(out), ErrorKind::io, "cannot write " + path.string());
  out << kTraceHeader << '\n';
  const auto& m = record.meta;
  const std::string prefix =
      m.task + "," + std::to_string(m.size) + "," + m.backend + "," + std::to_string(m.rep) + ",";
  for (const auto& row : record.rows)
    out << prefix << row.iteration << ',' << format_double(row.objective) << ',' << row.elapsed_ns
        << '\n';
  out.flush();
  require(static_cast<bool>(out), ErrorKind::io, "failed writing " + path.string());
}

std::vector<RunRecord> read_trace_csv(const std::filesystem::path& path) {
  auto in = open_csv(path, kTraceHeader);
  std::vector<RunRecord> records;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    require(f.size() == 7, ErrorKind::io, path.string() + ": expected 7 fields in '" + line + "'");
    RunMetadata meta{f[0], static_cast<std::size_t>(to_integer(f[1], path)), f[2],
                     static_cast<std::size_t>(to_integer(f[3], path)), 0};
    if (records.empty() || records.back().meta.task != meta.task ||
        records.back().meta.size != meta.size || records.back().meta.backend != meta.backend ||
        records.back().meta.rep != meta.rep) {
      records.emplace_back();
      records.back().meta = meta;
    }
    records.back().rows.push_back({static_cast<std::size_t>(to_integer(f[4], path)),
                                   to_double(f[5], path), to_integer(f[6], path)});
  }
  return records;
}

std::vector<RunRecord> read_trace_dir(const std::filesystem::path& dir) {
  require(std::filesystem::is_directory(dir), ErrorKind::io, dir.string() + " is not a directory");
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    const auto name = entry.path().filename().string();
    if (entry.is_regular_file() && name.starts_with("trace_") && name.ends_with(".csv"))
      files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<RunRecord> out;
  for (const auto& f : files)
    for (auto& r : read_trace_csv(f)) out.push_back(std::move(r));
  return out;
}

void write_summary_csv(const std::filesystem::path& path, const Summary& summary) {
  std::ofstream out(path);
  require(static_cast<bool>(out), ErrorKind::io, "cannot write " + path.string());
  out << kSummaryHeader << '\n';
  for (const auto& row : summary.rows) {
    out << row.task << ',' << row.size << ',' << row.backend << ',' << format_double(row.mean_time_ns)
        << ',' << format_double(row.ci2s_ns);
    for (std::size_t checkpoint : kRseCheckpoints) {
      const auto it = row.rse.find(checkpoint);
      if (it != row.rse.end() && it->second)
        out << ',' << format_double(it->second->mean) << ',' << format_double(it->second->ci2s);
      else
        out << ",,";
    }
    out << '\n';
  }
  out.flush();
  require(static_cast<bool>(out), ErrorKind::io, "failed writing " + path.string());
}

std::vector<SummaryRow> read_summary_csv(const std::filesystem::path& path) {
  auto in = open_csv(path, kSummaryHeader);
  std::vector<SummaryRow> rows;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    require(f.size() == 13, ErrorKind::io, path.string() + ": expected 13 fields in '" + line + "'");
    SummaryRow row;
    row.task = f[0];
    row.size = static_cast<std::size_t>(to_integer(f[1], path));
    row.backend = f[2];
    row.mean_time_ns = to_double(f[3], path);
    row.ci2s_ns = to_double(f[4], path);
    std::size_t col = 5;
    for (std::size_t checkpoint : kRseCheckpoints) {
      if (f[col].empty())
        row.rse[checkpoint] = std::nullopt;
      else
        row.rse[checkpoint] = MeanCi{to_double(f[col], path), to_double(f[col + 1], path)};
      col += 2;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

Summary summarize_dir(const std::filesystem::path& dir) {
  const auto records = read_trace_dir(dir);
  require(!records.empty(), ErrorKind::io, "no trace CSVs found in " + dir.string());
  Summary summary = summarize(records);
  write_summary_csv(dir / "summary.csv", summary);
  return summary;
}

}  // namespace simopt::bench
