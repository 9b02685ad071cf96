#include "rankwatch/report.hpp"

#include <fstream>
#include <sstream>

#include "rankwatch/error.hpp"
#include "rankwatch/stream_io.hpp"

namespace rankwatch {

CsvTable::CsvTable(std::vector<std::string> columns) : columns_(std::move(columns)) {}

void CsvTable::add_row(std::vector<std::string> cells) {
  if (cells.size() != columns_.size()) {
    throw Error(ErrorKind::kInvalidInput, "row has " + std::to_string(cells.size()) +
                                              " cells, table has " +
                                              std::to_string(columns_.size()) + " columns");
  }
  rows_.push_back(std::move(cells));
}

void CsvTable::write(std::ostream& out) const {
  const auto line = [&out](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i > 0) out << ',';
      out << cells[i];
    }
    out << '\n';
  };
  line(columns_);
  for (const auto& row : rows_) line(row);
}

void CsvTable::write(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::kStream, "cannot open " + path.string() + " for writing");
  write(out);
  if (!out) throw Error(ErrorKind::kStream, "write failed for " + path.string());
}

std::string CsvTable::str() const {
  std::ostringstream out;
  write(out);
  return out.str();
}

std::string cell(double v) { return format_double(v); }
std::string cell(std::int64_t v) { return std::to_string(v); }
std::string cell(bool v) { return v ? "1" : "0"; }

std::filesystem::path sidecar_path(const std::filesystem::path& path) {
  return std::filesystem::path(path.string() + ".meta");
}

void write_metadata(const Metadata& meta, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::kStream, "cannot open " + path.string() + " for writing");
  for (const auto& [key, value] : meta) {
    if (key.find_first_of("=\n") != std::string::npos || value.find('\n') != std::string::npos) {
      throw Error(ErrorKind::kInvalidInput, "metadata key or value contains a separator: " + key);
    }
    out << key << '=' << value << '\n';
  }
  if (!out) throw Error(ErrorKind::kStream, "write failed for " + path.string());
}

Metadata read_metadata(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kStream, "cannot open " + path.string());
  Metadata meta;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(line_no, "expected key=value");
    meta.emplace_back(line.substr(0, eq), line.substr(eq + 1));
  }
  return meta;
}

std::string version_string() { return std::string("rankwatch ") + RANKWATCH_VERSION; }

CsvTable detection_trace_table(const DetectionReport& report) {
  CsvTable table({"t", "statistic", "k_hat"});
  for (const TraceEntry& e : report.trace) table.add_row({cell(e.t), cell(e.value), cell(e.k_hat)});
  return table;
}

CsvTable tracker_trace_table(const TrackerReport& report) {
  CsvTable table({"t", "stat_max", "stat_norm", "observed_count", "skipped"});
  for (const TrackerStats& st : report.trace) {
    table.add_row({cell(st.t), cell(st.stat_max), cell(st.stat_norm),
                   cell(static_cast<std::int64_t>(st.observed_count)), cell(st.skipped)});
  }
  return table;
}

CsvTable sweep_table(const SweepResult& result) {
  CsvTable table({result.kind == "sketch" ? "m" : "snr_grid", "dim", "drift", "threshold",
                  "achieved_arl", "arl_stderr", "arl_censored", "converged", "edd", "edd_stderr",
                  "edd_replicates", "edd_censored", "snr", "edd_approx"});
  for (const SweepRow& r : result.rows) {
    table.add_row({cell(r.param), cell(static_cast<std::int64_t>(r.dim)), cell(r.drift),
                   cell(r.threshold), cell(r.achieved_arl), cell(r.arl_std_err),
                   cell(static_cast<std::int64_t>(r.arl_censored)), cell(r.converged), cell(r.edd),
                   cell(r.edd_std_err), cell(static_cast<std::int64_t>(r.edd_replicates)),
                   cell(static_cast<std::int64_t>(r.edd_censored)), cell(r.snr),
                   cell(r.edd_approx)});
  }
  return table;
}

}  // namespace rankwatch
