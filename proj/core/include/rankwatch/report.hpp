#pragma once

// CSV tables and key=value metadata sidecars.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "rankwatch/detector.hpp"
#include "rankwatch/harness.hpp"
#include "rankwatch/tracker.hpp"

namespace rankwatch {

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> columns);

  /// Throws kInvalidInput when the row length differs from the header.
  void add_row(std::vector<std::string> cells);

  const std::vector<std::string>& columns() const noexcept { return columns_; }
  std::size_t rows() const noexcept { return rows_.size(); }

  void write(std::ostream& out) const;
  void write(const std::filesystem::path& path) const;
  std::string str() const;

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<std::string>> rows_;
};

std::string cell(double v);
std::string cell(std::int64_t v);
std::string cell(bool v);

using Metadata = std::vector<std::pair<std::string, std::string>>;

/// "<path>.meta"
std::filesystem::path sidecar_path(const std::filesystem::path& path);
void write_metadata(const Metadata& meta, const std::filesystem::path& path);
Metadata read_metadata(const std::filesystem::path& path);

std::string version_string();

CsvTable detection_trace_table(const DetectionReport& report);
CsvTable tracker_trace_table(const TrackerReport& report);
CsvTable sweep_table(const SweepResult& result);

}  // namespace rankwatch
