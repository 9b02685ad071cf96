#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "rankwatch/error.hpp"
#include "rankwatch/report.hpp"

using namespace rankwatch;

TEST(CsvTable, WritesHeaderAndRows) {
  CsvTable t({"a", "b"});
  t.add_row({cell(1.5), cell(std::int64_t{3})});
  t.add_row({cell(true), cell(false)});
  EXPECT_EQ(t.str(), "a,b\n1.5,3\n1,0\n");
  EXPECT_EQ(t.rows(), 2u);
}

TEST(CsvTable, RowLengthChecked) {
  CsvTable t({"a", "b"});
  EXPECT_THROW(t.add_row({"1"}), Error);
}

TEST(Metadata, RoundTrip) {
  const auto path = std::filesystem::temp_directory_path() / "rankwatch_meta.csv";
  const Metadata meta{{"command", "detect"}, {"window", "100"}, {"empty", ""}, {"eq", "a=b"}};
  write_metadata(meta, sidecar_path(path));
  EXPECT_EQ(sidecar_path(path).filename().string(), "rankwatch_meta.csv.meta");
  EXPECT_EQ(read_metadata(sidecar_path(path)), meta);
  std::filesystem::remove(sidecar_path(path));
}

TEST(Metadata, RejectsSeparators) {
  const auto path = std::filesystem::temp_directory_path() / "rankwatch_meta_bad.meta";
  EXPECT_THROW(write_metadata({{"a=b", "1"}}, path), Error);
  EXPECT_THROW(write_metadata({{"a", "1\n2"}}, path), Error);
  std::filesystem::remove(path);
}

TEST(Version, Prefix) { EXPECT_EQ(version_string().rfind("rankwatch ", 0), 0u); }

TEST(Tables, DetectionTrace) {
  DetectionReport r;
  r.trace = {{1, -2.5, 0}, {2, 0.25, 1}};
  EXPECT_EQ(detection_trace_table(r).str(), "t,statistic,k_hat\n1,-2.5,0\n2,0.25,1\n");
}

TEST(Tables, TrackerTraceMarksGaps) {
  TrackerReport r;
  TrackerStats a;
  a.t = 1;
  a.stat_max = 1.0;
  a.stat_norm = 2.0;
  a.observed_count = 7;
  TrackerStats b;
  b.t = 2;
  b.stat_max = b.stat_norm = std::nan("");
  b.observed_count = 1;
  b.skipped = true;
  r.trace = {a, b};
  EXPECT_EQ(tracker_trace_table(r).str(),
            "t,stat_max,stat_norm,observed_count,skipped\n1,1,2,7,0\n2,nan,nan,1,1\n");
}

TEST(Tables, SweepColumns) {
  SweepResult s;
  s.kind = "sketch";
  s.rows.push_back(SweepRow{});
  const CsvTable t = sweep_table(s);
  EXPECT_EQ(t.columns().front(), "m");
  EXPECT_EQ(t.columns().size(), 14u);
  s.kind = "snr";
  EXPECT_EQ(sweep_table(s).columns().front(), "snr_grid");
}
