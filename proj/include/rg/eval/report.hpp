#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "rg/eval/metrics.hpp"

namespace rg::eval {

struct ReportEntry {
  std::string metric;
  std::optional<std::size_t> segment;
  double value = 0.0;

  friend bool operator==(const ReportEntry&, const ReportEntry&) = default;
};

struct Report {
  std::vector<ReportEntry> entries;

  void add(std::string metric, double value, std::optional<std::size_t> segment = std::nullopt);
  // Value of the first entry matching metric and segment.
  std::optional<double> find(const std::string& metric,
                             std::optional<std::size_t> segment = std::nullopt) const;
};

// segment_score[k] for every index, segment_group_size[k], segment_average
// and excluded_videos.
void add_segment_scores(Report& report, const SegmentScores& scores);
void add_fvd_ratio(Report& report, const FvdRatio& ratio);
void add_inception_score(Report& report, const InceptionScore& is);

// "metric value" or "metric[k] value", one per line.
void write_text_report(std::ostream& out, const Report& report);

// Key-value report: a '#' header line, then "<metric>\t<segment>\t<value>"
// per entry with segment "-" for whole-set metrics. Values use %.17g.
void write_kv_report(std::ostream& out, const Report& report);
void write_kv_report_file(const std::string& path, const Report& report);
Report read_kv_report(std::istream& in);
Report read_kv_report_file(const std::string& path);

}  // namespace rg::eval
