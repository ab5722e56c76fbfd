#include "rg/eval/report.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "rg/error.hpp"

namespace rg::eval {
namespace {

std::string format_value(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void Report::add(std::string metric, double value, std::optional<std::size_t> segment) {
  require(!metric.empty() && metric.find_first_of(" \t\n") == std::string::npos,
          ErrorKind::kInvalidArgument, "metric names must be nonempty and contain no whitespace");
  entries.push_back({std::move(metric), segment, value});
}

std::optional<double> Report::find(const std::string& metric,
                                   std::optional<std::size_t> segment) const {
  for (const auto& e : entries) {
    if (e.metric == metric && e.segment == segment) return e.value;
  }
  return std::nullopt;
}

void add_segment_scores(Report& report, const SegmentScores& scores) {
  for (std::size_t k = 0; k < scores.scores.size(); ++k) {
    report.add("segment_score", scores.scores[k], k);
    report.add("segment_group_size", static_cast<double>(scores.group_sizes[k]), k);
  }
  report.add("segment_average", scores.average);
  report.add("segment_length", static_cast<double>(scores.seg_len));
  report.add("excluded_videos", static_cast<double>(scores.excluded.size()));
}

void add_fvd_ratio(Report& report, const FvdRatio& ratio) {
  report.add("fvd_first", ratio.first);
  report.add("fvd_full", ratio.full);
  report.add("fvd_ratio", ratio.ratio);
}

void add_inception_score(Report& report, const InceptionScore& is) {
  report.add("inception_score", is.score);
  report.add("inter_entropy", is.inter_entropy);
  report.add("intra_entropy", is.intra_entropy);
}

void write_text_report(std::ostream& out, const Report& report) {
  for (const auto& e : report.entries) {
    out << e.metric;
    if (e.segment) out << '[' << *e.segment << ']';
    out << ' ' << format_value(e.value) << '\n';
  }
}

void write_kv_report(std::ostream& out, const Report& report) {
  out << "# metric\tsegment\tvalue\n";
  for (const auto& e : report.entries) {
    out << e.metric << '\t' << (e.segment ? std::to_string(*e.segment) : "-") << '\t'
        << format_value(e.value) << '\n';
  }
}

void write_kv_report_file(const std::string& path, const Report& report) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(out.good(), ErrorKind::kIo, "cannot open report '" + path + "' for writing");
  write_kv_report(out, report);
  require(out.good(), ErrorKind::kIo, "report write failed for '" + path + "'");
}

Report read_kv_report(std::istream& in) {
  Report r;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string metric, segment, value;
    require(static_cast<bool>(std::getline(ls, metric, '\t')) &&
                static_cast<bool>(std::getline(ls, segment, '\t')) &&
                static_cast<bool>(std::getline(ls, value)),
            ErrorKind::kIo, "malformed report line " + std::to_string(n));
    ReportEntry e{metric, std::nullopt, 0.0};
    try {
      if (segment != "-") e.segment = std::stoull(segment);
      std::size_t used = 0;
      e.value = std::stod(value, &used);
      require(used == value.size(), ErrorKind::kIo, "trailing characters");
    } catch (const std::exception&) {
      fail(ErrorKind::kIo, "malformed report line " + std::to_string(n));
    }
    r.entries.push_back(std::move(e));
  }
  return r;
}

Report read_kv_report_file(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorKind::kIo, "cannot open report '" + path + "'");
  return read_kv_report(in);
}

}  // namespace rg::eval
