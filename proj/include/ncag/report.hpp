#pragma once

// Trial records and their JSONL / CSV serialization.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <limits>
#include <locale>
#include <sstream>
#include <string>
#include <vector>

#include "ncag/errors.hpp"

namespace ncag {

/// One checked quantity from one trial.
struct TrialRecord {
  std::string suite;
  std::size_t trial_index = 0;
  std::uint64_t seed = 0;
  long dim = 0;
  double r = std::numeric_limits<double>::quiet_NaN();  // NaN when the suite has no r
  std::string quantity;
  double value = 0.0;
  bool pass = true;
  std::string witness_ref;
};

/// 17 significant digits, round-trip exact.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os.precision(17);
  os << v;
  return os.str();
}

inline std::string json_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size() + 2);
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  return out;
}

namespace detail {

inline std::string json_number(double v) {
  return std::isfinite(v) ? format_double(v) : std::string("null");
}

}  // namespace detail

/// One JSON object per line, keys in a fixed order.
inline std::string to_jsonl_line(const TrialRecord& rec) {
  std::string s = "{\"suite\":\"" + json_escape(rec.suite) + "\"";
  s += ",\"trial_index\":" + std::to_string(rec.trial_index);
  s += ",\"seed\":" + std::to_string(rec.seed);
  s += ",\"dim\":" + std::to_string(rec.dim);
  s += ",\"r\":" + detail::json_number(rec.r);
  s += ",\"quantity\":\"" + json_escape(rec.quantity) + "\"";
  s += ",\"value\":" + detail::json_number(rec.value);
  s += std::string(",\"pass\":") + (rec.pass ? "true" : "false");
  s += ",\"witness_ref\":";
  s += rec.witness_ref.empty() ? std::string("null") : "\"" + json_escape(rec.witness_ref) + "\"";
  s += "}";
  return s;
}

inline const char* csv_header() {
  return "suite,trial_index,seed,dim,r,quantity,value,pass,witness_ref";
}

inline std::string to_csv_line(const TrialRecord& rec) {
  return rec.suite + "," + std::to_string(rec.trial_index) + "," + std::to_string(rec.seed) +
         "," + std::to_string(rec.dim) + "," + (std::isnan(rec.r) ? "" : format_double(rec.r)) +
         "," + rec.quantity + "," + format_double(rec.value) + "," +
         (rec.pass ? "true" : "false") + "," + rec.witness_ref;
}

/// Stable sort by (suite, trial_index); records of one trial keep their order.
inline std::vector<TrialRecord> sorted_records(std::vector<TrialRecord> recs) {
  std::stable_sort(recs.begin(), recs.end(), [](const TrialRecord& a, const TrialRecord& b) {
    if (a.suite != b.suite) return a.suite < b.suite;
    return a.trial_index < b.trial_index;
  });
  return recs;
}

inline std::string render_jsonl(const std::vector<TrialRecord>& recs) {
  std::string out;
  for (const auto& r : sorted_records(recs)) {
    out += to_jsonl_line(r);
    out += '\n';
  }
  return out;
}

inline std::string render_csv(const std::vector<TrialRecord>& recs) {
  std::string out = csv_header();
  out += '\n';
  for (const auto& r : sorted_records(recs)) {
    out += to_csv_line(r);
    out += '\n';
  }
  return out;
}

struct ReportSummary {
  std::size_t total = 0;
  std::size_t failed = 0;
  std::vector<std::string> witness_paths;

  bool all_passed() const { return failed == 0; }
  std::string line() const {
    return (failed ? "failed " : "passed ") + std::to_string(failed ? failed : total) + "/" +
           std::to_string(total);
  }
};

inline ReportSummary summarize(const std::vector<TrialRecord>& recs) {
  ReportSummary s;
  s.total = recs.size();
  for (const auto& r : recs) {
    if (!r.pass) ++s.failed;
    if (!r.witness_ref.empty()) s.witness_paths.push_back(r.witness_ref);
  }
  return s;
}

/// Per-quantity min/max/fail counts, one line each, for terminal output.
inline std::string human_summary(const std::vector<TrialRecord>& recs) {
  struct Agg {
    std::string name;
    std::size_t n = 0, failed = 0;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
  };
  std::vector<Agg> aggs;
  for (const auto& r : recs) {
    auto it = std::find_if(aggs.begin(), aggs.end(),
                           [&](const Agg& a) { return a.name == r.quantity; });
    if (it == aggs.end()) {
      aggs.push_back({r.quantity});
      it = std::prev(aggs.end());
    }
    ++it->n;
    if (!r.pass) ++it->failed;
    it->lo = std::min(it->lo, r.value);
    it->hi = std::max(it->hi, r.value);
  }
  std::string out;
  for (const auto& a : aggs) {
    out += a.name + ": n=" + std::to_string(a.n) + " failed=" + std::to_string(a.failed) +
           " min=" + format_double(a.lo) + " max=" + format_double(a.hi) + "\n";
  }
  out += summarize(recs).line() + "\n";
  return out;
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << text;
  if (!out) throw IoError("write failed: " + path);
}

/// Writes JSONL (and CSV when csv_path is non-empty); returns the summary.
inline ReportSummary emit_report(const std::vector<TrialRecord>& recs,
                                 const std::string& jsonl_path, const std::string& csv_path = {}) {
  if (!jsonl_path.empty()) write_text_file(jsonl_path, render_jsonl(recs));
  if (!csv_path.empty()) write_text_file(csv_path, render_csv(recs));
  return summarize(recs);
}

}  // namespace ncag
