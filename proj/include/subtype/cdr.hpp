#ifndef SUBTYPE_CDR_HPP
#define SUBTYPE_CDR_HPP

#include <zlib.h>

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace subtype {

using UserId = uint64_t;

enum class SubscriptionLabel : uint8_t { Prepaid = 0, Postpaid = 1 };

inline const char* label_name(SubscriptionLabel l) {
  return l == SubscriptionLabel::Prepaid ? "prepaid" : "postpaid";
}

inline std::optional<SubscriptionLabel> parse_label(std::string_view s) {
  if (s == "prepaid" || s == "0") return SubscriptionLabel::Prepaid;
  if (s == "postpaid" || s == "1") return SubscriptionLabel::Postpaid;
  return std::nullopt;
}

enum class EventType : uint8_t { Call, Sms };

struct CdrRecord {
  int64_t timestamp = 0;
  EventType event_type = EventType::Call;
  uint32_t duration = 0;  // seconds; 0 for SMS
  UserId caller = 0;
  UserId callee = 0;
};

struct FilterPolicy {
  uint64_t min_total_call_seconds = 10;
  uint64_t max_total_call_seconds = 100000;
};

struct ParseError {
  size_t line_number;
  std::string message;
};

struct ParseReport {
  size_t total_lines = 0;
  size_t parsed_records = 0;
  std::vector<ParseError> errors;
};

class CdrParseFatal : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

// Line reader over plain or gzip files (picked by the .gz extension).
class LineReader {
 public:
  explicit LineReader(const std::string& path) {
    if (path.size() > 3 && path.compare(path.size() - 3, 3, ".gz") == 0) {
      gz_ = gzopen(path.c_str(), "rb");
      if (!gz_) throw CdrParseFatal("cannot open file: " + path);
    } else {
      plain_.open(path);
      if (!plain_) throw CdrParseFatal("cannot open file: " + path);
    }
  }
  ~LineReader() {
    if (gz_) gzclose(gz_);
  }
  LineReader(const LineReader&) = delete;
  LineReader& operator=(const LineReader&) = delete;

  bool next(std::string& line) {
    if (gz_) {
      line.clear();
      char buf[4096];
      bool got = false;
      while (gzgets(gz_, buf, sizeof(buf))) {
        got = true;
        line += buf;
        if (!line.empty() && line.back() == '\n') {
          line.pop_back();
          break;
        }
      }
      if (!line.empty() && line.back() == '\r') line.pop_back();
      return got;
    }
    if (!std::getline(plain_, line)) return false;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
  }

 private:
  std::ifstream plain_;
  gzFile gz_ = nullptr;
};

template <typename T>
bool parse_uint(std::string_view s, T& out) {
  if (s.empty()) return false;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && p == s.data() + s.size();
}

inline bool parse_int64(std::string_view s, int64_t& out) {
  if (s.empty()) return false;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && p == s.data() + s.size();
}

inline std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  size_t start = 0;
  while (true) {
    size_t pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

}  // namespace detail

// Parses one csv-v1 line: timestamp,event_type,duration,caller,callee
inline std::optional<CdrRecord> parse_cdr_line(std::string_view line,
                                               std::string* error = nullptr) {
  auto fail = [&](const char* msg) -> std::optional<CdrRecord> {
    if (error) *error = msg;
    return std::nullopt;
  };
  auto fields = detail::split_csv(line);
  if (fields.size() != 5) return fail("expected 5 comma-separated fields");
  CdrRecord rec;
  if (!detail::parse_int64(fields[0], rec.timestamp))
    return fail("bad timestamp");
  if (fields[1] == "call") {
    rec.event_type = EventType::Call;
  } else if (fields[1] == "sms") {
    rec.event_type = EventType::Sms;
  } else {
    return fail("event_type must be 'call' or 'sms'");
  }
  if (!detail::parse_uint(fields[2], rec.duration))
    return fail("bad duration (non-negative integer required)");
  if (rec.event_type == EventType::Sms && rec.duration != 0)
    return fail("sms must have duration 0");
  if (!detail::parse_uint(fields[3], rec.caller)) return fail("bad caller id");
  if (!detail::parse_uint(fields[4], rec.callee)) return fail("bad callee id");
  if (rec.caller == rec.callee) return fail("self-loop (caller == callee)");
  return rec;
}

// Streams records from a csv-v1 file (optionally gzipped) into `sink`.
// Malformed lines are recorded in the report and skipped; more than 1%
// malformed lines is treated as a wrong-format signal and is fatal.
template <typename Sink>
ParseReport parse_cdr_file(const std::string& path, Sink&& sink,
                           bool has_header = false) {
  detail::LineReader reader(path);
  ParseReport report;
  std::string line;
  std::string error;
  size_t line_number = 0;
  while (reader.next(line)) {
    ++line_number;
    if (has_header && line_number == 1) continue;
    if (line.empty()) continue;
    ++report.total_lines;
    auto rec = parse_cdr_line(line, &error);
    if (!rec) {
      report.errors.push_back({line_number, error});
      continue;
    }
    ++report.parsed_records;
    sink(*rec);
  }
  if (report.total_lines > 0 &&
      report.errors.size() * 100 > report.total_lines) {
    throw CdrParseFatal(path + ": " + std::to_string(report.errors.size()) +
                        " of " + std::to_string(report.total_lines) +
                        " lines malformed (>1%), wrong format?");
  }
  return report;
}

// Users whose total outgoing call duration falls inside the policy's closed
// interval. Callee-only users are not part of the classified population.
inline std::unordered_set<UserId> filter_users(
    const std::vector<CdrRecord>& records, const FilterPolicy& policy) {
  std::unordered_map<UserId, uint64_t> out_seconds;
  for (const auto& r : records) {
    if (r.event_type == EventType::Call) out_seconds[r.caller] += r.duration;
  }
  std::unordered_set<UserId> kept;
  for (const auto& [user, secs] : out_seconds) {
    if (secs >= policy.min_total_call_seconds &&
        secs <= policy.max_total_call_seconds) {
      kept.insert(user);
    }
  }
  return kept;
}

struct EdgeStats {
  uint64_t call_count = 0;
  uint64_t total_call_seconds = 0;
  uint64_t sms_count = 0;
  double call_seconds_sq = 0.0;  // sum of squared call durations, for std
};

// Directed weighted communication graph over a fixed user set. Node indices
// are dense and stable for a given record stream (sorted by user id).
class CallGraph {
 public:
  struct Edge {
    uint32_t to;
    EdgeStats stats;
  };

  size_t node_count() const { return users_.size(); }
  UserId user_at(size_t idx) const { return users_[idx]; }
  std::optional<uint32_t> index_of(UserId u) const {
    auto it = index_.find(u);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  const std::vector<Edge>& out_edges(uint32_t idx) const { return out_[idx]; }
  const std::vector<uint32_t>& in_neighbors(uint32_t idx) const {
    return in_[idx];
  }
  uint32_t out_degree(uint32_t idx) const {
    return static_cast<uint32_t>(out_[idx].size());
  }

  // union of in- and out-neighbors, deduplicated
  std::vector<uint32_t> neighbors(uint32_t idx) const {
    std::vector<uint32_t> n;
    n.reserve(out_[idx].size() + in_[idx].size());
    for (const auto& e : out_[idx]) n.push_back(e.to);
    n.insert(n.end(), in_[idx].begin(), in_[idx].end());
    std::sort(n.begin(), n.end());
    n.erase(std::unique(n.begin(), n.end()), n.end());
    return n;
  }

  uint64_t total_call_count() const {
    uint64_t sum = 0;
    for (const auto& adj : out_)
      for (const auto& e : adj) sum += e.stats.call_count;
    return sum;
  }

  uint64_t edge_count() const {
    uint64_t sum = 0;
    for (const auto& adj : out_) sum += adj.size();
    return sum;
  }

  static CallGraph build(const std::vector<CdrRecord>& records,
                         const std::unordered_set<UserId>& kept_users) {
    CallGraph g;
    std::vector<UserId> users(kept_users.begin(), kept_users.end());
    std::sort(users.begin(), users.end());
    g.users_ = std::move(users);
    g.index_.reserve(g.users_.size());
    for (uint32_t i = 0; i < g.users_.size(); ++i) g.index_[g.users_[i]] = i;

    std::unordered_map<uint64_t, EdgeStats> agg;
    agg.reserve(records.size() / 2);
    for (const auto& r : records) {
      auto cu = g.index_.find(r.caller);
      auto cv = g.index_.find(r.callee);
      if (cu == g.index_.end() || cv == g.index_.end()) continue;
      uint64_t key =
          (static_cast<uint64_t>(cu->second) << 32) | cv->second;
      EdgeStats& s = agg[key];
      if (r.event_type == EventType::Call) {
        s.call_count += 1;
        s.total_call_seconds += r.duration;
        s.call_seconds_sq +=
            static_cast<double>(r.duration) * static_cast<double>(r.duration);
      } else {
        s.sms_count += 1;
      }
    }

    g.out_.assign(g.users_.size(), {});
    g.in_.assign(g.users_.size(), {});
    for (const auto& [key, stats] : agg) {
      uint32_t u = static_cast<uint32_t>(key >> 32);
      uint32_t v = static_cast<uint32_t>(key & 0xffffffffu);
      g.out_[u].push_back({v, stats});
      g.in_[v].push_back(u);
    }
    for (auto& adj : g.out_)
      std::sort(adj.begin(), adj.end(),
                [](const Edge& a, const Edge& b) { return a.to < b.to; });
    for (auto& adj : g.in_) std::sort(adj.begin(), adj.end());
    return g;
  }

 private:
  std::vector<UserId> users_;
  std::unordered_map<UserId, uint32_t> index_;
  std::vector<std::vector<Edge>> out_;
  std::vector<std::vector<uint32_t>> in_;
};

}  // namespace subtype

#endif
