#ifndef SUBTYPE_IO_HPP
#define SUBTYPE_IO_HPP

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "json.hpp"
#include "subtype/cdr.hpp"
#include "subtype/crossnet.hpp"
#include "subtype/features.hpp"

namespace subtype {

inline constexpr const char* kToolVersion = "0.1.0";

class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace io {

// shortest round-trip representation, deterministic across runs
inline std::string fmt_double(double v) {
  char buf[32];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, p);
}

inline std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  return out;
}

// FNV-1a over the file bytes, for run manifests
inline std::string file_digest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path);
  uint64_t h = 0xcbf29ce484222325ULL;
  char buf[65536];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ULL;
    }
    if (!in) break;
  }
  char out[17];
  std::snprintf(out, sizeof(out), "%016llx",
                static_cast<unsigned long long>(h));
  return out;
}

inline void write_cdrs(const std::string& path,
                       const std::vector<CdrRecord>& records) {
  auto out = open_out(path);
  for (const auto& r : records) {
    out << r.timestamp << ','
        << (r.event_type == EventType::Call ? "call" : "sms") << ','
        << r.duration << ',' << r.caller << ',' << r.callee << '\n';
  }
}

inline std::vector<CdrRecord> read_cdrs(const std::string& path,
                                        bool has_header = false,
                                        ParseReport* report = nullptr) {
  std::vector<CdrRecord> records;
  ParseReport rep = parse_cdr_file(
      path, [&](const CdrRecord& r) { records.push_back(r); }, has_header);
  if (report) *report = rep;
  return records;
}

inline void write_truth(
    const std::string& path,
    const std::unordered_map<UserId, SubscriptionLabel>& truth) {
  std::vector<UserId> ids;
  ids.reserve(truth.size());
  for (const auto& [u, l] : truth) ids.push_back(u);
  std::sort(ids.begin(), ids.end());
  auto out = open_out(path);
  out << "user_id,label\n";
  for (UserId u : ids) out << u << ',' << label_name(truth.at(u)) << '\n';
}

inline std::unordered_map<UserId, SubscriptionLabel> read_truth(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read " + path);
  std::unordered_map<UserId, SubscriptionLabel> truth;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || (line_no == 1 && line.rfind("user_id", 0) == 0))
      continue;
    auto fields = detail::split_csv(line);
    UserId u;
    if (fields.size() < 2 || !detail::parse_uint(fields[0], u))
      throw DataError(path + ":" + std::to_string(line_no) + ": bad row");
    auto l = parse_label(fields[1]);
    if (!l)
      throw DataError(path + ":" + std::to_string(line_no) + ": bad label");
    truth[u] = *l;
  }
  return truth;
}

struct LabeledUser {
  UserId user;
  SubscriptionLabel label;
  double posterior_prepaid;
  bool fixed;
};

inline void write_labels(const std::string& path,
                         const std::vector<LabeledUser>& rows) {
  auto out = open_out(path);
  out << "user_id,label,posterior_prepaid,fixed_flag\n";
  for (const auto& r : rows)
    out << r.user << ',' << label_name(r.label) << ','
        << fmt_double(r.posterior_prepaid) << ',' << (r.fixed ? 1 : 0)
        << '\n';
}

inline std::unordered_map<UserId, SubscriptionLabel> read_predictions(
    const std::string& path) {
  // same reader works for truth.csv and labels.csv (first two columns)
  return read_truth(path);
}

struct FeatureRow {
  UserId user;
  std::optional<SubscriptionLabel> label;
  std::vector<double> values;
};

inline void write_features(const std::string& path,
                           const std::vector<FeatureRow>& rows,
                           bool with_portions) {
  auto out = open_out(path);
  out << "user_id,label,f1,f2,f3,f4,f5";
  if (with_portions) out << ",Fn,Fc,Fd";
  out << '\n';
  for (const auto& r : rows) {
    out << r.user << ',' << (r.label ? label_name(*r.label) : "");
    for (double v : r.values) out << ',' << fmt_double(v);
    out << '\n';
  }
}

inline void write_bipartite(const std::string& edges_path,
                            const std::string& sides_path,
                            const BipartiteGraph& g) {
  {
    auto out = open_out(edges_path);
    out << "from,to\n";
    for (auto [a, b] : g.ab_edges)
      out << g.a_ids[a] << ',' << g.b_ids[b] << '\n';
    for (auto [b, a] : g.ba_edges)
      out << g.b_ids[b] << ',' << g.a_ids[a] << '\n';
  }
  {
    auto out = open_out(sides_path);
    out << "user_id,side,label\n";
    for (size_t i = 0; i < g.a_ids.size(); ++i)
      out << g.a_ids[i] << ",A," << label_name(g.a_labels[i]) << '\n';
    for (UserId b : g.b_ids) out << b << ",B,\n";
  }
}

inline BipartiteGraph read_bipartite(const std::string& edges_path,
                                     const std::string& sides_path) {
  BipartiteGraph g;
  std::unordered_map<UserId, uint32_t> a_index, b_index;
  {
    std::ifstream in(sides_path);
    if (!in) throw DataError("cannot read " + sides_path);
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty() || (line_no == 1 && line.rfind("user_id", 0) == 0))
        continue;
      auto fields = detail::split_csv(line);
      UserId u;
      if (fields.size() < 3 || !detail::parse_uint(fields[0], u))
        throw DataError(sides_path + ":" + std::to_string(line_no) +
                        ": bad row");
      if (fields[1] == "A") {
        auto l = parse_label(fields[2]);
        if (!l)
          throw DataError(sides_path + ":" + std::to_string(line_no) +
                          ": side A needs a label");
        a_index[u] = static_cast<uint32_t>(g.a_ids.size());
        g.a_ids.push_back(u);
        g.a_labels.push_back(*l);
      } else if (fields[1] == "B") {
        b_index[u] = static_cast<uint32_t>(g.b_ids.size());
        g.b_ids.push_back(u);
      } else {
        throw DataError(sides_path + ":" + std::to_string(line_no) +
                        ": side must be A or B");
      }
    }
  }
  {
    std::ifstream in(edges_path);
    if (!in) throw DataError("cannot read " + edges_path);
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty() || (line_no == 1 && line.rfind("from", 0) == 0))
        continue;
      auto fields = detail::split_csv(line);
      UserId from, to;
      if (fields.size() != 2 || !detail::parse_uint(fields[0], from) ||
          !detail::parse_uint(fields[1], to))
        throw DataError(edges_path + ":" + std::to_string(line_no) +
                        ": bad row");
      auto af = a_index.find(from);
      auto bt = b_index.find(to);
      if (af != a_index.end() && bt != b_index.end()) {
        g.ab_edges.push_back({af->second, bt->second});
        continue;
      }
      auto bf = b_index.find(from);
      auto at = a_index.find(to);
      if (bf != b_index.end() && at != a_index.end()) {
        g.ba_edges.push_back({bf->second, at->second});
        continue;
      }
      throw DataError(edges_path + ":" + std::to_string(line_no) +
                      ": edge endpoints must span the two sides");
    }
  }
  return g;
}

inline void write_json(const std::string& path, const nlohmann::json& j) {
  auto out = open_out(path);
  out << j.dump(2) << '\n';
}

inline nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read " + path);
  return nlohmann::json::parse(in);
}

}  // namespace io
}  // namespace subtype

#endif
