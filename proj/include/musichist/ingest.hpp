// Copyright 2026 The musichist Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef MUSICHIST_INGEST_HPP
#define MUSICHIST_INGEST_HPP

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <openssl/evp.h>

#include <json.hpp>

#include "musichist/core.hpp"

namespace musichist {

/// Malformed CSV input; carries the 1-based line number.
class ParseError : public ValidationError {
 public:
  ParseError(std::size_t line, const std::string& what)
      : ValidationError("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Snapshot bytes are truncated, non-canonical or fail a hash check.
class CorruptionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace csv {

inline bool valid_utf8(std::string_view s) {
  std::size_t i = 0;
  while (i < s.size()) {
    auto c = static_cast<unsigned char>(s[i]);
    std::size_t n = c < 0x80 ? 0 : (c >> 5) == 0x6 ? 1 : (c >> 4) == 0xE ? 2 : (c >> 3) == 0x1E ? 3 : 4;
    if (n == 4 || (n == 1 && c < 0xC2) || c > 0xF4) return false;
    for (std::size_t k = 1; k <= n; ++k) {
      if (i + k >= s.size()) return false;
      if ((static_cast<unsigned char>(s[i + k]) >> 6) != 0x2) return false;
    }
    if (n >= 2) {
      auto c1 = static_cast<unsigned char>(s[i + 1]);
      if ((c == 0xE0 && c1 < 0xA0) || (c == 0xED && c1 > 0x9F) || (c == 0xF0 && c1 < 0x90) ||
          (c == 0xF4 && c1 > 0x8F))
        return false;  // overlong, surrogate or beyond U+10FFFF
    }
    i += n + 1;
  }
  return true;
}

struct Row {
  std::size_t line;
  std::vector<std::string> fields;
};

/// Splits text into rows of fields. Supports double-quoted fields with ""
/// escapes, LF or CRLF endings and a leading UTF-8 BOM. Blank lines are
/// skipped. Quoted fields may not span lines.
inline std::vector<Row> split(std::string_view text) {
  if (text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);
  std::vector<Row> rows;
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    auto nl = text.find('\n');
    auto line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    if (!valid_utf8(line)) throw ParseError(line_no, "invalid UTF-8");

    Row row{line_no, {}};
    std::string field;
    std::size_t i = 0;
    bool quoted = false, was_quoted = false;
    while (i < line.size()) {
      char c = line[i];
      if (quoted) {
        if (c == '"') {
          if (i + 1 < line.size() && line[i + 1] == '"') {
            field += '"';
            ++i;
          } else {
            quoted = false;
          }
        } else {
          field += c;
        }
      } else if (c == ',') {
        row.fields.push_back(std::move(field));
        field.clear();
        was_quoted = false;
      } else if (c == '"' && field.empty() && !was_quoted) {
        quoted = was_quoted = true;
      } else if (was_quoted) {
        throw ParseError(line_no, "unexpected character after closing quote in column " +
                                      std::to_string(row.fields.size() + 1));
      } else {
        field += c;
      }
      ++i;
    }
    if (quoted) throw ParseError(line_no, "unterminated quoted field");
    row.fields.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t");
  return std::string(s.substr(b, e - b + 1));
}

template <typename Int>
Int parse_int(const Row& row, std::size_t col, const char* name) {
  auto s = trim(row.fields[col]);
  Int v{};
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc{} || p != s.data() + s.size())
    throw ParseError(row.line, "column " + std::to_string(col + 1) + " (" + name +
                                   "): not an integer: '" + s + "'");
  return v;
}

inline std::string quote(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos && s == trim(s)) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace csv

/// Parses `user_id,track_id,timestamp` rows (timestamp in integer epoch
/// seconds). Throws ParseError naming the line and column.
inline std::vector<AccessEvent> parse_events_csv(std::string_view text) {
  auto rows = csv::split(text);
  if (rows.empty()) throw ParseError(1, "missing header 'user_id,track_id,timestamp'");
  const auto& header = rows.front();
  if (header.fields.size() != 3 || csv::trim(header.fields[0]) != "user_id" ||
      csv::trim(header.fields[1]) != "track_id" || csv::trim(header.fields[2]) != "timestamp")
    throw ParseError(header.line, "expected header 'user_id,track_id,timestamp'");

  std::vector<AccessEvent> events;
  events.reserve(rows.size() - 1);
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.fields.size() != 3)
      throw ParseError(row.line, "expected 3 columns, got " + std::to_string(row.fields.size()));
    AccessEvent e{csv::trim(row.fields[0]), csv::trim(row.fields[1]),
                  csv::parse_int<Timestamp>(row, 2, "timestamp")};
    if (e.user_id.empty()) throw ParseError(row.line, "column 1 (user_id): empty");
    if (e.track_id.empty()) throw ParseError(row.line, "column 2 (track_id): empty");
    events.push_back(std::move(e));
  }
  return events;
}

/// Parses `track_id,genre,release_year[,title]` rows into a Catalog.
inline Catalog parse_catalog_csv(std::string_view text) {
  auto rows = csv::split(text);
  if (rows.empty()) throw ParseError(1, "missing header 'track_id,genre,release_year[,title]'");
  const auto& header = rows.front();
  const auto ncols = header.fields.size();
  if ((ncols != 3 && ncols != 4) || csv::trim(header.fields[0]) != "track_id" ||
      csv::trim(header.fields[1]) != "genre" || csv::trim(header.fields[2]) != "release_year" ||
      (ncols == 4 && csv::trim(header.fields[3]) != "title"))
    throw ParseError(header.line, "expected header 'track_id,genre,release_year[,title]'");

  std::vector<Track> tracks;
  std::set<std::string> ids;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.fields.size() != ncols)
      throw ParseError(row.line, "expected " + std::to_string(ncols) + " columns, got " +
                                     std::to_string(row.fields.size()));
    Track t;
    t.track_id = csv::trim(row.fields[0]);
    t.genre = csv::trim(row.fields[1]);
    t.release_year = csv::parse_int<int>(row, 2, "release_year");
    if (ncols == 4 && !row.fields[3].empty()) t.title = row.fields[3];
    if (t.track_id.empty()) throw ParseError(row.line, "column 1 (track_id): empty");
    if (t.genre.empty()) throw ParseError(row.line, "column 2 (genre): empty");
    if (t.release_year < kMinReleaseYear || t.release_year > kMaxReleaseYear)
      throw ParseError(row.line, "column 3 (release_year): " + std::to_string(t.release_year) +
                                     " outside [1000, 3000]");
    if (!ids.insert(t.track_id).second)
      throw ParseError(row.line, "duplicate track_id " + t.track_id);
    tracks.push_back(std::move(t));
  }
  return Catalog(std::move(tracks));
}

inline std::string events_to_csv(const std::vector<AccessEvent>& events) {
  std::string out = "user_id,track_id,timestamp\n";
  for (const auto& e : events)
    out += csv::quote(e.user_id) + "," + csv::quote(e.track_id) + "," +
           std::to_string(e.timestamp) + "\n";
  return out;
}

inline std::string catalog_to_csv(const Catalog& catalog) {
  std::string out = "track_id,genre,release_year,title\n";
  for (const auto& [id, t] : catalog.tracks())
    out += csv::quote(id) + "," + csv::quote(t.genre) + "," + std::to_string(t.release_year) +
           "," + (t.title ? csv::quote(*t.title) : std::string{}) + "\n";
  return out;
}

inline std::string sha256_hex(std::string_view bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("SHA-256 digest failed");
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned i = 0; i < len; ++i) {
    out += kHex[md[i] >> 4];
    out += kHex[md[i] & 0xF];
  }
  return out;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("read failed: " + path.string());
  return ss.str();
}

/// Writes through a temporary file and renames it into place.
inline void write_file_atomic(const std::filesystem::path& path, std::string_view bytes) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed: " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename " + tmp.string() + ": " + ec.message());
}

struct DatasetSnapshot {
  Catalog catalog;
  HistoryMap histories;
  Timestamp created_at = 0;
  std::string content_hash;  // SHA-256 of the canonical serialization

  std::size_t event_count() const {
    std::size_t n = 0;
    for (const auto& [u, h] : histories) n += h.events.size();
    return n;
  }
};

inline constexpr const char* kSnapshotFormat = "musichist-snapshot/1";

/// Canonical snapshot document: sorted keys, compact, trailing LF.
inline std::string serialize_snapshot(const Catalog& catalog, const HistoryMap& histories,
                                      Timestamp created_at) {
  nlohmann::json tracks = nlohmann::json::array();
  for (const auto& [id, t] : catalog.tracks()) {
    nlohmann::json j = {{"track_id", id}, {"genre", t.genre}, {"release_year", t.release_year}};
    if (t.title) j["title"] = *t.title;
    tracks.push_back(std::move(j));
  }
  nlohmann::json hist = nlohmann::json::object();
  for (const auto& [u, h] : histories) {
    nlohmann::json evs = nlohmann::json::array();
    for (const auto& e : h.events) evs.push_back({e.track_id, e.timestamp});
    hist[u] = std::move(evs);
  }
  nlohmann::json doc = {{"format", kSnapshotFormat},
                        {"created_at", created_at},
                        {"catalog", {{"tracks", std::move(tracks)}}},
                        {"histories", std::move(hist)}};
  return doc.dump() + "\n";
}

inline DatasetSnapshot make_snapshot(Catalog catalog, HistoryMap histories, Timestamp created_at) {
  for (const auto& [u, h] : histories)
    for (const auto& e : h.events)
      if (!catalog.contains(e.track_id))
        throw ValidationError("history of " + u + " references unknown track " + e.track_id);
  DatasetSnapshot s{std::move(catalog), std::move(histories), created_at, {}};
  s.content_hash = sha256_hex(serialize_snapshot(s.catalog, s.histories, s.created_at));
  return s;
}

inline std::string serialize_snapshot(const DatasetSnapshot& s) {
  return serialize_snapshot(s.catalog, s.histories, s.created_at);
}

/// Parses snapshot bytes. Anything that is not the canonical serialization
/// of a valid dataset raises CorruptionError.
inline DatasetSnapshot parse_snapshot(std::string_view bytes) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(bytes);
  } catch (const nlohmann::json::exception& e) {
    throw CorruptionError(std::string("snapshot is not valid JSON: ") + e.what());
  }
  DatasetSnapshot snap;
  try {
    if (doc.at("format").get<std::string>() != kSnapshotFormat)
      throw CorruptionError("unsupported snapshot format");
    std::vector<Track> tracks;
    for (const auto& j : doc.at("catalog").at("tracks")) {
      Track t{j.at("track_id").get<std::string>(), j.at("genre").get<std::string>(),
              j.at("release_year").get<int>(), std::nullopt};
      if (j.contains("title")) t.title = j.at("title").get<std::string>();
      tracks.push_back(std::move(t));
    }
    HistoryMap histories;
    for (const auto& [u, evs] : doc.at("histories").items()) {
      UserHistory h{u, {}};
      for (const auto& ev : evs) {
        if (!ev.is_array() || ev.size() != 2) throw CorruptionError("malformed history entry");
        h.events.push_back({u, ev.at(0).get<std::string>(), ev.at(1).get<Timestamp>()});
      }
      for (std::size_t i = 1; i < h.events.size(); ++i)
        if (h.events[i].timestamp < h.events[i - 1].timestamp)
          throw CorruptionError("history of " + u + " is not chronological");
      histories.emplace(u, std::move(h));
    }
    snap = make_snapshot(Catalog(std::move(tracks)), std::move(histories),
                         doc.at("created_at").get<Timestamp>());
  } catch (const nlohmann::json::exception& e) {
    throw CorruptionError(std::string("snapshot schema error: ") + e.what());
  } catch (const ValidationError& e) {
    throw CorruptionError(std::string("snapshot content error: ") + e.what());
  }
  if (serialize_snapshot(snap) != bytes)
    throw CorruptionError("snapshot bytes are not canonical (hash mismatch)");
  return snap;
}

/// Writes the canonical serialization and returns its SHA-256.
inline std::string save_snapshot(const DatasetSnapshot& snapshot,
                                 const std::filesystem::path& path) {
  auto bytes = serialize_snapshot(snapshot);
  write_file_atomic(path, bytes);
  return sha256_hex(bytes);
}

inline DatasetSnapshot load_snapshot(const std::filesystem::path& path,
                                     const std::optional<std::string>& expected_hash = {}) {
  auto snap = parse_snapshot(read_file(path));
  if (expected_hash && *expected_hash != snap.content_hash)
    throw CorruptionError("snapshot hash " + snap.content_hash + " does not match expected " +
                          *expected_hash);
  return snap;
}

}  // namespace musichist

#endif  // MUSICHIST_INGEST_HPP
