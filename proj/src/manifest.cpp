#include "emomix/manifest.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <random>
#include <set>

#include <fmt/format.h>

#include "emomix/error.hpp"
#include "emomix/persist.hpp"
#include "json.hpp"

namespace emomix {

std::string_view split_name(Split split) {
  switch (split) {
    case Split::kTrain: return "train";
    case Split::kTest: return "test";
    case Split::kEval: return "eval";
    case Split::kUnassigned: break;
  }
  return "";
}

std::string to_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  return out;
}

std::vector<const ManifestEntry*> Manifest::select(std::optional<Split> split,
                                                   std::optional<std::string_view> emotion) const {
  std::vector<const ManifestEntry*> out;
  for (const ManifestEntry& e : entries) {
    if (split && e.split != *split) continue;
    if (emotion && e.emotion != *emotion) continue;
    out.push_back(&e);
  }
  return out;
}

namespace {

Split parse_split(std::string_view s, std::size_t line, std::size_t column) {
  const std::string v = to_lower(s);
  if (v.empty()) return Split::kUnassigned;
  if (v == "train") return Split::kTrain;
  if (v == "test") return Split::kTest;
  if (v == "eval") return Split::kEval;
  throw Error(ErrorCode::kParseError,
              fmt::format("line {}, column {}: unknown split '{}'", line, column, s));
}

struct Cell {
  std::string text;
  std::size_t column;  // 1-based character column of the field start
};

// One CSV record per line; quoted fields may contain commas and doubled quotes.
std::vector<Cell> split_csv_line(std::string_view line, std::size_t line_no) {
  std::vector<Cell> cells;
  std::size_t i = 0;
  while (true) {
    Cell cell{{}, i + 1};
    if (i < line.size() && line[i] == '"') {
      ++i;
      bool closed = false;
      while (i < line.size()) {
        if (line[i] == '"') {
          if (i + 1 < line.size() && line[i + 1] == '"') {
            cell.text += '"';
            i += 2;
            continue;
          }
          closed = true;
          ++i;
          break;
        }
        cell.text += line[i++];
      }
      if (!closed) {
        throw Error(ErrorCode::kParseError,
                    fmt::format("line {}, column {}: unterminated quoted field", line_no,
                                cell.column));
      }
      if (i < line.size() && line[i] != ',') {
        throw Error(ErrorCode::kParseError,
                    fmt::format("line {}, column {}: expected ',' after quoted field", line_no,
                                i + 1));
      }
    } else {
      while (i < line.size() && line[i] != ',') cell.text += line[i++];
    }
    cells.push_back(std::move(cell));
    if (i >= line.size()) break;
    ++i;  // comma
  }
  return cells;
}

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

void finish_entry(Manifest& m, ManifestEntry entry, const std::filesystem::path& base_dir,
                  const ManifestOptions& options, std::set<std::string>& seen) {
  if (entry.path.empty()) {
    throw Error(ErrorCode::kParseError, fmt::format("line {}: empty path", entry.line));
  }
  entry.emotion = to_lower(entry.emotion);
  if (!options.emotion_set.empty() &&
      std::find(options.emotion_set.begin(), options.emotion_set.end(), entry.emotion) ==
          options.emotion_set.end()) {
    throw Error(ErrorCode::kUnknownEmotion,
                fmt::format("line {}: unknown emotion label '{}'", entry.line, entry.emotion));
  }
  if (!seen.insert(entry.path).second) {
    throw Error(ErrorCode::kInvalidArgument,
                fmt::format("line {}: duplicate path '{}'", entry.line, entry.path));
  }
  const std::filesystem::path p(entry.path);
  entry.resolved = p.is_absolute() ? p : base_dir / p;
  if (options.check_files && !std::filesystem::is_regular_file(entry.resolved)) {
    throw Error(ErrorCode::kMissingFile,
                fmt::format("line {}: file '{}' does not exist", entry.line,
                            entry.resolved.string()));
  }
  m.entries.push_back(std::move(entry));
}

}  // namespace

Manifest parse_manifest_csv(std::string_view text, const std::filesystem::path& base_dir,
                            const ManifestOptions& options) {
  Manifest m;
  std::set<std::string> seen;
  std::map<std::string, std::size_t> columns;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  bool header_done = false;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (trim(line).empty()) {
      if (end == text.size()) break;
      continue;
    }
    const std::vector<Cell> cells = split_csv_line(line, line_no);
    if (!header_done) {
      for (std::size_t c = 0; c < cells.size(); ++c) columns[to_lower(trim(cells[c].text))] = c;
      for (const char* required : {"path", "speaker", "emotion", "split"}) {
        if (!columns.contains(required)) {
          throw Error(ErrorCode::kParseError,
                      fmt::format("line {}, column 1: header lacks column '{}'", line_no, required));
        }
      }
      header_done = true;
      continue;
    }
    if (cells.size() != columns.size()) {
      const std::size_t column =
          cells.size() > columns.size() ? cells[columns.size()].column : line.size() + 1;
      throw Error(ErrorCode::kParseError,
                  fmt::format("line {}, column {}: expected {} fields, found {}", line_no, column,
                              columns.size(), cells.size()));
    }
    ManifestEntry e;
    e.line = line_no;
    e.path = trim(cells[columns["path"]].text);
    e.speaker = trim(cells[columns["speaker"]].text);
    e.emotion = trim(cells[columns["emotion"]].text);
    const Cell& split = cells[columns["split"]];
    e.split = parse_split(trim(split.text), line_no, split.column);
    if (const auto it = columns.find("percent"); it != columns.end()) {
      const std::string v = trim(cells[it->second].text);
      if (!v.empty()) {
        char* endp = nullptr;
        const double pct = std::strtod(v.c_str(), &endp);
        if (endp != v.c_str() + v.size() || !std::isfinite(pct)) {
          throw Error(ErrorCode::kParseError,
                      fmt::format("line {}, column {}: '{}' is not a number", line_no,
                                  cells[it->second].column, v));
        }
        e.percent = pct;
      }
    }
    finish_entry(m, std::move(e), base_dir, options, seen);
    if (end == text.size()) break;
  }
  if (!header_done) throw Error(ErrorCode::kParseError, "line 1, column 1: empty manifest");
  return m;
}

Manifest parse_manifest_json(std::string_view text, const std::filesystem::path& base_dir,
                             const ManifestOptions& options) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    // nlohmann reports a byte offset; convert it to line and column.
    const std::size_t offset = std::min<std::size_t>(e.byte, text.size());
    const std::size_t line = 1 + static_cast<std::size_t>(
                                     std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
    const std::size_t last_nl = text.rfind('\n', offset == 0 ? 0 : offset - 1);
    const std::size_t column = last_nl == std::string_view::npos ? offset : offset - last_nl - 1;
    throw Error(ErrorCode::kParseError,
                fmt::format("line {}, column {}: invalid JSON manifest", line, column));
  }
  const nlohmann::json& list = j.is_object() && j.contains("entries") ? j.at("entries") : j;
  if (!list.is_array()) {
    throw Error(ErrorCode::kParseError, "line 1, column 1: JSON manifest must be an array");
  }
  Manifest m;
  std::set<std::string> seen;
  std::size_t index = 0;
  for (const auto& item : list) {
    ++index;
    try {
      ManifestEntry e;
      e.line = index;
      e.path = item.at("path").get<std::string>();
      e.speaker = item.value("speaker", std::string{});
      e.emotion = item.at("emotion").get<std::string>();
      e.split = parse_split(item.value("split", std::string{}), index, 1);
      if (item.contains("percent")) e.percent = item.at("percent").get<double>();
      finish_entry(m, std::move(e), base_dir, options, seen);
    } catch (const nlohmann::json::exception& ex) {
      throw Error(ErrorCode::kParseError, fmt::format("entry {}: {}", index, ex.what()));
    }
  }
  return m;
}

Manifest load_manifest(const std::filesystem::path& path, const ManifestOptions& options) {
  const std::string text = read_file(path);
  const std::filesystem::path base = path.has_parent_path() ? path.parent_path() : ".";
  const std::string first = trim(text.substr(0, std::min<std::size_t>(text.size(), 64)));
  if (to_lower(path.extension().string()) == ".json" || (!first.empty() && (first[0] == '[' || first[0] == '{'))) {
    return parse_manifest_json(text, base, options);
  }
  return parse_manifest_csv(text, base, options);
}

void auto_split(Manifest& manifest, std::uint64_t seed) {
  std::map<std::string, std::vector<std::size_t>> by_emotion;
  for (std::size_t i = 0; i < manifest.entries.size(); ++i) {
    if (manifest.entries[i].split == Split::kUnassigned) {
      by_emotion[manifest.entries[i].emotion].push_back(i);
    }
  }
  for (auto& [emotion, idx] : by_emotion) {
    std::uint64_t mixed = seed;
    for (char ch : emotion) mixed = (mixed ^ static_cast<unsigned char>(ch)) * 1099511628211ULL;
    std::mt19937_64 rng(mixed);
    std::shuffle(idx.begin(), idx.end(), rng);
    const double n = static_cast<double>(idx.size());
    auto n_test = static_cast<std::size_t>(std::llround(n * 30.0 / 350.0));
    auto n_eval = static_cast<std::size_t>(std::llround(n * 20.0 / 350.0));
    while (n_test + n_eval >= idx.size() && (n_test + n_eval) > 0) {
      if (n_test >= n_eval && n_test > 0) {
        --n_test;
      } else {
        --n_eval;
      }
    }
    for (std::size_t k = 0; k < idx.size(); ++k) {
      Split s = Split::kTrain;
      if (k < n_test) {
        s = Split::kTest;
      } else if (k < n_test + n_eval) {
        s = Split::kEval;
      }
      manifest.entries[idx[k]].split = s;
    }
  }
}

std::string manifest_csv(const Manifest& manifest) {
  std::string out = "path,speaker,emotion,split\n";
  for (const ManifestEntry& e : manifest.entries) {
    out += fmt::format("{},{},{},{}\n", e.path, e.speaker, e.emotion, split_name(e.split));
  }
  return out;
}

}  // namespace emomix
