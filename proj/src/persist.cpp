#include "emomix/persist.hpp"

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iterator>

#include <fmt/format.h>
#include <openssl/evp.h>

#include "emomix/error.hpp"
#include "emomix/manifest.hpp"
#include "json.hpp"

namespace emomix {

using nlohmann::json;

std::string format_double(double v) {
  if (v == 0.0) return "0";  // no "-0"
  return fmt::format("{:.9g}", v);
}

double round_sig9(double v) { return std::strtod(format_double(v).c_str(), nullptr); }

void atomic_write(const std::filesystem::path& path, std::string_view contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIoError, fmt::format("cannot write '{}'", tmp.string()));
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) {
      out.close();
      std::error_code ignored;
      std::filesystem::remove(tmp, ignored);
      throw Error(ErrorCode::kIoError, fmt::format("short write to '{}'", tmp.string()));
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error(ErrorCode::kIoError, fmt::format("cannot move into '{}'", path.string()));
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kMissingFile, fmt::format("cannot open '{}'", path.string()));
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorCode::kIoError, "SHA-256 computation failed");
  }
  std::string hex;
  hex.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", digest[i]);
  return hex;
}

namespace {

json rounded(std::span<const double> v) {
  json arr = json::array();
  for (double x : v) arr.push_back(round_sig9(x));
  return arr;
}

std::vector<double> doubles(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_array()) {
    throw Error(ErrorCode::kFormatError, fmt::format("missing array '{}'", key));
  }
  return j.at(key).get<std::vector<double>>();
}

json parse_json(std::string_view text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kParseError, fmt::format("invalid JSON: {}", e.what()));
  }
}

Standardization standardization_from(const json& j, std::size_t dim) {
  Standardization s;
  s.mean = doubles(j, "mean");
  s.scale = doubles(j, "scale");
  if (s.mean.size() != dim || s.scale.size() != dim) {
    throw Error(ErrorCode::kFormatError, "standardization size does not match the weights");
  }
  for (double v : s.scale) {
    if (!(v > 0.0)) throw Error(ErrorCode::kFormatError, "standardization scale must be > 0");
  }
  return s;
}

}  // namespace

std::string ranking_model_to_json(const RankingModel& model) {
  json j;
  j["format_version"] = kModelFormatVersion;
  j["emotion_pair"] = {model.emotion_pair.first, model.emotion_pair.second};
  j["weights"] = rounded(model.weights);
  j["standardization"] = {{"mean", rounded(model.standardization.mean)},
                          {"scale", rounded(model.standardization.scale)}};
  j["score_min"] = round_sig9(model.score_min);
  j["score_max"] = round_sig9(model.score_max);
  j["c"] = round_sig9(model.c);
  j["converged"] = model.converged;
  j["objective"] = round_sig9(model.objective);
  return j.dump(2) + "\n";
}

RankingModel ranking_model_from_json(std::string_view text) {
  const json j = parse_json(text);
  try {
    if (j.at("format_version").get<int>() != kModelFormatVersion) {
      throw Error(ErrorCode::kFormatError,
                  fmt::format("unsupported model format_version {}", j.at("format_version").dump()));
    }
    RankingModel m;
    const auto pair = j.at("emotion_pair").get<std::vector<std::string>>();
    if (pair.size() != 2) throw Error(ErrorCode::kFormatError, "emotion_pair needs two labels");
    m.emotion_pair = {pair[0], pair[1]};
    m.weights = doubles(j, "weights");
    m.standardization = standardization_from(j.at("standardization"), m.weights.size());
    m.score_min = j.at("score_min").get<double>();
    m.score_max = j.at("score_max").get<double>();
    m.c = j.at("c").get<double>();
    m.converged = j.at("converged").get<bool>();
    m.objective = j.at("objective").get<double>();
    if (m.score_min > m.score_max) throw Error(ErrorCode::kFormatError, "score_min > score_max");
    return m;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kFormatError, fmt::format("malformed model: {}", e.what()));
  }
}

void save_ranking_model(const std::filesystem::path& path, const RankingModel& model) {
  atomic_write(path, ranking_model_to_json(model));
}

RankingModel load_ranking_model(const std::filesystem::path& path) {
  return ranking_model_from_json(read_file(path));
}

std::string probe_model_to_json(const ProbeModel& model) {
  json j;
  j["format_version"] = kProbeFormatVersion;
  j["emotion_labels"] = model.emotion_labels;
  json w = json::array();
  for (Eigen::Index r = 0; r < model.weights.rows(); ++r) {
    std::vector<double> row(static_cast<std::size_t>(model.weights.cols()));
    for (Eigen::Index c = 0; c < model.weights.cols(); ++c) row[c] = model.weights(r, c);
    w.push_back(rounded(row));
  }
  j["weights"] = std::move(w);
  j["biases"] = rounded(std::span<const double>(model.biases.data(),
                                                static_cast<std::size_t>(model.biases.size())));
  j["standardization"] = {{"mean", rounded(model.standardization.mean)},
                          {"scale", rounded(model.standardization.scale)}};
  return j.dump(2) + "\n";
}

ProbeModel probe_model_from_json(std::string_view text) {
  const json j = parse_json(text);
  try {
    if (j.at("format_version").get<int>() != kProbeFormatVersion) {
      throw Error(ErrorCode::kFormatError, "unsupported probe format_version");
    }
    ProbeModel m;
    m.emotion_labels = j.at("emotion_labels").get<std::vector<std::string>>();
    const auto rows = j.at("weights").get<std::vector<std::vector<double>>>();
    const std::vector<double> biases = doubles(j, "biases");
    const std::size_t dim = rows.empty() ? 0 : rows.front().size();
    m.weights.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(dim));
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (rows[r].size() != dim) throw Error(ErrorCode::kFormatError, "ragged probe weights");
      for (std::size_t c = 0; c < dim; ++c) {
        m.weights(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
      }
    }
    m.biases = Eigen::Map<const Eigen::VectorXd>(biases.data(),
                                                 static_cast<Eigen::Index>(biases.size()));
    m.standardization = standardization_from(j.at("standardization"), dim);
    m.validate();
    return m;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kFormatError, fmt::format("malformed probe: {}", e.what()));
  }
}

MixSpec mix_spec_from_json(std::string_view text) {
  MixSpec spec;
  try {
    const auto j = nlohmann::ordered_json::parse(text);
    for (const auto& [key, value] : j.items()) {
      (void)value;
      if (key != "primary_emotion" && key != "mode" && key != "references" &&
          key != "primary_percentage") {
        throw Error(ErrorCode::kParseError, fmt::format("mix spec: unknown key '{}'", key));
      }
    }
    spec.primary_emotion = to_lower(j.at("primary_emotion").get<std::string>());
    const std::string mode = j.value("mode", std::string("mixing"));
    if (mode == "mixing") {
      spec.mode = MixMode::kMixing;
    } else if (mode == "transition") {
      spec.mode = MixMode::kTransition;
    } else {
      throw Error(ErrorCode::kParseError, fmt::format("mix spec: unknown mode '{}'", mode));
    }
    if (j.contains("references")) {
      for (const auto& [emotion, pct] : j.at("references").items()) {
        spec.reference_percentages.emplace_back(to_lower(emotion), pct.get<double>());
      }
    }
    if (j.contains("primary_percentage")) spec.primary_percentage = j.at("primary_percentage").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParseError, fmt::format("mix spec: {}", e.what()));
  }
  spec.validate();
  return spec;
}

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  out += '"';
  return out;
}

std::string attribute_csv(const std::vector<std::pair<std::string, EmotionAttributeVector>>& rows,
                          std::string_view first_column) {
  std::string out(first_column);
  if (!rows.empty()) {
    for (const auto& [pair, v] : rows.front().second.entries) {
      (void)v;
      out += ',' + csv_field(pair.id());
    }
  }
  out += '\n';
  for (const auto& [label, vec] : rows) {
    out += csv_field(label);
    for (const auto& [pair, v] : vec.entries) {
      (void)pair;
      out += ',' + format_double(v);
    }
    out += '\n';
  }
  return out;
}

std::string feature_csv(const std::vector<FeatureRow>& rows) {
  std::string out = "path";
  for (const std::string& name : feature_names()) out += ',' + name;
  out += '\n';
  for (const FeatureRow& row : rows) {
    out += csv_field(row.path);
    for (double v : row.features.values) out += ',' + format_double(v);
    out += '\n';
  }
  return out;
}

namespace {

constexpr char kCacheMagic[8] = {'E', 'M', 'X', 'F', 'E', 'A', 'T', '\0'};

template <typename T>
void put_le(std::string& out, T v) {
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  template <typename T>
  T get() {
    need(sizeof(T));
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      v |= static_cast<T>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    }
    pos_ += sizeof(T);
    return v;
  }
  std::string_view take(std::size_t n) {
    need(n);
    const std::string_view s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw Error(ErrorCode::kFormatError, "feature cache truncated");
  }
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string encode_feature_cache(const std::vector<FeatureRow>& rows) {
  const std::size_t dim = rows.empty() ? kFeatureDim : rows.front().features.values.size();
  const std::string layout =
      rows.empty() ? std::string(kFeatureLayoutVersion) : rows.front().features.layout_version;
  std::string out(kCacheMagic, sizeof(kCacheMagic));
  put_le<std::uint32_t>(out, kFeatureCacheVersion);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(dim));
  put_le<std::uint64_t>(out, rows.size());
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(layout.size()));
  out += layout;
  for (const FeatureRow& row : rows) {
    if (row.features.values.size() != dim || row.features.layout_version != layout) {
      throw Error(ErrorCode::kDimensionMismatch, "feature rows disagree on dimension or layout");
    }
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(row.path.size()));
    out += row.path;
    for (double v : row.features.values) put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v));
  }
  return out;
}

std::vector<FeatureRow> decode_feature_cache(std::string_view bytes) {
  Reader r(bytes);
  if (r.take(sizeof(kCacheMagic)) != std::string_view(kCacheMagic, sizeof(kCacheMagic))) {
    throw Error(ErrorCode::kFormatError, "not an emomix feature cache");
  }
  const auto version = r.get<std::uint32_t>();
  if (version != kFeatureCacheVersion) {
    throw Error(ErrorCode::kFormatError, fmt::format("unsupported feature cache version {}", version));
  }
  const auto dim = r.get<std::uint32_t>();
  const auto count = r.get<std::uint64_t>();
  const std::string layout(r.take(r.get<std::uint32_t>()));
  std::vector<FeatureRow> rows;
  for (std::uint64_t i = 0; i < count; ++i) {
    FeatureRow row;
    row.path = std::string(r.take(r.get<std::uint32_t>()));
    row.features.layout_version = layout;
    row.features.values.resize(dim);
    for (auto& v : row.features.values) v = std::bit_cast<double>(r.get<std::uint64_t>());
    rows.push_back(std::move(row));
  }
  if (!r.done()) throw Error(ErrorCode::kFormatError, "trailing bytes in feature cache");
  return rows;
}

}  // namespace emomix
