#include "tn4ml/pipeline/dataset.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "tn4ml/error.hpp"

namespace tn4ml {
namespace {

// One record per call; quoted fields may hold commas, quotes ("") and newlines.
bool read_record(std::istream& in, std::vector<std::string>& fields, std::size_t& line) {
  fields.clear();
  if (in.peek() == std::char_traits<char>::eof()) return false;
  std::string field;
  bool quoted = false, was_quoted = false;
  ++line;
  for (;;) {
    const int c = in.get();
    if (c == std::char_traits<char>::eof()) {
      if (quoted) throw ParseError("line " + std::to_string(line) + ": unterminated quoted field");
      break;
    }
    if (quoted) {
      if (c == '"') {
        if (in.peek() == '"') {
          field += '"';
          in.get();
        } else {
          quoted = false;
        }
      } else {
        if (c == '\n') ++line;
        field += static_cast<char>(c);
      }
      continue;
    }
    if (c == '"' && field.empty() && !was_quoted) {
      quoted = was_quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
      was_quoted = false;
    } else if (c == '\n') {
      break;
    } else if (c == '\r') {
      if (in.peek() == '\n') in.get();
      break;
    } else {
      field += static_cast<char>(c);
    }
  }
  fields.push_back(std::move(field));
  return true;
}

std::optional<double> parse_number(std::string_view s) {
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::uint32_t read_be32(std::istream& in, const std::string& what) {
  std::array<unsigned char, 4> b{};
  if (!in.read(reinterpret_cast<char*>(b.data()), 4)) throw ParseError(what + ": truncated header");
  return (std::uint32_t{b[0]} << 24) | (std::uint32_t{b[1]} << 16) | (std::uint32_t{b[2]} << 8) | b[3];
}

}  // namespace

Dataset load_csv(const std::filesystem::path& path, std::optional<std::string> label_column,
                 std::span<const std::string> drop_columns) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::vector<std::string> header, row;
  std::size_t line = 0;
  if (!read_record(in, header, line) || (header.size() == 1 && header[0].empty())) {
    throw ParseError(path.string() + ": missing header row");
  }
  for (const auto& h : header) {
    if (parse_number(h)) throw ParseError(path.string() + ": missing header row (numeric first line)");
  }

  std::optional<std::size_t> label_at;
  std::vector<bool> keep(header.size(), true);
  if (label_column) {
    const auto it = std::find(header.begin(), header.end(), *label_column);
    if (it == header.end()) throw ParseError(path.string() + ": no column named '" + *label_column + "'");
    label_at = static_cast<std::size_t>(it - header.begin());
    keep[*label_at] = false;
  }
  for (const auto& d : drop_columns) {
    const auto it = std::find(header.begin(), header.end(), d);
    if (it == header.end()) throw ParseError(path.string() + ": no column named '" + d + "'");
    keep[static_cast<std::size_t>(it - header.begin())] = false;
  }

  Dataset out;
  for (std::size_t c = 0; c < header.size(); ++c)
    if (keep[c]) out.feature_names.push_back(header[c]);
  std::map<std::string, std::size_t> label_ids;
  std::size_t record = 0;
  while (read_record(in, row, line)) {
    ++record;
    if (row.size() == 1 && row[0].empty()) continue;
    if (row.size() != header.size()) {
      throw ParseError(path.string() + ": row " + std::to_string(record) + " (line " + std::to_string(line) +
                       ") has " + std::to_string(row.size()) + " fields, header has " +
                       std::to_string(header.size()));
    }
    std::vector<double> values;
    values.reserve(out.feature_names.size());
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (!keep[c]) continue;
      const auto v = parse_number(row[c]);
      if (!v) {
        throw ParseError(path.string() + ": row " + std::to_string(record) + ", column '" + header[c] +
                         "': not a number: '" + row[c] + "'");
      }
      values.push_back(*v);
    }
    out.samples.push_back(std::move(values));
    if (label_at) {
      const auto& raw = row[*label_at];
      auto [it, inserted] = label_ids.try_emplace(raw, out.label_names.size());
      if (inserted) out.label_names.push_back(raw);
      out.labels.push_back(it->second);
    }
  }
  return out;
}

Dataset load_idx(const std::filesystem::path& images, const std::filesystem::path& labels) {
  std::ifstream img(images, std::ios::binary);
  if (!img) throw Error("cannot open " + images.string());
  std::ifstream lab(labels, std::ios::binary);
  if (!lab) throw Error("cannot open " + labels.string());

  if (read_be32(img, images.string()) != 0x00000803u) throw ParseError(images.string() + ": bad IDX magic");
  const std::size_t n = read_be32(img, images.string());
  const std::size_t h = read_be32(img, images.string());
  const std::size_t w = read_be32(img, images.string());
  if (read_be32(lab, labels.string()) != 0x00000801u) throw ParseError(labels.string() + ": bad IDX magic");
  const std::size_t nl = read_be32(lab, labels.string());
  if (nl != n) throw ParseError("IDX image/label counts differ: " + std::to_string(n) + " vs " + std::to_string(nl));

  Dataset out;
  out.height = h;
  out.width = w;
  out.samples.resize(n);
  out.labels.resize(n);
  std::vector<unsigned char> buf(h * w);
  for (std::size_t i = 0; i < n; ++i) {
    if (!img.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()))) {
      throw ParseError(images.string() + ": truncated at image " + std::to_string(i));
    }
    auto& s = out.samples[i];
    s.resize(h * w);
    for (std::size_t p = 0; p < buf.size(); ++p) s[p] = static_cast<double>(buf[p]) / 255.0;
  }
  std::vector<unsigned char> lb(n);
  if (!lab.read(reinterpret_cast<char*>(lb.data()), static_cast<std::streamsize>(n))) {
    throw ParseError(labels.string() + ": truncated label data");
  }
  for (std::size_t i = 0; i < n; ++i) out.labels[i] = lb[i];
  for (std::size_t c = 0; c < 10; ++c) out.label_names.push_back(std::to_string(c));
  return out;
}

Dataset subset(const Dataset& d, std::span<const std::size_t> rows) {
  Dataset out;
  out.feature_names = d.feature_names;
  out.label_names = d.label_names;
  out.height = d.height;
  out.width = d.width;
  out.samples.reserve(rows.size());
  for (std::size_t r : rows) {
    out.samples.push_back(d.samples.at(r));
    if (d.has_labels()) out.labels.push_back(d.labels.at(r));
  }
  return out;
}

MinMaxScaler MinMaxScaler::fit(const Dataset& train) {
  if (train.size() == 0) throw ShapeError("cannot fit a scaler on an empty split");
  MinMaxScaler s;
  s.min_ = train.samples.front();
  s.max_ = train.samples.front();
  for (const auto& row : train.samples) {
    if (row.size() != s.min_.size()) throw ShapeError("ragged feature rows");
    for (std::size_t f = 0; f < row.size(); ++f) {
      s.min_[f] = std::min(s.min_[f], row[f]);
      s.max_[f] = std::max(s.max_[f], row[f]);
    }
  }
  return s;
}

std::vector<double> MinMaxScaler::transform(std::span<const double> row) const {
  if (row.size() != min_.size()) {
    throw ShapeError("scaler fitted on " + std::to_string(min_.size()) + " features, got " +
                     std::to_string(row.size()));
  }
  std::vector<double> out(row.size());
  for (std::size_t f = 0; f < row.size(); ++f) {
    const double span = max_[f] - min_[f];
    out[f] = span > 0.0 ? std::clamp((row[f] - min_[f]) / span, 0.0, 1.0) : 0.0;
  }
  return out;
}

Dataset MinMaxScaler::transform(Dataset d) const {
  for (auto& row : d.samples) row = transform(row);
  return d;
}

nlohmann::json MinMaxScaler::to_json() const { return {{"min", min_}, {"max", max_}}; }

MinMaxScaler MinMaxScaler::from_json(const nlohmann::json& j) {
  MinMaxScaler s;
  try {
    s.min_ = j.at("min").get<std::vector<double>>();
    s.max_ = j.at("max").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("scaler json: ") + e.what());
  }
  if (s.min_.size() != s.max_.size()) throw ParseError("scaler json: min/max lengths differ");
  return s;
}

std::vector<double> downsample(std::span<const double> image, std::size_t height, std::size_t width,
                               std::size_t th, std::size_t tw) {
  if (image.size() != height * width) throw ShapeError("image size does not match height x width");
  if (th == 0 || tw == 0 || height % th != 0 || width % tw != 0) {
    throw ShapeError("cannot block-average " + std::to_string(height) + "x" + std::to_string(width) + " to " +
                     std::to_string(th) + "x" + std::to_string(tw));
  }
  const std::size_t bh = height / th, bw = width / tw;
  const double inv = 1.0 / static_cast<double>(bh * bw);
  std::vector<double> out(th * tw, 0.0);
  for (std::size_t i = 0; i < height; ++i)
    for (std::size_t j = 0; j < width; ++j) out[(i / bh) * tw + j / bw] += image[i * width + j];
  for (double& v : out) v *= inv;
  return out;
}

Dataset downsample(const Dataset& images, std::size_t th, std::size_t tw) {
  if (images.height == 0) throw ShapeError("downsample needs image data");
  Dataset out = images;
  for (auto& s : out.samples) s = downsample(s, images.height, images.width, th, tw);
  out.height = th;
  out.width = tw;
  return out;
}

}  // namespace tn4ml
