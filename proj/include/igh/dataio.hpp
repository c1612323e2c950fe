#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "igh/dataset.hpp"
#include "igh/error.hpp"

namespace igh {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Number formatting

/// Shortest representation that parses back to the identical double.
inline std::string format_real(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t");
  return s.substr(first, last - first + 1);
}

inline std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      cells.push_back(line.substr(start));
      return cells;
    }
    cells.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

inline std::optional<double> parse_real(std::string_view cell) {
  if (cell.empty()) return std::nullopt;
  if (cell.front() == '+') cell.remove_prefix(1);
  double value = 0.0;
  const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (res.ec != std::errc() || res.ptr != cell.data() + cell.size()) return std::nullopt;
  if (!std::isfinite(value)) return std::nullopt;
  return value;
}

inline std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::io, "cannot open '" + path.string() + "' for reading");
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) fail(ErrorKind::io, "read error on '" + path.string() + "'");
  return content;
}

inline void write_file(const fs::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::io, "cannot open '" + path.string() + "' for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  out.flush();
  if (!out) fail(ErrorKind::io, "write error on '" + path.string() + "'");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// CSV

struct CsvOptions {
  std::string missing_token = "NA";
  bool has_header = false;
  bool check_invariants = true;  // reject fully missing rows / columns
};

/// Parses comma-separated reals; cells equal to the missing token (after
/// trimming spaces) become missing.
inline Dataset parse_csv(std::string_view text, const CsvOptions& options = {}) {
  std::vector<std::string_view> lines;
  std::vector<std::size_t> line_numbers;
  std::size_t pos = 0;
  std::size_t number = 0;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    ++number;
    if (!detail::trim(line).empty()) {
      lines.push_back(line);
      line_numbers.push_back(number);
    }
    pos = end + 1;
  }
  if (lines.empty()) fail(ErrorKind::format, "CSV input is empty");

  std::vector<std::string> names;
  std::size_t first_data = 0;
  std::optional<std::size_t> width;
  if (options.has_header) {
    for (auto cell : detail::split_commas(lines[0])) names.emplace_back(detail::trim(cell));
    width = names.size();
    first_data = 1;
  }

  std::vector<std::vector<std::optional<double>>> rows;
  for (std::size_t r = first_data; r < lines.size(); ++r) {
    const auto cells = detail::split_commas(lines[r]);
    if (!width) width = cells.size();
    if (cells.size() != *width) {
      fail(ErrorKind::format, "line " + std::to_string(line_numbers[r]) + ": expected " +
                                  std::to_string(*width) + " cells, found " +
                                  std::to_string(cells.size()));
    }
    std::vector<std::optional<double>> row;
    row.reserve(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const auto cell = detail::trim(cells[c]);
      if (cell == options.missing_token) {
        row.emplace_back(std::nullopt);
        continue;
      }
      const auto value = detail::parse_real(cell);
      if (!value) {
        fail(ErrorKind::format, "line " + std::to_string(line_numbers[r]) + ", column " +
                                    std::to_string(c + 1) + ": cannot parse '" +
                                    std::string(cell) + "' as a finite real");
      }
      row.emplace_back(*value);
    }
    rows.push_back(std::move(row));
  }

  const Index n = static_cast<Index>(rows.size());
  const Index d = static_cast<Index>(width.value_or(0));
  Matrix values(n, d);
  Mask mask(n, d);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < d; ++j) {
      const auto& cell = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      mask(i, j) = cell.has_value();
      values(i, j) = cell.value_or(missing_value);
    }
  }
  Dataset data(std::move(values), std::move(mask), std::move(names));
  if (options.check_invariants && n > 0) {
    const InvariantReport report = check_invariants(data);
    if (!report.ok()) {
      std::string msg = report.describe();
      if (!data.column_names.empty() && !report.empty_cols.empty()) {
        msg += " (columns:";
        for (Index j : report.empty_cols) msg += " " + data.column_label(j);
        msg += ")";
      }
      fail(ErrorKind::data_invariant, msg);
    }
  }
  return data;
}

inline Dataset read_csv(const fs::path& path, const CsvOptions& options = {}) {
  return parse_csv(detail::read_file(path), options);
}

inline std::string format_csv(const Dataset& data, const CsvOptions& options = {}) {
  std::string out;
  if (options.has_header) {
    for (Index j = 0; j < data.cols(); ++j) {
      std::string name = data.column_names.empty()
                             ? "x" + std::to_string(j + 1)
                             : data.column_names[static_cast<std::size_t>(j)];
      if (name.find_first_of(",\n\r") != std::string::npos) {
        fail(ErrorKind::format, "column name '" + name + "' contains a separator");
      }
      if (j) out += ',';
      out += name;
    }
    out += '\n';
  }
  for (Index i = 0; i < data.rows(); ++i) {
    for (Index j = 0; j < data.cols(); ++j) {
      if (j) out += ',';
      out += data.mask(i, j) ? format_real(data.values(i, j)) : options.missing_token;
    }
    out += '\n';
  }
  return out;
}

inline void write_csv(const Dataset& data, const fs::path& path, const CsvOptions& options = {}) {
  detail::write_file(path, format_csv(data, options));
}

// ---------------------------------------------------------------------------
// PGM (binary P5)

struct PgmImage {
  int width = 0;
  int height = 0;
  int maxval = 255;
  std::vector<std::uint16_t> pixels;  // row-major
};

inline PgmImage parse_pgm(std::string_view bytes, const std::string& name = "<pgm>") {
  std::size_t pos = 0;
  auto skip_space = [&] {
    while (pos < bytes.size()) {
      const char c = bytes[pos];
      if (c == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
        ++pos;
      } else {
        break;
      }
    }
  };
  auto read_int = [&](const char* what) {
    skip_space();
    int value = 0;
    const auto res = std::from_chars(bytes.data() + pos, bytes.data() + bytes.size(), value);
    if (res.ec != std::errc() || value <= 0) {
      fail(ErrorKind::format, name + ": bad PGM " + what);
    }
    pos = static_cast<std::size_t>(res.ptr - bytes.data());
    return value;
  };

  if (bytes.substr(0, 2) != "P5") fail(ErrorKind::format, name + ": not a binary PGM (P5)");
  pos = 2;
  PgmImage img;
  img.width = read_int("width");
  img.height = read_int("height");
  img.maxval = read_int("maxval");
  if (img.maxval > 65535) fail(ErrorKind::format, name + ": maxval exceeds 65535");
  if (pos >= bytes.size()) fail(ErrorKind::format, name + ": truncated PGM header");
  ++pos;  // single whitespace before the raster

  const std::size_t count = static_cast<std::size_t>(img.width) * static_cast<std::size_t>(img.height);
  const std::size_t depth = img.maxval < 256 ? 1 : 2;
  if (bytes.size() - pos < count * depth) {
    fail(ErrorKind::format, name + ": truncated PGM raster");
  }
  img.pixels.resize(count);
  for (std::size_t k = 0; k < count; ++k) {
    const auto hi = static_cast<unsigned char>(bytes[pos + k * depth]);
    std::uint16_t v = hi;
    if (depth == 2) {
      v = static_cast<std::uint16_t>((hi << 8) | static_cast<unsigned char>(bytes[pos + 2 * k + 1]));
    }
    if (v > img.maxval) fail(ErrorKind::format, name + ": pixel exceeds maxval");
    img.pixels[k] = v;
  }
  return img;
}

inline PgmImage read_pgm(const fs::path& path) {
  return parse_pgm(detail::read_file(path), path.string());
}

inline std::string format_pgm(const PgmImage& img) {
  const std::size_t count = static_cast<std::size_t>(img.width) * static_cast<std::size_t>(img.height);
  if (img.pixels.size() != count) fail(ErrorKind::dimension, "PGM pixel count mismatch");
  std::string out = "P5\n" + std::to_string(img.width) + " " + std::to_string(img.height) +
                    "\n" + std::to_string(img.maxval) + "\n";
  const bool wide = img.maxval >= 256;
  out.reserve(out.size() + count * (wide ? 2 : 1));
  for (std::uint16_t v : img.pixels) {
    if (wide) out += static_cast<char>(v >> 8);
    out += static_cast<char>(v & 0xff);
  }
  return out;
}

inline void write_pgm(const fs::path& path, const PgmImage& img) {
  detail::write_file(path, format_pgm(img));
}

// ---------------------------------------------------------------------------
// Image grids

/// Describes how dataset rows map back to image files.
struct ImageGridManifest {
  struct Entry {
    Index row_id = 0;
    std::string source_name;
  };
  int width = 0;
  int height = 0;
  std::vector<Entry> entries;
  double value_min = 0.0;
  double value_max = 1.0;
};

inline void to_json(nlohmann::json& j, const ImageGridManifest& m) {
  j = nlohmann::json{{"width", m.width}, {"height", m.height},
                     {"value_range", {m.value_min, m.value_max}}};
  auto& entries = j["entries"] = nlohmann::json::array();
  for (const auto& e : m.entries) {
    entries.push_back({{"row_id", e.row_id}, {"source_name", e.source_name}});
  }
}

inline void from_json(const nlohmann::json& j, ImageGridManifest& m) {
  m.width = j.at("width").get<int>();
  m.height = j.at("height").get<int>();
  m.value_min = j.at("value_range").at(0).get<double>();
  m.value_max = j.at("value_range").at(1).get<double>();
  m.entries.clear();
  for (const auto& e : j.at("entries")) {
    m.entries.push_back({e.at("row_id").get<Index>(), e.at("source_name").get<std::string>()});
  }
}

inline void save_manifest(const ImageGridManifest& manifest, const fs::path& path) {
  detail::write_file(path, nlohmann::json(manifest).dump(2) + "\n");
}

inline ImageGridManifest load_manifest(const fs::path& path) {
  try {
    return nlohmann::json::parse(detail::read_file(path)).get<ImageGridManifest>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::format, path.string() + ": invalid manifest: " + e.what());
  }
}

struct MaskConvention {
  enum class Kind { all_observed, sentinel_pixel, sidecar_mask };
  Kind kind = Kind::all_observed;
  int sentinel = 0;  // raw pixel value marking a missing slot

  static MaskConvention sentinel_pixel(int value) { return {Kind::sentinel_pixel, value}; }
  static MaskConvention sidecar_mask() { return {Kind::sidecar_mask, 0}; }
};

struct ImageImport {
  Dataset data;
  ImageGridManifest manifest;
};

inline constexpr std::string_view mask_suffix = ".mask.pgm";

inline bool is_mask_file(const std::string& name) {
  return name.size() >= mask_suffix.size() &&
         name.compare(name.size() - mask_suffix.size(), mask_suffix.size(), mask_suffix) == 0;
}

/// Every *.pgm in `dir` (excluding *.mask.pgm sidecars), in lexicographic
/// file-name order, becomes one row-major flattened row scaled to [0, 1].
inline ImageImport import_images(const fs::path& dir, const MaskConvention& convention = {}) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) fail(ErrorKind::io, "'" + dir.string() + "' is not a directory");
  std::vector<std::string> names;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string name = entry.path().filename().string();
    if (entry.path().extension() == ".pgm" && !is_mask_file(name)) names.push_back(name);
  }
  std::sort(names.begin(), names.end());
  if (names.empty()) fail(ErrorKind::format, "no .pgm images in '" + dir.string() + "'");

  ImageImport out;
  ImageGridManifest& manifest = out.manifest;
  Matrix values;
  Mask mask;
  for (std::size_t r = 0; r < names.size(); ++r) {
    const PgmImage img = read_pgm(dir / names[r]);
    if (r == 0) {
      manifest.width = img.width;
      manifest.height = img.height;
      const Index d = static_cast<Index>(img.width) * img.height;
      values.resize(static_cast<Index>(names.size()), d);
      mask = Mask::Constant(values.rows(), d, true);
    } else if (img.width != manifest.width || img.height != manifest.height) {
      fail(ErrorKind::format, names[r] + ": dimensions " + std::to_string(img.width) + "x" +
                                  std::to_string(img.height) + " differ from " +
                                  std::to_string(manifest.width) + "x" +
                                  std::to_string(manifest.height));
    }
    const Index row = static_cast<Index>(r);
    for (std::size_t k = 0; k < img.pixels.size(); ++k) {
      values(row, static_cast<Index>(k)) = static_cast<double>(img.pixels[k]) / img.maxval;
    }
    if (convention.kind == MaskConvention::Kind::sentinel_pixel) {
      for (std::size_t k = 0; k < img.pixels.size(); ++k) {
        if (img.pixels[k] == convention.sentinel) mask(row, static_cast<Index>(k)) = false;
      }
    } else if (convention.kind == MaskConvention::Kind::sidecar_mask) {
      const std::string stem = names[r].substr(0, names[r].size() - 4);
      const fs::path side = dir / (stem + std::string(mask_suffix));
      if (!fs::exists(side, ec)) fail(ErrorKind::format, "missing sidecar mask " + side.string());
      const PgmImage m = read_pgm(side);
      if (m.width != img.width || m.height != img.height) {
        fail(ErrorKind::format, side.string() + ": mask dimensions differ from image");
      }
      for (std::size_t k = 0; k < m.pixels.size(); ++k) {
        if (m.pixels[k] == 0) mask(row, static_cast<Index>(k)) = false;
      }
    }
    manifest.entries.push_back({row, names[r]});
  }
  out.data = Dataset(std::move(values), std::move(mask));
  return out;
}

/// Writes each row as an 8-bit P5 image. Values are clamped to the
/// manifest's value range and quantized with round-half-up; missing slots
/// render as the range minimum.
inline void export_images(const Dataset& data, const ImageGridManifest& manifest,
                          const fs::path& dir) {
  const Index d = static_cast<Index>(manifest.width) * manifest.height;
  if (data.cols() != d) {
    fail(ErrorKind::dimension, "dataset has " + std::to_string(data.cols()) +
                                   " columns but images hold " + std::to_string(d) + " pixels");
  }
  if (static_cast<Index>(manifest.entries.size()) != data.rows()) {
    fail(ErrorKind::dimension, "manifest lists " + std::to_string(manifest.entries.size()) +
                                   " images for " + std::to_string(data.rows()) + " rows");
  }
  if (!(manifest.value_max > manifest.value_min)) {
    fail(ErrorKind::configuration, "manifest value range is empty");
  }
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(ErrorKind::io, "cannot create '" + dir.string() + "': " + ec.message());

  const double span = manifest.value_max - manifest.value_min;
  for (const auto& entry : manifest.entries) {
    if (entry.row_id < 0 || entry.row_id >= data.rows()) {
      fail(ErrorKind::index, "manifest row id " + std::to_string(entry.row_id) + " out of range");
    }
    PgmImage img;
    img.width = manifest.width;
    img.height = manifest.height;
    img.maxval = 255;
    img.pixels.resize(static_cast<std::size_t>(d));
    for (Index k = 0; k < d; ++k) {
      std::uint16_t q = 0;
      if (data.mask(entry.row_id, k)) {
        const double v = std::clamp(data.values(entry.row_id, k), manifest.value_min,
                                    manifest.value_max);
        q = static_cast<std::uint16_t>(
            std::min(255.0, std::floor((v - manifest.value_min) / span * 255.0 + 0.5)));
      }
      img.pixels[static_cast<std::size_t>(k)] = q;
    }
    std::string name = entry.source_name;
    if (fs::path(name).extension() != ".pgm") name += ".pgm";
    write_pgm(dir / name, img);
  }
}

// ---------------------------------------------------------------------------
// Run reports

struct RunReportRow {
  int iteration = 0;
  double l2_error = 0.0;
  std::optional<double> std_dev;
  double wall_time_seconds = 0.0;
};

/// Line-oriented CSV: iteration,l2_error,std_dev,wall_time_seconds.
/// Provenance lines are emitted first, each prefixed with "# ".
inline std::string format_run_report(const std::vector<RunReportRow>& rows,
                                     const std::vector<std::string>& provenance = {}) {
  std::string out;
  for (const auto& line : provenance) out += "# " + line + "\n";
  out += "iteration,l2_error,std_dev,wall_time_seconds\n";
  for (const auto& r : rows) {
    out += std::to_string(r.iteration) + "," + format_real(r.l2_error) + "," +
           (r.std_dev ? format_real(*r.std_dev) : std::string("NA")) + "," +
           format_real(r.wall_time_seconds) + "\n";
  }
  return out;
}

inline void write_run_report(const fs::path& path, const std::vector<RunReportRow>& rows,
                             const std::vector<std::string>& provenance = {}) {
  detail::write_file(path, format_run_report(rows, provenance));
}

}  // namespace igh
