// Copyright 2026 The PRSB Authors
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

#include "prsb/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <system_error>

namespace prsb::io {
namespace {

struct Line {
  std::string_view text;
  std::size_t number = 0;  // 1-based
};

std::vector<Line> split_lines(std::string_view text) {
  std::vector<Line> lines;
  std::size_t start = 0;
  std::size_t number = 1;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back({line, number});
    if (end == text.size()) break;
    start = end + 1;
    ++number;
  }
  return lines;
}

bool is_blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](char c) { return c == ' ' || c == '\t' || c == '\r'; });
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line, char delimiter) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t end = line.find(delimiter, start);
    if (end == std::string_view::npos) {
      fields.push_back(trim(line.substr(start)));
      break;
    }
    fields.push_back(trim(line.substr(start, end - start)));
    start = end + 1;
  }
  return fields;
}

std::optional<double> to_number(std::string_view s) {
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return value;
}

std::ofstream open_output(const std::filesystem::path& path, std::ios::openmode mode = std::ios::trunc) {
  std::ofstream out(path, std::ios::binary | std::ios::out | mode);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  return out;
}

void finish_output(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw std::runtime_error("failed writing '" + path.string() + "'");
}

std::uint32_t read_be32(std::span<const std::uint8_t> bytes, std::size_t at) {
  return (std::uint32_t{bytes[at]} << 24) | (std::uint32_t{bytes[at + 1]} << 16) | (std::uint32_t{bytes[at + 2]} << 8) |
         std::uint32_t{bytes[at + 3]};
}

void check_report_field(const std::string& field) {
  if (field.find_first_of(",\n\r") != std::string::npos) {
    throw std::invalid_argument("report field '" + field + "' contains a comma or newline");
  }
}

}  // namespace

ParseError::ParseError(std::string source, std::size_t line, std::size_t column, const std::string& message)
    : std::runtime_error(source + ":" + std::to_string(line) + ":" + std::to_string(column) + ": " + message),
      source_(std::move(source)),
      line_(line),
      column_(column) {}

ParseError::ParseError(std::string source, std::size_t offset, const std::string& message)
    : std::runtime_error(source + "@" + std::to_string(offset) + ": " + message),
      source_(std::move(source)),
      offset_(offset) {}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path.string(), 0, "cannot open file");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) throw std::runtime_error("cannot format number");
  return {buf, ptr};
}

char delimiter_for(const std::filesystem::path& path) {
  const auto ext = path.extension().string();
  return ext == ".tsv" || ext == ".tab" || ext == ".txt" ? '\t' : ',';
}

Table parse_delimited(std::string_view text, const DelimitedOptions& options, const std::string& source) {
  const char delim = options.delimiter == 0 ? ',' : options.delimiter;
  std::vector<Line> lines;
  for (const auto& line : split_lines(text)) {
    if (!is_blank(line.text)) lines.push_back(line);
  }
  if (lines.empty()) throw ParseError(source, 1, 1, "empty file");

  std::size_t first_data = 0;
  const std::size_t width = split_fields(lines[0].text, delim).size();
  if (width < 2) throw ParseError(source, lines[0].number, 1, "need at least one feature column and a target column");
  const long target_signed = options.target_column < 0 ? static_cast<long>(width) + options.target_column
                                                       : options.target_column;
  if (target_signed < 0 || target_signed >= static_cast<long>(width)) {
    throw ParseError(source, lines[0].number, 1,
                     "target column " + std::to_string(options.target_column) + " is outside the " +
                         std::to_string(width) + " columns");
  }
  const auto target = static_cast<std::size_t>(target_signed);

  Table table;
  if (options.has_header) {
    const auto names = split_fields(lines[0].text, delim);
    for (std::size_t c = 0; c < width; ++c) {
      if (c != target) table.feature_names.emplace_back(names[c]);
    }
    first_data = 1;
  } else {
    for (std::size_t c = 0; c + 1 < width; ++c) table.feature_names.push_back("x" + std::to_string(c + 1));
  }
  const std::size_t n = lines.size() - first_data;
  if (n == 0) throw ParseError(source, lines[0].number, 1, "no data rows");

  Dataset& d = table.data;
  d.features.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(width - 1));
  std::vector<std::string_view> raw_targets(n);
  std::vector<std::size_t> target_lines(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& line = lines[first_data + i];
    const auto fields = split_fields(line.text, delim);
    if (fields.size() != width) {
      throw ParseError(source, line.number, 1,
                       "ragged row: expected " + std::to_string(width) + " fields, found " +
                           std::to_string(fields.size()));
    }
    std::size_t out_col = 0;
    for (std::size_t c = 0; c < width; ++c) {
      if (c == target) {
        raw_targets[i] = fields[c];
        target_lines[i] = line.number;
        continue;
      }
      const auto value = to_number(fields[c]);
      if (!value || !std::isfinite(*value)) {
        throw ParseError(source, line.number, c + 1, "malformed number '" + std::string(fields[c]) + "'");
      }
      d.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(out_col++)) = *value;
    }
  }

  bool all_numeric = true;
  std::vector<double> numeric(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto value = to_number(raw_targets[i]);
    if (!value || !std::isfinite(*value)) {
      all_numeric = false;
    } else {
      numeric[i] = *value;
    }
  }

  const bool classify = options.task == TaskHint::kClassification ||
                        (options.task == TaskHint::kAuto && (!all_numeric || !options.class_labels.empty()));
  d.target.resize(n);
  if (!classify) {
    if (!all_numeric) {
      for (std::size_t i = 0; i < n; ++i) {
        const auto value = to_number(raw_targets[i]);
        if (!value || !std::isfinite(*value)) {
          throw ParseError(source, target_lines[i], target + 1,
                           "malformed regression target '" + std::string(raw_targets[i]) + "'");
        }
      }
    }
    d.task = TaskKind::kRegression;
    d.class_count = 0;
    d.target = std::move(numeric);
    return table;
  }

  d.task = TaskKind::kClassification;
  if (!options.class_labels.empty()) {
    table.class_labels = options.class_labels;
  } else {
    std::set<std::string> unique;
    for (auto s : raw_targets) unique.emplace(s);
    table.class_labels.assign(unique.begin(), unique.end());
    if (all_numeric) {
      std::stable_sort(table.class_labels.begin(), table.class_labels.end(),
                       [](const std::string& a, const std::string& b) { return *to_number(a) < *to_number(b); });
    }
  }
  std::map<std::string, std::size_t, std::less<>> index;
  for (std::size_t k = 0; k < table.class_labels.size(); ++k) index.emplace(table.class_labels[k], k);
  for (std::size_t i = 0; i < n; ++i) {
    const auto it = index.find(raw_targets[i]);
    if (it == index.end()) {
      throw ParseError(source, target_lines[i], target + 1, "unknown class label '" + std::string(raw_targets[i]) + "'");
    }
    d.target[i] = static_cast<double>(it->second);
  }
  d.class_count = static_cast<int>(table.class_labels.size());
  return table;
}

Table read_delimited(const std::filesystem::path& path, DelimitedOptions options) {
  if (options.delimiter == 0) options.delimiter = delimiter_for(path);
  return parse_delimited(read_file(path), options, path.string());
}

void write_delimited(const std::filesystem::path& path, const Table& table, char delimiter) {
  const Dataset& d = table.data;
  auto out = open_output(path);
  for (std::size_t c = 0; c < d.cols(); ++c) {
    out << (c < table.feature_names.size() ? table.feature_names[c] : "x" + std::to_string(c + 1)) << delimiter;
  }
  out << "target\n";
  for (std::size_t i = 0; i < d.rows(); ++i) {
    for (std::size_t c = 0; c < d.cols(); ++c) {
      out << format_double(d.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c))) << delimiter;
    }
    if (d.task == TaskKind::kClassification && !table.class_labels.empty()) {
      out << table.class_labels[d.label(i)] << '\n';
    } else {
      out << format_double(d.target[i]) << '\n';
    }
  }
  finish_output(out, path);
}

IdxTensor parse_idx(std::span<const std::uint8_t> bytes, const std::string& source) {
  if (bytes.size() < 4) {
    throw ParseError(source, bytes.size(), "truncated header: expected 4 bytes, got " + std::to_string(bytes.size()));
  }
  if (bytes[0] != 0 || bytes[1] != 0) throw ParseError(source, 0, "bad magic: first two bytes must be zero");
  if (bytes[2] != 0x08) {
    throw ParseError(source, 2, "unsupported element type 0x" + [&] {
      char buf[8];
      std::snprintf(buf, sizeof(buf), "%02x", bytes[2]);
      return std::string(buf);
    }() + " (only unsigned bytes)");
  }
  const std::size_t rank = bytes[3];
  if (rank < 1 || rank > 3) throw ParseError(source, 3, "dimension count " + std::to_string(rank) + " not in 1..3");
  const std::size_t header = 4 + 4 * rank;
  if (bytes.size() < header) {
    throw ParseError(source, bytes.size(),
                     "truncated header: expected " + std::to_string(header) + " bytes, got " +
                         std::to_string(bytes.size()));
  }
  IdxTensor out;
  std::size_t total = 1;
  for (std::size_t k = 0; k < rank; ++k) {
    const std::size_t dim = read_be32(bytes, 4 + 4 * k);
    if (dim != 0 && total > std::numeric_limits<std::size_t>::max() / dim) {
      throw ParseError(source, 4 + 4 * k, "dimension sizes overflow");
    }
    total *= dim;
    out.dims.push_back(dim);
  }
  const std::size_t payload = bytes.size() - header;
  if (payload < total) {
    throw ParseError(source, bytes.size(),
                     "truncated payload: expected " + std::to_string(total) + " bytes, got " + std::to_string(payload));
  }
  if (payload > total) {
    throw ParseError(source, header + total,
                     "trailing data: expected " + std::to_string(total) + " payload bytes, got " +
                         std::to_string(payload));
  }
  out.values.assign(bytes.begin() + static_cast<std::ptrdiff_t>(header), bytes.end());
  return out;
}

IdxTensor read_idx(const std::filesystem::path& path) {
  const std::string raw = read_file(path);
  const auto* data = reinterpret_cast<const std::uint8_t*>(raw.data());
  return parse_idx(std::span<const std::uint8_t>(data, raw.size()), path.string());
}

Matrix idx_features(const IdxTensor& tensor) {
  if (tensor.dims.empty()) throw std::invalid_argument("IDX tensor has no dimensions");
  const std::size_t count = tensor.dims[0];
  std::size_t width = 1;
  for (std::size_t k = 1; k < tensor.dims.size(); ++k) width *= tensor.dims[k];
  if (count * width != tensor.values.size()) throw std::invalid_argument("IDX tensor size mismatch");
  Matrix out(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(width));
  for (std::size_t i = 0; i < count * width; ++i) out.data()[i] = static_cast<double>(tensor.values[i]) / 255.0;
  return out;
}

std::vector<std::uint8_t> encode_idx(const IdxTensor& tensor) {
  if (tensor.dims.empty() || tensor.dims.size() > 3) throw std::invalid_argument("IDX supports 1 to 3 dimensions");
  std::vector<std::uint8_t> out = {0, 0, 0x08, static_cast<std::uint8_t>(tensor.dims.size())};
  for (std::size_t dim : tensor.dims) {
    if (dim > std::numeric_limits<std::uint32_t>::max()) throw std::invalid_argument("IDX dimension too large");
    for (int shift = 24; shift >= 0; shift -= 8) out.push_back(static_cast<std::uint8_t>((dim >> shift) & 0xff));
  }
  out.insert(out.end(), tensor.values.begin(), tensor.values.end());
  return out;
}

SelectionProbs parse_alpha(std::string_view text, const std::string& source) {
  std::vector<double> values;
  for (const auto& line : split_lines(text)) {
    const auto field = trim(line.text);
    if (field.empty()) continue;
    const auto value = to_number(field);
    if (!value) throw ParseError(source, line.number, 1, "malformed number '" + std::string(field) + "'");
    if (!(*value >= 0.0 && *value <= 1.0)) {
      throw ParseError(source, line.number, 1, "probability " + std::string(field) + " outside [0,1]");
    }
    values.push_back(*value);
  }
  if (values.empty()) throw ParseError(source, 1, 1, "empty alpha file");
  return SelectionProbs(std::move(values));
}

SelectionProbs read_alpha(const std::filesystem::path& path) { return parse_alpha(read_file(path), path.string()); }

void write_alpha(const std::filesystem::path& path, const SelectionProbs& alpha) {
  auto out = open_output(path);
  for (double v : alpha.values()) out << format_double(v) << '\n';
  finish_output(out, path);
}

std::vector<std::pair<std::string, std::string>> parse_edges(std::string_view text, const std::string& source) {
  std::vector<std::pair<std::string, std::string>> out;
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& line : split_lines(text)) {
    if (is_blank(line.text)) continue;
    const auto fields = split_fields(line.text, '\t');
    if (fields.size() != 3) {
      throw ParseError(source, line.number, 1, "expected regulator<TAB>target<TAB>flag, found " +
                                                   std::to_string(fields.size()) + " fields");
    }
    if (fields[0].empty() || fields[1].empty()) throw ParseError(source, line.number, 1, "empty gene name");
    if (fields[2] != "0" && fields[2] != "1") {
      throw ParseError(source, line.number, 3, "edge flag must be 0 or 1, found '" + std::string(fields[2]) + "'");
    }
    if (fields[2] == "0") continue;
    std::pair<std::string, std::string> edge{std::string(fields[0]), std::string(fields[1])};
    if (seen.insert(edge).second) out.push_back(std::move(edge));
  }
  return out;
}

std::vector<std::pair<std::string, std::string>> read_edges(const std::filesystem::path& path) {
  return parse_edges(read_file(path), path.string());
}

std::vector<GeneEdge> resolve_edges(std::span<const std::pair<std::string, std::string>> edges,
                                    std::span<const std::string> gene_names) {
  std::map<std::string, std::size_t, std::less<>> index;
  for (std::size_t g = 0; g < gene_names.size(); ++g) index.emplace(gene_names[g], g);
  std::vector<GeneEdge> out;
  for (const auto& [reg, target] : edges) {
    const auto r = index.find(reg);
    const auto t = index.find(target);
    if (r == index.end()) throw std::invalid_argument("unknown gene '" + reg + "' in edge list");
    if (t == index.end()) throw std::invalid_argument("unknown gene '" + target + "' in edge list");
    out.emplace_back(r->second, t->second);
  }
  return out;
}

void write_edges(const std::filesystem::path& path, std::span<const Edge> ranking,
                 std::span<const std::string> gene_names) {
  auto out = open_output(path);
  for (const auto& e : ranking) {
    if (e.regulator >= gene_names.size() || e.target >= gene_names.size()) {
      throw std::invalid_argument("edge gene index out of range");
    }
    out << gene_names[e.regulator] << '\t' << gene_names[e.target] << '\t' << format_double(e.weight) << '\n';
  }
  finish_output(out, path);
}

Expression parse_expression(std::string_view text, const std::string& source) {
  std::vector<Line> lines;
  for (const auto& line : split_lines(text)) {
    if (!is_blank(line.text)) lines.push_back(line);
  }
  if (lines.empty()) throw ParseError(source, 1, 1, "empty file");
  Expression out;
  for (auto name : split_fields(lines[0].text, '\t')) {
    if (name.empty()) throw ParseError(source, lines[0].number, out.gene_names.size() + 1, "empty gene name");
    out.gene_names.emplace_back(name);
  }
  const std::size_t genes = out.gene_names.size();
  if (std::set<std::string>(out.gene_names.begin(), out.gene_names.end()).size() != genes) {
    throw ParseError(source, lines[0].number, 1, "duplicate gene name in header");
  }
  const std::size_t n = lines.size() - 1;
  if (n == 0) throw ParseError(source, lines[0].number, 1, "no samples");
  out.values.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(genes));
  for (std::size_t i = 0; i < n; ++i) {
    const auto& line = lines[i + 1];
    const auto fields = split_fields(line.text, '\t');
    if (fields.size() != genes) {
      throw ParseError(source, line.number, 1,
                       "ragged row: expected " + std::to_string(genes) + " fields, found " +
                           std::to_string(fields.size()));
    }
    for (std::size_t g = 0; g < genes; ++g) {
      const auto value = to_number(fields[g]);
      if (!value || !std::isfinite(*value)) {
        throw ParseError(source, line.number, g + 1, "malformed number '" + std::string(fields[g]) + "'");
      }
      out.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(g)) = *value;
    }
  }
  return out;
}

Expression read_expression(const std::filesystem::path& path) { return parse_expression(read_file(path), path.string()); }

void write_expression(const std::filesystem::path& path, const Expression& expression) {
  auto out = open_output(path);
  for (std::size_t g = 0; g < expression.gene_names.size(); ++g) {
    out << (g == 0 ? "" : "\t") << expression.gene_names[g];
  }
  out << '\n';
  for (Eigen::Index i = 0; i < expression.values.rows(); ++i) {
    for (Eigen::Index g = 0; g < expression.values.cols(); ++g) {
      out << (g == 0 ? "" : "\t") << format_double(expression.values(i, g));
    }
    out << '\n';
  }
  finish_output(out, path);
}

std::vector<std::string> parse_name_list(std::string_view text) {
  std::vector<std::string> out;
  std::string current;
  for (char c : text) {
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == ',') {
      if (!current.empty()) out.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  if (!current.empty()) out.push_back(std::move(current));
  return out;
}

std::vector<std::string> read_name_list(const std::filesystem::path& path) { return parse_name_list(read_file(path)); }

std::string format_report(std::span<const ReportRow> rows) {
  std::string out;
  for (const auto& row : rows) {
    for (const auto* field : {&row.run_id, &row.method, &row.learner, &row.dataset, &row.metric}) check_report_field(*field);
    out += row.run_id + "," + std::to_string(row.seed) + "," + row.method + "," + row.learner + "," + row.dataset + "," +
           row.metric + "," + format_double(row.value) + "\n";
  }
  return out;
}

void write_report(const std::filesystem::path& path, std::span<const ReportRow> rows) {
  const std::string body = format_report(rows);
  auto out = open_output(path);
  out << kReportHeader << '\n' << body;
  finish_output(out, path);
}

void append_report(const std::filesystem::path& path, std::span<const ReportRow> rows) {
  const std::string body = format_report(rows);
  std::error_code ec;
  const bool fresh = !std::filesystem::exists(path, ec) || std::filesystem::file_size(path, ec) == 0;
  auto out = open_output(path, std::ios::app);
  if (fresh) out << kReportHeader << '\n';
  out << body;
  finish_output(out, path);
}

std::vector<ReportRow> parse_report(std::string_view text, const std::string& source) {
  const auto lines = split_lines(text);
  if (lines.empty() || trim(lines[0].text) != kReportHeader) {
    throw ParseError(source, 1, 1, "missing report header '" + std::string(kReportHeader) + "'");
  }
  std::vector<ReportRow> rows;
  for (std::size_t k = 1; k < lines.size(); ++k) {
    const auto& line = lines[k];
    if (is_blank(line.text)) continue;
    const auto fields = split_fields(line.text, ',');
    if (fields.size() != 7) {
      throw ParseError(source, line.number, 1, "expected 7 fields, found " + std::to_string(fields.size()));
    }
    ReportRow row;
    row.run_id = fields[0];
    std::uint64_t seed = 0;
    const auto [ptr, ec] = std::from_chars(fields[1].data(), fields[1].data() + fields[1].size(), seed);
    if (ec != std::errc() || ptr != fields[1].data() + fields[1].size() || fields[1].empty()) {
      throw ParseError(source, line.number, 2, "malformed seed '" + std::string(fields[1]) + "'");
    }
    row.seed = seed;
    row.method = fields[2];
    row.learner = fields[3];
    row.dataset = fields[4];
    row.metric = fields[5];
    const auto value = to_number(fields[6]);
    if (!value) throw ParseError(source, line.number, 7, "malformed value '" + std::string(fields[6]) + "'");
    row.value = *value;
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<ReportRow> read_report(const std::filesystem::path& path) { return parse_report(read_file(path), path.string()); }

}  // namespace prsb::io
