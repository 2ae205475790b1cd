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

#ifndef PRSB_IO_HPP
#define PRSB_IO_HPP

#include "prsb/core_types.hpp"
#include "prsb/network.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace prsb::io {

/// Malformed input. what() reads "source:line:column: message" for text and
/// "source@offset: message" for binary formats.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::string source, std::size_t line, std::size_t column, const std::string& message);
  ParseError(std::string source, std::size_t offset, const std::string& message);

  [[nodiscard]] const std::string& source() const { return source_; }
  /// 1-based; 0 for binary formats.
  [[nodiscard]] std::size_t line() const { return line_; }
  [[nodiscard]] std::size_t column() const { return column_; }
  /// Byte offset for binary formats.
  [[nodiscard]] std::size_t offset() const { return offset_; }

 private:
  std::string source_;
  std::size_t line_ = 0;
  std::size_t column_ = 0;
  std::size_t offset_ = 0;
};

/// Whole file as bytes; throws ParseError (offset 0) when it cannot be opened.
std::string read_file(const std::filesystem::path& path);

enum class TaskHint { kAuto, kRegression, kClassification };

struct DelimitedOptions {
  /// 0 picks tab for .tsv/.tab files and comma otherwise.
  char delimiter = 0;
  bool has_header = true;
  /// Negative counts from the end (-1 = last column).
  long target_column = -1;
  TaskHint task = TaskHint::kAuto;
  /// Reuse this label -> class mapping (e.g. a test file read after its
  /// training file); unseen labels are an error.
  std::vector<std::string> class_labels;
};

struct Table {
  Dataset data;
  std::vector<std::string> feature_names;
  /// Class index -> original label; empty for regression.
  std::vector<std::string> class_labels;
};

char delimiter_for(const std::filesystem::path& path);
Table parse_delimited(std::string_view text, const DelimitedOptions& options, const std::string& source = "<input>");
Table read_delimited(const std::filesystem::path& path, DelimitedOptions options = {});
/// Features then target, numbers at full precision.
void write_delimited(const std::filesystem::path& path, const Table& table, char delimiter = ',');

struct IdxTensor {
  std::vector<std::size_t> dims;
  std::vector<std::uint8_t> values;
};

IdxTensor parse_idx(std::span<const std::uint8_t> bytes, const std::string& source = "<input>");
IdxTensor read_idx(const std::filesystem::path& path);
/// count x (product of the remaining dims) matrix of pixels / 255.
Matrix idx_features(const IdxTensor& tensor);
std::vector<std::uint8_t> encode_idx(const IdxTensor& tensor);

SelectionProbs parse_alpha(std::string_view text, const std::string& source = "<input>");
SelectionProbs read_alpha(const std::filesystem::path& path);
void write_alpha(const std::filesystem::path& path, const SelectionProbs& alpha);

/// Positive (flag 1) regulator/target name pairs, deduplicated, in first
/// appearance order.
std::vector<std::pair<std::string, std::string>> parse_edges(std::string_view text,
                                                             const std::string& source = "<input>");
std::vector<std::pair<std::string, std::string>> read_edges(const std::filesystem::path& path);
/// Maps names to gene indices; unknown names are an error.
std::vector<GeneEdge> resolve_edges(std::span<const std::pair<std::string, std::string>> edges,
                                    std::span<const std::string> gene_names);
/// regulator<TAB>target<TAB>weight, one line per edge in ranking order.
void write_edges(const std::filesystem::path& path, std::span<const Edge> ranking,
                 std::span<const std::string> gene_names);

struct Expression {
  Matrix values;  ///< samples x genes
  std::vector<std::string> gene_names;
};

/// Tab-separated, header of gene names, one sample per row.
Expression parse_expression(std::string_view text, const std::string& source = "<input>");
Expression read_expression(const std::filesystem::path& path);
void write_expression(const std::filesystem::path& path, const Expression& expression);

/// Names separated by whitespace, commas or tabs.
std::vector<std::string> parse_name_list(std::string_view text);
std::vector<std::string> read_name_list(const std::filesystem::path& path);

struct ReportRow {
  std::string run_id;
  std::uint64_t seed = 0;
  std::string method;
  std::string learner;
  std::string dataset;
  std::string metric;
  double value = 0.0;

  bool operator==(const ReportRow&) const = default;
};

inline constexpr std::string_view kReportHeader = "run_id,seed,method,learner,dataset,metric,value";

std::string format_report(std::span<const ReportRow> rows);
void write_report(const std::filesystem::path& path, std::span<const ReportRow> rows);
/// Appends rows, writing the header first if the file is new or empty.
void append_report(const std::filesystem::path& path, std::span<const ReportRow> rows);
std::vector<ReportRow> parse_report(std::string_view text, const std::string& source = "<input>");
std::vector<ReportRow> read_report(const std::filesystem::path& path);

/// Shortest text that parses back to exactly `value`.
std::string format_double(double value);

}  // namespace prsb::io

#endif  // PRSB_IO_HPP
