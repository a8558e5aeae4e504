/*
 * Copyright 2026 The Uplift-ROI Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "uplift_roi/dataset_io.h"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <system_error>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_split.h"
#include "json.hpp"
#include "uplift_roi/status.h"

namespace uplift_roi {

std::string FormatDouble(double value) {
  char buffer[512];
  auto result = std::to_chars(buffer, buffer + sizeof(buffer), value,
                              std::chars_format::fixed);
  if (result.ec != std::errc()) {
    // Values beyond the fixed-notation buffer (|x| > 1e300 or so).
    result = std::to_chars(buffer, buffer + sizeof(buffer), value);
  }
  return std::string(buffer, result.ptr);
}

absl::StatusOr<double> ParseDouble(std::string_view text) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) {
    text.remove_prefix(1);
  }
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t' ||
                           text.back() == '\r')) {
    text.remove_suffix(1);
  }
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double value = 0;
  const auto result =
      std::from_chars(text.data(), text.data() + text.size(), value);
  if (result.ec != std::errc() || result.ptr != text.data() + text.size() ||
      text.empty()) {
    return SchemaError(absl::StrCat("not a number: '", ToAbsl(text), "'"));
  }
  return value;
}

absl::StatusOr<std::string> ReadTextFile(const std::string& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) return absl::NotFoundError(absl::StrCat("file not found: ", path));
  std::ostringstream content;
  content << file.rdbuf();
  return content.str();
}

absl::Status WriteTextFile(const std::string& path, std::string_view content) {
  const std::filesystem::path parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) {
    std::error_code error;
    std::filesystem::create_directories(parent, error);
  }
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) return absl::NotFoundError(absl::StrCat("cannot write ", path));
  file.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!file) return absl::InternalError(absl::StrCat("write failed: ", path));
  return absl::OkStatus();
}

absl::Status AppendTextFile(const std::string& path, std::string_view content) {
  const std::filesystem::path parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) {
    std::error_code error;
    std::filesystem::create_directories(parent, error);
  }
  std::ofstream file(path, std::ios::binary | std::ios::app);
  if (!file) return absl::NotFoundError(absl::StrCat("cannot write ", path));
  file.write(content.data(), static_cast<std::streamsize>(content.size()));
  return absl::OkStatus();
}

absl::StatusOr<CsvTable> ParseCsv(std::string_view content) {
  CsvTable table;
  bool first = true;
  for (absl::string_view piece : absl::StrSplit(ToAbsl(content), '\n')) {
    std::string_view line(piece.data(), piece.size());
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    std::vector<std::string> cells = absl::StrSplit(ToAbsl(line), ',');
    if (first) {
      table.header = std::move(cells);
      first = false;
      continue;
    }
    if (cells.size() != table.header.size()) {
      return SchemaError(absl::StrCat("CSV row ", table.rows.size() + 1,
                                      " has ", cells.size(), " cells, header has ",
                                      table.header.size()));
    }
    table.rows.push_back(std::move(cells));
  }
  if (first) return SchemaError("CSV has no header");
  return table;
}

absl::StatusOr<CsvTable> ReadCsvFile(const std::string& path) {
  UPLIFT_ASSIGN_OR_RETURN(const std::string content, ReadTextFile(path));
  return ParseCsv(content);
}

std::string MetadataPathFor(const std::string& csv_path) {
  std::filesystem::path path(csv_path);
  path.replace_extension(".meta.json");
  return path.string();
}

std::string DatasetToCsv(const Dataset& dataset) {
  std::string out;
  for (int j = 0; j < dataset.feature_dim(); ++j) absl::StrAppend(&out, "f", j, ",");
  out += "t,y,r,c\n";
  for (const auto& record : dataset.records()) {
    for (const double value : record.features) {
      absl::StrAppend(&out, FormatDouble(value), ",");
    }
    absl::StrAppend(&out, record.treatment ? "1" : "0", ",",
                    record.outcome ? "1" : "0", ",",
                    FormatDouble(record.revenue), ",", FormatDouble(record.cost),
                    "\n");
  }
  return out;
}

std::string DatasetMetadataJson(const Dataset& dataset) {
  nlohmann::ordered_json meta;
  meta["feature_dim"] = dataset.feature_dim();
  meta["propensity"] = dataset.propensity();
  meta["seed"] = dataset.seed();
  return meta.dump(2) + "\n";
}

absl::Status SaveDataset(const Dataset& dataset, const std::string& csv_path) {
  UPLIFT_RETURN_IF_ERROR(WriteTextFile(csv_path, DatasetToCsv(dataset)));
  return WriteTextFile(MetadataPathFor(csv_path), DatasetMetadataJson(dataset));
}

namespace {

absl::StatusOr<bool> ParseFlag(std::string_view cell) {
  UPLIFT_ASSIGN_OR_RETURN(const double value, ParseDouble(cell));
  if (value != 0 && value != 1) {
    return SchemaError(absl::StrCat("expected 0 or 1, got '", ToAbsl(cell), "'"));
  }
  return value == 1;
}

}  // namespace

absl::StatusOr<Dataset> DatasetFromText(std::string_view csv,
                                        std::string_view metadata_json) {
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(metadata_json);
  } catch (const nlohmann::json::exception& e) {
    return SchemaError(absl::StrCat("bad dataset metadata: ", e.what()));
  }
  if (!meta.contains("feature_dim") || !meta.contains("propensity") ||
      !meta["feature_dim"].is_number_integer() ||
      !meta["propensity"].is_number()) {
    return SchemaError("dataset metadata needs feature_dim and propensity");
  }
  const int feature_dim = meta["feature_dim"].get<int>();
  const double propensity = meta["propensity"].get<double>();
  const uint64_t seed = meta.value("seed", uint64_t{0});

  UPLIFT_ASSIGN_OR_RETURN(const CsvTable table, ParseCsv(csv));
  std::vector<std::string> expected;
  for (int j = 0; j < feature_dim; ++j) expected.push_back(absl::StrCat("f", j));
  for (const char* name : {"t", "y", "r", "c"}) expected.emplace_back(name);
  if (table.header != expected) {
    if (table.header.size() != expected.size()) {
      return ShapeError(absl::StrCat("dataset has ", table.header.size(),
                                     " columns, metadata implies ",
                                     expected.size()));
    }
    return SchemaError("dataset header does not match f0..f{d-1},t,y,r,c");
  }

  std::vector<VisitRecord> records;
  records.reserve(table.rows.size());
  for (const auto& row : table.rows) {
    VisitRecord record;
    record.features.resize(feature_dim);
    for (int j = 0; j < feature_dim; ++j) {
      UPLIFT_ASSIGN_OR_RETURN(record.features[j], ParseDouble(row[j]));
    }
    UPLIFT_ASSIGN_OR_RETURN(record.treatment, ParseFlag(row[feature_dim]));
    UPLIFT_ASSIGN_OR_RETURN(record.outcome, ParseFlag(row[feature_dim + 1]));
    UPLIFT_ASSIGN_OR_RETURN(record.revenue, ParseDouble(row[feature_dim + 2]));
    UPLIFT_ASSIGN_OR_RETURN(record.cost, ParseDouble(row[feature_dim + 3]));
    records.push_back(std::move(record));
  }
  return Dataset::Create(std::move(records), feature_dim, propensity, seed);
}

absl::StatusOr<Dataset> LoadDataset(const std::string& csv_path) {
  UPLIFT_ASSIGN_OR_RETURN(const std::string csv, ReadTextFile(csv_path));
  UPLIFT_ASSIGN_OR_RETURN(const std::string meta,
                          ReadTextFile(MetadataPathFor(csv_path)));
  return DatasetFromText(csv, meta);
}

std::string ScoresToCsv(const UpliftScores& scores) {
  std::string out =
      "row_index,cate_y,cate_loss,y_positive,loss_positive,sort_key\n";
  for (size_t i = 0; i < scores.size(); ++i) {
    const RecordScore& score = scores[i];
    absl::StrAppend(&out, i, ",", score.cate_y ? FormatDouble(*score.cate_y) : "",
                    ",", score.cate_loss ? FormatDouble(*score.cate_loss) : "",
                    ",", score.y_positive ? 1 : 0, ",",
                    score.loss_positive ? 1 : 0, ",",
                    FormatDouble(score.sort_key), "\n");
  }
  return out;
}

absl::StatusOr<UpliftScores> ScoresFromCsv(std::string_view csv) {
  UPLIFT_ASSIGN_OR_RETURN(const CsvTable table, ParseCsv(csv));
  const std::vector<std::string> full = {"row_index",  "cate_y",
                                         "cate_loss",  "y_positive",
                                         "loss_positive", "sort_key"};
  const std::vector<std::string> plain = {"cate_y", "cate_loss"};
  UpliftScores scores;
  if (table.header == plain) {
    for (const auto& row : table.rows) {
      if (row.size() != 2) return ShapeError("score row has wrong width");
      UPLIFT_ASSIGN_OR_RETURN(const double cate_y, ParseDouble(row[0]));
      UPLIFT_ASSIGN_OR_RETURN(const double cate_loss, ParseDouble(row[1]));
      scores.push_back(ScoreFromMagnitudes(cate_y, cate_loss));
    }
    return scores;
  }
  if (table.header != full) {
    return SchemaError(
        "scores need a row_index,cate_y,cate_loss,y_positive,loss_positive,"
        "sort_key or a cate_y,cate_loss header");
  }
  for (const auto& row : table.rows) {
    if (row.size() != full.size()) return ShapeError("score row has wrong width");
    RecordScore score;
    if (!row[1].empty()) {
      UPLIFT_ASSIGN_OR_RETURN(score.cate_y, ParseDouble(row[1]));
    }
    if (!row[2].empty()) {
      UPLIFT_ASSIGN_OR_RETURN(score.cate_loss, ParseDouble(row[2]));
    }
    UPLIFT_ASSIGN_OR_RETURN(score.y_positive, ParseFlag(row[3]));
    UPLIFT_ASSIGN_OR_RETURN(score.loss_positive, ParseFlag(row[4]));
    UPLIFT_ASSIGN_OR_RETURN(score.sort_key, ParseDouble(row[5]));
    scores.push_back(score);
  }
  return scores;
}

}  // namespace uplift_roi
