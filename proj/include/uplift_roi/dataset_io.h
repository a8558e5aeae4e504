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

// CSV and JSON file plumbing.
//
// Dataset files are `f0,...,f{d-1},t,y,r,c` CSV with a `<stem>.meta.json`
// sidecar holding {"feature_dim", "propensity", "seed"}. Reals are written in
// fixed decimal notation with the shortest digits that round-trip exactly.

#ifndef UPLIFT_ROI_DATASET_IO_H_
#define UPLIFT_ROI_DATASET_IO_H_

#include <string>
#include <string_view>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "uplift_roi/core.h"

namespace uplift_roi {

std::string FormatDouble(double value);
absl::StatusOr<double> ParseDouble(std::string_view text);

// A parsed CSV file. Quoting is not supported; none of the formats need it.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

absl::StatusOr<std::string> ReadTextFile(const std::string& path);
absl::Status WriteTextFile(const std::string& path, std::string_view content);
absl::Status AppendTextFile(const std::string& path, std::string_view content);

absl::StatusOr<CsvTable> ParseCsv(std::string_view content);
absl::StatusOr<CsvTable> ReadCsvFile(const std::string& path);

// "out/data.csv" -> "out/data.meta.json".
std::string MetadataPathFor(const std::string& csv_path);

std::string DatasetToCsv(const Dataset& dataset);
std::string DatasetMetadataJson(const Dataset& dataset);

absl::Status SaveDataset(const Dataset& dataset, const std::string& csv_path);
absl::StatusOr<Dataset> LoadDataset(const std::string& csv_path);

// Parses a dataset from in-memory CSV and metadata documents.
absl::StatusOr<Dataset> DatasetFromText(std::string_view csv,
                                        std::string_view metadata_json);

// Scores as `row_index,cate_y,cate_loss,y_positive,loss_positive,sort_key`;
// missing magnitudes are empty cells. The reader also accepts a plain
// `cate_y,cate_loss` table and derives the signs and keys from it.
std::string ScoresToCsv(const UpliftScores& scores);
absl::StatusOr<UpliftScores> ScoresFromCsv(std::string_view csv);

}  // namespace uplift_roi

#endif  // UPLIFT_ROI_DATASET_IO_H_
