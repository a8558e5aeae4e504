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

// The `uplift_roi` command line tool.
//
//   gen       synthetic randomized trial + oracle
//   train     fit one uplift method
//   score     per-record scores of a model
//   evaluate  Qini and Qini-ROI curves and the table metrics
//   assign    threshold policy or greedy knapsack assignment
//   simulate  four-arm online experiment
//   compare   table metrics of several models on one validation set
//   calibrate fit the ROI(Q) curve to (q, roi) points and solve for Q*
//
// Exit codes: 0 ok, 2 usage or missing file, 3 schema or configuration,
// 4 insufficient data or shape mismatch, 5 degenerate economics.

#ifndef UPLIFT_ROI_CLI_H_
#define UPLIFT_ROI_CLI_H_

#include <ostream>

namespace uplift_roi::cli {

inline constexpr char kToolVersion[] = "0.1.0";

int RunCli(int argc, const char* const* argv, std::ostream& out,
           std::ostream& err);

}  // namespace uplift_roi::cli

#endif  // UPLIFT_ROI_CLI_H_
