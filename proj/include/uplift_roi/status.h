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

// Error taxonomy shared by the library and the command line tool.
//
// Every fallible operation returns absl::Status / absl::StatusOr. The status
// code carries the error class:
//
//   kNotFound           missing input file            (exit code 2)
//   kInvalidArgument    schema or configuration error (exit code 3)
//   kFailedPrecondition insufficient data, shape or   (exit code 4)
//                       undefined-ROI errors
//   kOutOfRange         degenerate promotion economics (exit code 5)

#ifndef UPLIFT_ROI_STATUS_H_
#define UPLIFT_ROI_STATUS_H_

#include <string_view>

#include "absl/status/status.h"
#include "absl/strings/string_view.h"

namespace uplift_roi {

// The installed absl keeps its own string_view type.
inline absl::string_view ToAbsl(std::string_view text) {
  return absl::string_view(text.data(), text.size());
}

inline absl::Status ConfigError(std::string_view message) {
  return absl::InvalidArgumentError(ToAbsl(message));
}

inline absl::Status SchemaError(std::string_view message) {
  return absl::InvalidArgumentError(ToAbsl(message));
}

inline absl::Status InsufficientDataError(std::string_view message) {
  return absl::FailedPreconditionError(ToAbsl(message));
}

inline absl::Status ShapeError(std::string_view message) {
  return absl::FailedPreconditionError(ToAbsl(message));
}

inline absl::Status UndefinedRoiError(std::string_view message) {
  return absl::FailedPreconditionError(ToAbsl(message));
}

inline absl::Status DegenerateEconomicsError(std::string_view message) {
  return absl::OutOfRangeError(ToAbsl(message));
}

// Process exit code for a status, following the table above.
inline int ExitCodeForStatus(const absl::Status& status) {
  switch (status.code()) {
    case absl::StatusCode::kOk:
      return 0;
    case absl::StatusCode::kNotFound:
      return 2;
    case absl::StatusCode::kInvalidArgument:
      return 3;
    case absl::StatusCode::kFailedPrecondition:
      return 4;
    case absl::StatusCode::kOutOfRange:
      return 5;
    default:
      return 1;
  }
}

}  // namespace uplift_roi

// Evaluates an expression returning absl::Status and returns early on error.
#define UPLIFT_RETURN_IF_ERROR(expr)         \
  do {                                       \
    const absl::Status _status = (expr);     \
    if (!_status.ok()) return _status;       \
  } while (0)

#define UPLIFT_STATUS_CONCAT_INNER(a, b) a##b
#define UPLIFT_STATUS_CONCAT(a, b) UPLIFT_STATUS_CONCAT_INNER(a, b)

// Evaluates an expression returning absl::StatusOr<T>, returns early on error
// and otherwise moves the value into `lhs`.
#define UPLIFT_ASSIGN_OR_RETURN(lhs, expr)                                    \
  UPLIFT_ASSIGN_OR_RETURN_IMPL(UPLIFT_STATUS_CONCAT(_status_or_, __LINE__), \
                               lhs, expr)

#define UPLIFT_ASSIGN_OR_RETURN_IMPL(statusor, lhs, expr) \
  auto statusor = (expr);                                 \
  if (!statusor.ok()) return statusor.status();           \
  lhs = std::move(statusor).value()

#endif  // UPLIFT_ROI_STATUS_H_
