// Copyright 2026 The guidelab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace guidelab {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Batches are stored column-wise: one point per column.
using MatRef = Eigen::Ref<const Mat>;
using VecRef = Eigen::Ref<const Vec>;

enum class ErrorCode {
  InvalidArgument = 1,
  ShapeMismatch,
  Io,
  Format,
  Version,
  Truncated,
  Config,
  MissingHandle,
  Precondition,
  Internal,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

inline void require(bool ok, ErrorCode code, const char* what) {
  if (!ok) fail(code, what);
}

inline void require_same_shape(const MatRef& a, const MatRef& b,
                               const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    fail(ErrorCode::ShapeMismatch, what);
}

}  // namespace guidelab
