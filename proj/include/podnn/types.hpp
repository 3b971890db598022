// Copyright 2026 The podnn Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#ifndef PODNN_TYPES_HPP
#define PODNN_TYPES_HPP

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace podnn
{

using Vec2 = Eigen::Vector2d;
using Index = Eigen::Index;

// Parameter vector mu. Dimension p is runtime so the same code path serves the
// two-parameter Helmholtz problem and one-parameter toys.
using ParamVec = Eigen::VectorXd;

using SparseRowMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using Triplet = Eigen::Triplet<double>;

// Base class for every failure raised by the library. Derived types carry the
// structured context (node index, parameter, stage) that callers report.
class Error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error
{
public:
  using Error::Error;
};

class SingularSystemError : public Error
{
public:
  SingularSystemError(const std::string &what, Index where = -1)
    : Error(what), where_(where)
  {
  }
  // Offending node or column index, -1 when not applicable.
  Index where() const { return where_; }

private:
  Index where_;
};

class ConfigError : public Error
{
public:
  using Error::Error;
};

} // namespace podnn

#endif // PODNN_TYPES_HPP
