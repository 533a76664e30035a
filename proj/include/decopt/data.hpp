#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>

#include "decopt/agent_matrix.hpp"

namespace decopt {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Dense sample matrix, one sample a_{i,j} per row.
class DataMatrix {
 public:
  DataMatrix() = default;
  explicit DataMatrix(RowMatrix samples);

  Index rows() const { return samples_.rows(); }
  Index cols() const { return samples_.cols(); }
  const RowMatrix& samples() const { return samples_; }
  auto row(Index r) const { return samples_.row(r); }
  const Vector& row_norms_sq() const { return row_norms_sq_; }

  /// Keeps the leading rows(). Used to round the sample count down to a
  /// multiple of the agent count before sharding.
  DataMatrix head(Index count) const;

 private:
  RowMatrix samples_;
  Vector row_norms_sq_;
};

/// i.i.d. ±1 entries, each sign with probability ½.
DataMatrix gen_bernoulli_matrix(Index rows, Index cols, std::uint64_t seed);

/// Reads LIBSVM sparse text (`label idx:val ...`, 1-based, ascending indices)
/// into a dense matrix. Labels are discarded; features past d_cap are dropped.
/// Without d_cap the width is the largest index seen.
DataMatrix load_libsvm(const std::filesystem::path& path, std::optional<Index> max_rows = std::nullopt,
                       std::optional<Index> d_cap = std::nullopt);

/// Binary cache: uint32 rows, uint32 cols (little-endian), then rows·cols
/// float64 values in row-major order.
void save_data_cache(const DataMatrix& data, const std::filesystem::path& path);
DataMatrix load_data_cache(const std::filesystem::path& path);

}  // namespace decopt
