#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "robust_mspca/spectral.hpp"

namespace robust_mspca {

/// Per-source observation tables, rows = observations.
struct SourceSamples {
  std::vector<Matrix> data;
  std::vector<std::string> labels;
  Index dim = 0;

  std::size_t count() const { return data.size(); }
  /// Throws ShapeError/InvalidArgument when the invariants do not hold.
  void validate() const;
};

/// The L symmetric d x d matrices that define a multi-source problem.
///
/// The regular constructor requires PSD inputs (second moments). Shifted
/// objectives built by the variants module are indefinite; they go
/// through indefinite(), which skips the PSD check and measures scale by
/// the largest absolute eigenvalue.
class SecondMomentSet {
 public:
  SecondMomentSet() = default;
  SecondMomentSet(std::vector<Matrix> matrices, std::vector<std::string> labels,
                  std::optional<std::vector<Index>> sample_sizes = std::nullopt);

  static SecondMomentSet indefinite(std::vector<Matrix> matrices,
                                    std::vector<std::string> labels);

  const std::vector<Matrix>& matrices() const { return matrices_; }
  const Matrix& operator[](std::size_t l) const { return matrices_[l]; }
  const std::vector<std::string>& labels() const { return labels_; }
  const std::optional<std::vector<Index>>& sample_sizes() const {
    return sample_sizes_;
  }
  Index dim() const { return dim_; }
  std::size_t count() const { return matrices_.size(); }
  double rho_max() const { return rho_max_; }
  bool is_psd() const { return psd_; }

  /// sum_l w_l Sigma_l
  Matrix mixture(const Vector& weights) const;
  /// (<Sigma_l, m>)_l
  Vector payoffs(const Matrix& m) const;
  /// True when every matrix equals the first one bitwise.
  bool all_identical() const;

 private:
  SecondMomentSet(std::vector<Matrix> matrices, std::vector<std::string> labels,
                  std::optional<std::vector<Index>> sample_sizes, bool psd);

  std::vector<Matrix> matrices_;
  std::vector<std::string> labels_;
  std::optional<std::vector<Index>> sample_sizes_;
  Index dim_ = 0;
  double rho_max_ = 0.0;
  bool psd_ = true;
};

/// (1/n_l) sum_i x_i x_i^T per source, optionally after subtracting the
/// per-source sample mean.
SecondMomentSet compute_second_moment(const SourceSamples& samples,
                                      bool center = false);

struct LoadOptions {
  /// CSV files, or a single directory whose *.csv files are read.
  std::vector<std::filesystem::path> inputs;
  /// Single-file mode: name of the column holding the source label.
  std::optional<std::string> source_column;
};

/// Sources come back ordered lexicographically by label (file stem in
/// per-file mode, column value in single-file mode).
SourceSamples load_sources(const LoadOptions& options);

/// One d x d moment matrix per CSV; labels are file stems.
SecondMomentSet load_moment_matrices(
    const std::vector<std::filesystem::path>& inputs);

/// Divides every matrix by rho_max. Returns the rescaled set and rho_max.
std::pair<SecondMomentSet, double> rescale_by_max_opnorm(
    const SecondMomentSet& m);

}  // namespace robust_mspca
