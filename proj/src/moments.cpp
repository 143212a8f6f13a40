#include "robust_mspca/moments.hpp"

#include <algorithm>
#include <map>
#include <numeric>

#include "robust_mspca/csv.hpp"
#include "robust_mspca/errors.hpp"
#include "robust_mspca/parallel.hpp"

namespace fs = std::filesystem;

namespace robust_mspca {
namespace {

constexpr double kSymmetryTol = 1e-8;
constexpr double kPsdTol = 1e-8;

void sort_by_label(std::vector<std::string>& labels, std::vector<Matrix>& mats) {
  std::vector<std::size_t> order(labels.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return labels[a] < labels[b];
  });
  std::vector<std::string> sorted_labels;
  std::vector<Matrix> sorted_mats;
  for (std::size_t i : order) {
    sorted_labels.push_back(std::move(labels[i]));
    sorted_mats.push_back(std::move(mats[i]));
  }
  labels = std::move(sorted_labels);
  mats = std::move(sorted_mats);
}

std::vector<fs::path> expand_inputs(const std::vector<fs::path>& inputs) {
  std::vector<fs::path> files;
  for (const auto& p : inputs) {
    std::error_code ec;
    if (fs::is_directory(p, ec)) {
      std::vector<fs::path> found;
      for (const auto& entry : fs::directory_iterator(p, ec)) {
        if (entry.is_regular_file() && entry.path().extension() == ".csv") {
          found.push_back(entry.path());
        }
      }
      if (ec) {
        throw Error(ErrorKind::IoError, "cannot list '" + p.string() + "'");
      }
      std::sort(found.begin(), found.end());
      files.insert(files.end(), found.begin(), found.end());
    } else if (fs::exists(p, ec)) {
      files.push_back(p);
    } else {
      throw Error(ErrorKind::IoError, "no such file '" + p.string() + "'");
    }
  }
  if (files.empty()) {
    throw Error(ErrorKind::IoError, "no CSV inputs found");
  }
  return files;
}

SourceSamples load_single_file(const fs::path& path, const std::string& column) {
  const csv::Table table = csv::read_table(path);
  if (!table.header) {
    throw Error(ErrorKind::ParseError,
                "'" + path.string() + "' needs a header row naming column '" +
                    column + "'");
  }
  const auto& header = *table.header;
  const auto it = std::find(header.begin(), header.end(), column);
  if (it == header.end()) {
    throw Error(ErrorKind::ParseError, "column '" + column + "' not found in '" +
                                           path.string() + "'");
  }
  const std::size_t label_col = static_cast<std::size_t>(it - header.begin());
  const std::size_t width = header.size();

  std::map<std::string, std::vector<std::vector<double>>> groups;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    if (row.size() != width) {
      throw Error(ErrorKind::ShapeError,
                  path.string() + " row " + std::to_string(table.line_numbers[r]) +
                      " has " + std::to_string(row.size()) +
                      " columns, expected " + std::to_string(width));
    }
    std::vector<double> values;
    values.reserve(width - 1);
    for (std::size_t c = 0; c < width; ++c) {
      if (c == label_col) continue;
      values.push_back(csv::parse_real(row[c], path, table.line_numbers[r], c + 1));
    }
    groups[row[label_col]].push_back(std::move(values));
  }

  SourceSamples out;
  out.dim = static_cast<Index>(width - 1);
  for (auto& [label, rows] : groups) {
    Matrix m(static_cast<Index>(rows.size()), out.dim);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      for (Index j = 0; j < out.dim; ++j) {
        m(static_cast<Index>(i), j) = rows[i][static_cast<std::size_t>(j)];
      }
    }
    out.labels.push_back(label);
    out.data.push_back(std::move(m));
  }
  out.validate();
  return out;
}

}  // namespace

void SourceSamples::validate() const {
  if (data.empty()) {
    throw Error(ErrorKind::InvalidArgument, "no sources");
  }
  if (labels.size() != data.size()) {
    throw Error(ErrorKind::ShapeError, "label count differs from source count");
  }
  for (std::size_t l = 0; l < data.size(); ++l) {
    if (data[l].cols() != dim) {
      throw Error(ErrorKind::ShapeError,
                  "source '" + labels[l] + "' has " +
                      std::to_string(data[l].cols()) + " features, expected " +
                      std::to_string(dim));
    }
    if (data[l].rows() < 1) {
      throw Error(ErrorKind::ShapeError, "source '" + labels[l] + "' is empty");
    }
    if (!data[l].allFinite()) {
      throw Error(ErrorKind::InvalidMatrix,
                  "source '" + labels[l] + "' has non-finite entries");
    }
  }
}

SecondMomentSet::SecondMomentSet(std::vector<Matrix> matrices,
                                 std::vector<std::string> labels,
                                 std::optional<std::vector<Index>> sample_sizes)
    : SecondMomentSet(std::move(matrices), std::move(labels),
                      std::move(sample_sizes), true) {}

SecondMomentSet SecondMomentSet::indefinite(std::vector<Matrix> matrices,
                                            std::vector<std::string> labels) {
  return SecondMomentSet(std::move(matrices), std::move(labels), std::nullopt,
                         false);
}

SecondMomentSet::SecondMomentSet(std::vector<Matrix> matrices,
                                 std::vector<std::string> labels,
                                 std::optional<std::vector<Index>> sample_sizes,
                                 bool psd)
    : labels_(std::move(labels)), sample_sizes_(std::move(sample_sizes)), psd_(psd) {
  if (matrices.empty()) {
    throw Error(ErrorKind::InvalidArgument, "need at least one source matrix");
  }
  if (labels_.empty()) {
    for (std::size_t l = 0; l < matrices.size(); ++l) {
      labels_.push_back("source" + std::to_string(l));
    }
  }
  if (labels_.size() != matrices.size()) {
    throw Error(ErrorKind::ShapeError, "label count differs from matrix count");
  }
  if (sample_sizes_ && sample_sizes_->size() != matrices.size()) {
    throw Error(ErrorKind::ShapeError, "sample size count differs from matrix count");
  }
  dim_ = matrices.front().rows();
  matrices_.reserve(matrices.size());
  for (std::size_t l = 0; l < matrices.size(); ++l) {
    const Matrix& a = matrices[l];
    if (a.rows() != dim_ || a.cols() != dim_) {
      throw Error(ErrorKind::ShapeError,
                  "matrix '" + labels_[l] + "' is " + std::to_string(a.rows()) +
                      "x" + std::to_string(a.cols()) + ", expected " +
                      std::to_string(dim_) + "x" + std::to_string(dim_));
    }
    if (!a.allFinite()) {
      throw Error(ErrorKind::InvalidMatrix,
                  "matrix '" + labels_[l] + "' has non-finite entries");
    }
    const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
    if ((a - a.transpose()).cwiseAbs().maxCoeff() > kSymmetryTol * scale) {
      throw Error(ErrorKind::InvalidMatrix,
                  "matrix '" + labels_[l] + "' is not symmetric");
    }
    Matrix sym = symmetrize(a);
    const EigenPairs eig = sym_eig(sym);
    const double top = eig.values(0);
    const double bottom = eig.values(dim_ - 1);
    if (psd_ && bottom < -kPsdTol * std::max(1.0, top)) {
      throw Error(ErrorKind::InvalidMatrix,
                  "matrix '" + labels_[l] + "' is not PSD (min eigenvalue " +
                      csv::format_real(bottom) + ")");
    }
    const double norm = psd_ ? top : std::max(std::abs(top), std::abs(bottom));
    rho_max_ = l == 0 ? norm : std::max(rho_max_, norm);
    matrices_.push_back(std::move(sym));
  }
}

Matrix SecondMomentSet::mixture(const Vector& weights) const {
  Matrix out = Matrix::Zero(dim_, dim_);
  for (std::size_t l = 0; l < matrices_.size(); ++l) {
    out += weights(static_cast<Index>(l)) * matrices_[l];
  }
  return out;
}

Vector SecondMomentSet::payoffs(const Matrix& m) const {
  Vector out(static_cast<Index>(matrices_.size()));
  for (std::size_t l = 0; l < matrices_.size(); ++l) {
    out(static_cast<Index>(l)) = frobenius_inner(matrices_[l], m);
  }
  return out;
}

bool SecondMomentSet::all_identical() const {
  return std::all_of(matrices_.begin() + 1, matrices_.end(),
                     [&](const Matrix& a) { return a == matrices_.front(); });
}

SecondMomentSet compute_second_moment(const SourceSamples& samples, bool center) {
  samples.validate();
  std::vector<Matrix> mats(samples.count());
  std::vector<Index> sizes(samples.count());
  parallel_for(samples.count(), [&](std::size_t l) {
    const Matrix& x = samples.data[l];
    const double n = static_cast<double>(x.rows());
    Matrix m;
    if (center) {
      const Eigen::RowVectorXd mean = x.colwise().mean();
      const Matrix xc = x.rowwise() - mean;
      m = xc.transpose() * xc / n;
    } else {
      m = x.transpose() * x / n;
    }
    mats[l] = symmetrize(m);
    sizes[l] = x.rows();
  });
  return SecondMomentSet(std::move(mats), samples.labels, std::move(sizes));
}

SourceSamples load_sources(const LoadOptions& options) {
  const std::vector<fs::path> files = expand_inputs(options.inputs);
  if (options.source_column) {
    if (files.size() != 1) {
      throw Error(ErrorKind::InvalidArgument,
                  "source-column mode expects exactly one CSV file");
    }
    return load_single_file(files.front(), *options.source_column);
  }

  SourceSamples out;
  std::vector<std::string> labels;
  std::vector<Matrix> mats;
  for (const auto& f : files) {
    labels.push_back(f.stem().string());
    mats.push_back(csv::read_matrix(f));
  }
  sort_by_label(labels, mats);
  out.dim = mats.front().cols();
  out.labels = std::move(labels);
  out.data = std::move(mats);
  out.validate();
  return out;
}

SecondMomentSet load_moment_matrices(const std::vector<fs::path>& inputs) {
  const std::vector<fs::path> files = expand_inputs(inputs);
  std::vector<std::string> labels;
  std::vector<Matrix> mats;
  for (const auto& f : files) {
    labels.push_back(f.stem().string());
    mats.push_back(csv::read_matrix(f));
  }
  sort_by_label(labels, mats);
  return SecondMomentSet(std::move(mats), std::move(labels));
}

std::pair<SecondMomentSet, double> rescale_by_max_opnorm(const SecondMomentSet& m) {
  const double scale = m.rho_max();
  if (!(scale > 0.0)) {
    throw Error(ErrorKind::DegenerateInstance,
                "all source matrices are zero; nothing to rescale");
  }
  std::vector<Matrix> mats;
  mats.reserve(m.count());
  for (const auto& a : m.matrices()) mats.push_back(a / scale);
  if (m.is_psd()) {
    return {SecondMomentSet(std::move(mats), m.labels(), m.sample_sizes()), scale};
  }
  return {SecondMomentSet::indefinite(std::move(mats), m.labels()), scale};
}

}  // namespace robust_mspca
