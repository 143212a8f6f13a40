#pragma once

#include <optional>
#include <string_view>

#include "robust_mspca/mirrorprox.hpp"
#include "robust_mspca/moments.hpp"

namespace robust_mspca {

/// stable: worst-case explained variance.
/// squared: worst-case reconstruction error.
/// fair: worst-case regret against each source's own top-k PCA.
enum class VariantKind { stable, squared, fair };

std::string_view variant_name(VariantKind v);
std::optional<VariantKind> parse_variant(std::string_view name);

/// Per-source constant subtracted from the diagonal: 0 for stable,
/// trace/k for squared, (sum of top-k eigenvalues)/k for fair.
double variant_offset(const Matrix& sigma, int k, VariantKind v);

/// Sigma_l - variant_offset(Sigma_l) I for every source. The result is
/// generally indefinite.
SecondMomentSet shift_matrices(const SecondMomentSet& m, int k, VariantKind v);

/// Runs solve() on the shifted matrices. per_source_ev and worst_case_ev
/// are measured against the original matrices; tau, relaxed_value and
/// gap_trace refer to the shifted objective.
SolveReport solve_variant(const SecondMomentSet& m, int k, int iterations,
                          VariantKind v, const SolveOptions& options = {});

/// <Sigma, I - P> minus the best rank-k reconstruction error of Sigma.
double regret(const Matrix& sigma, const Matrix& p, int k);

}  // namespace robust_mspca
