#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "robust_mspca/dual.hpp"
#include "robust_mspca/mirrorprox.hpp"
#include "robust_mspca/variants.hpp"

namespace robust_mspca::report {

using Json = nlohmann::ordered_json;

/// Matrices up to this size are embedded in the JSON; larger ones go to a
/// sibling CSV referenced by file name.
inline constexpr Index kInlineMatrixLimit = 64;

struct NamedMatrix {
  std::string key;
  Matrix value;
};

/// JSON body plus the matrices to attach under their keys.
struct Report {
  Json body;
  std::vector<NamedMatrix> matrices;
};

Report from_solve(const SolveReport& r, const SecondMomentSet& m, int k,
                  VariantKind variant, const TightnessResult& tightness);

Report from_dual(const DualReport& r, const SecondMomentSet& m, int k);

/// Serializes with the insertion key order and every real printed with 17
/// significant digits. Non-finite reals become null.
std::string dump(const Json& j, int indent = 2);

/// Writes path (and sibling CSVs for large matrices) via temp files that
/// are renamed into place only once complete.
void write_report(const Report& report, const std::filesystem::path& path);

/// Reads a report back, resolving CSV-backed matrices into nested arrays.
Json read_report(const std::filesystem::path& path);

/// Atomic text file write.
void write_text_atomic(const std::filesystem::path& path, const std::string& text);

}  // namespace robust_mspca::report
