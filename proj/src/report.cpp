#include "robust_mspca/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "robust_mspca/csv.hpp"
#include "robust_mspca/errors.hpp"

namespace fs = std::filesystem;

namespace robust_mspca::report {
namespace {

Json vector_json(const Vector& v) {
  Json out = Json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Json matrix_json(const Matrix& m) {
  Json out = Json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    out.push_back(std::move(row));
  }
  return out;
}

void escape_string(std::ostream& os, const std::string& s) {
  os << Json(s).dump();
}

void emit(std::ostream& os, const Json& j, int indent, int depth) {
  const auto newline = [&](int level) {
    if (indent < 0) return;
    os << '\n' << std::string(static_cast<std::size_t>(indent * level), ' ');
  };
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        os << "{}";
        return;
      }
      os << '{';
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) os << ',';
        first = false;
        newline(depth + 1);
        escape_string(os, it.key());
        os << (indent < 0 ? ":" : ": ");
        emit(os, it.value(), indent, depth + 1);
      }
      newline(depth);
      os << '}';
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        os << "[]";
        return;
      }
      // Arrays of scalars stay on one line.
      const bool flat = std::none_of(j.begin(), j.end(), [](const Json& e) {
        return e.is_structured();
      });
      os << '[';
      bool first = true;
      for (const auto& e : j) {
        if (!first) os << (flat && indent >= 0 ? ", " : ",");
        first = false;
        if (!flat) newline(depth + 1);
        emit(os, e, indent, depth + 1);
      }
      if (!flat) newline(depth);
      os << ']';
      return;
    }
    case Json::value_t::number_float: {
      const double v = j.get<double>();
      if (!std::isfinite(v)) {
        os << "null";
      } else {
        std::string s = csv::format_real(v);
        // Keep a float token so readers do not narrow it to an integer.
        if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
        os << s;
      }
      return;
    }
    default:
      os << j.dump();
  }
}

fs::path sibling(const fs::path& report_path, const std::string& key) {
  fs::path p = report_path;
  p.replace_filename(report_path.stem().string() + "." + key + ".csv");
  return p;
}

fs::path temp_path(const fs::path& path) {
  fs::path p = path;
  p += ".tmp";
  return p;
}

}  // namespace

Report from_solve(const SolveReport& r, const SecondMomentSet& m, int k,
                  VariantKind variant, const TightnessResult& tightness) {
  Report out;
  Json& j = out.body;
  j["kind"] = "solve";
  j["variant"] = variant_name(variant);
  j["k"] = k;
  j["d"] = m.dim();
  j["sources"] = m.count();
  j["labels"] = m.labels();
  j["iterations"] = r.iterations;
  j["classical"] = r.classical;
  j["tau"] = r.tau;
  j["relaxed_value"] = r.relaxed_value;
  j["worst_case_ev"] = r.worst_case_ev;
  j["per_source_ev"] = vector_json(r.per_source_ev);
  j["weights"] = vector_json(r.omega_avg.weights);
  j["steps"] = {{"eta", r.steps.eta},
                {"eta_m", r.steps.eta_m},
                {"eta_omega", r.steps.eta_omega}};
  Json trace = Json::array();
  for (const auto& g : r.gap_trace) trace.push_back(Json::array({g.iteration, g.gap}));
  j["gap_trace"] = std::move(trace);
  j["final_gap"] = r.gap_trace.empty() ? 0.0 : r.gap_trace.back().gap;
  j["eigengap"] = tightness.eigengap;
  j["tight"] = tightness.tight;
  out.matrices.push_back({"M_avg", r.m_avg.matrix()});
  out.matrices.push_back({"P_rounded", r.p_rounded.matrix()});
  return out;
}

Report from_dual(const DualReport& r, const SecondMomentSet& m, int k) {
  Report out;
  Json& j = out.body;
  j["kind"] = "dual";
  j["k"] = k;
  j["d"] = m.dim();
  j["sources"] = m.count();
  j["labels"] = m.labels();
  j["iterations"] = r.iterations;
  j["eta"] = r.eta;
  j["weights"] = vector_json(r.omega_avg.weights);
  j["phi_at_avg"] = r.phi_at_avg;
  Json trace = Json::array();
  for (const auto& p : r.phi_trace) trace.push_back(Json::array({p.iteration, p.phi}));
  j["phi_trace"] = std::move(trace);
  j["eigengap"] = r.eigengap;
  j["tight"] = r.tight;
  out.matrices.push_back({"M_candidate", r.m_candidate.matrix()});
  return out;
}

std::string dump(const Json& j, int indent) {
  std::ostringstream os;
  emit(os, j, indent, 0);
  return os.str();
}

void write_text_atomic(const fs::path& path, const std::string& text) {
  const fs::path tmp = temp_path(path);
  {
    std::ofstream out(tmp, std::ios::trunc | std::ios::binary);
    if (!out) throw Error(ErrorKind::IoError, "cannot write '" + path.string() + "'");
    out << text;
    out.flush();
    if (!out) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw Error(ErrorKind::IoError, "write failure on '" + path.string() + "'");
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(ErrorKind::IoError, "cannot move report into '" + path.string() + "'");
  }
}

void write_report(const Report& report, const fs::path& path) {
  Json body = report.body;
  std::vector<std::pair<fs::path, const Matrix*>> side;
  for (const auto& nm : report.matrices) {
    if (nm.value.rows() > kInlineMatrixLimit || nm.value.cols() > kInlineMatrixLimit) {
      const fs::path csv_path = sibling(path, nm.key);
      body[nm.key] = {{"csv", csv_path.filename().string()},
                      {"rows", nm.value.rows()},
                      {"cols", nm.value.cols()}};
      side.emplace_back(csv_path, &nm.value);
    } else {
      body[nm.key] = matrix_json(nm.value);
    }
  }
  // Side files first: the report only appears once everything it points
  // to is in place.
  for (const auto& [p, mat] : side) {
    const fs::path tmp = temp_path(p);
    csv::write_matrix(tmp, *mat);
    std::error_code ec;
    fs::rename(tmp, p, ec);
    if (ec) throw Error(ErrorKind::IoError, "cannot move matrix into '" + p.string() + "'");
  }
  write_text_atomic(path, dump(body) + "\n");
}

Json read_report(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot open '" + path.string() + "'");
  Json j;
  try {
    j = Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ParseError, path.string() + ": " + e.what());
  }
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (it.value().is_object() && it.value().contains("csv")) {
      fs::path csv_path = path;
      csv_path.replace_filename(it.value()["csv"].get<std::string>());
      it.value() = matrix_json(csv::read_matrix(csv_path));
    }
  }
  return j;
}

}  // namespace robust_mspca::report
