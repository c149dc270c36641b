#include "strb/metrics.hpp"

#include "strb/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace strb::metrics {

double relative_error(const Matrix& rom, const Matrix& fom, const SparseMatrix& x) {
  if (rom.rows() != fom.rows() || rom.cols() != fom.cols()) throw DimensionError("relative_error: shape mismatch");
  const Matrix d = rom - fom;
  const double den = fom.cwiseProduct(x * fom).sum();
  if (!(den > 0.0)) throw NumericalError("relative_error: reference trajectory has zero norm");
  return std::sqrt(std::max(0.0, d.cwiseProduct(x * d).sum()) / den);
}

ErrorReport relative_errors(const std::vector<fom::Trajectory>& rom, const std::vector<fom::Trajectory>& fom,
                            const fom::FomSpatialBlocks& f) {
  if (rom.size() != fom.size()) throw DimensionError("relative_errors: sample counts differ");
  ErrorReport r;
  for (std::size_t i = 0; i < rom.size(); ++i) {
    r.per_mu_u.push_back(relative_error(rom[i].u, fom[i].u, f.X_u));
    r.per_mu_p.push_back(relative_error(rom[i].p, fom[i].p, f.X_p));
  }
  const double n = static_cast<double>(rom.size());
  for (std::size_t i = 0; i < rom.size(); ++i) {
    r.e_u += r.per_mu_u[i] / n;
    r.e_p += r.per_mu_p[i] / n;
  }
  return r;
}

double PerfReport::reduction_factor() const {
  return rom_size > 0 ? static_cast<double>(fom_size) / static_cast<double>(rom_size) : 0.0;
}

double PerfReport::speedup() const { return online_seconds > 0.0 ? fom_seconds / online_seconds : 0.0; }

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

namespace {

std::string num(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

}  // namespace

std::string study_csv(const std::vector<StudyRow>& rows, bool include_timing) {
  std::ostringstream os;
  os << "method,eps_pod,rom_size,rf," << (include_timing ? "su," : "") << "e_u,e_p,e_u_ratio,e_p_ratio\n";
  for (const auto& r : rows) {
    os << r.method << ',' << num(r.eps_pod) << ',' << r.rom_size << ',' << num(r.rf) << ',';
    if (include_timing) os << num(r.su) << ',';
    os << num(r.e_u) << ',' << num(r.e_p) << ',' << num(r.e_u_ratio()) << ',' << num(r.e_p_ratio()) << '\n';
  }
  return os.str();
}

std::string study_json(const std::vector<StudyRow>& rows, bool include_timing) {
  nlohmann::ordered_json j = nlohmann::ordered_json::array();
  for (const auto& r : rows) {
    nlohmann::ordered_json o;
    o["method"] = r.method;
    o["eps_pod"] = r.eps_pod;
    o["rom_size"] = r.rom_size;
    o["rf"] = r.rf;
    if (include_timing) o["su"] = r.su;
    o["e_u"] = r.e_u;
    o["e_p"] = r.e_p;
    o["e_u_ratio"] = r.e_u_ratio();
    o["e_p_ratio"] = r.e_p_ratio();
    j.push_back(o);
  }
  return j.dump(2) + "\n";
}

std::string study_long_csv(const std::vector<StudyRow>& rows, bool include_timing) {
  std::ostringstream os;
  os << "method,eps_pod,metric,value\n";
  for (const auto& r : rows) {
    auto line = [&](const char* m, double v) { os << r.method << ',' << num(r.eps_pod) << ',' << m << ',' << num(v) << '\n'; };
    line("rom_size", static_cast<double>(r.rom_size));
    line("rf", r.rf);
    if (include_timing) line("su", r.su);
    line("e_u", r.e_u);
    line("e_p", r.e_p);
  }
  return os.str();
}

}  // namespace strb::metrics
