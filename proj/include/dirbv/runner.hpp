#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dirbv/config.hpp"
#include "dirbv/heat.hpp"
#include "dirbv/space.hpp"

namespace dirbv {

using Json = nlohmann::ordered_json;

/// One check line of a report: a descriptive tag, the fitted
/// constant and its stability ratio.
struct CheckRow {
  std::string tag;
  double p = 0.0;  // 0 where no exponent applies
  double constant = 0.0;
  double stability = 1.0;
};

struct ModuleReport {
  std::string module;
  Json json;
  std::vector<CheckRow> checks;
  bool numericOk = true;  // false when a residual or re-evaluation misses its tolerance
  std::vector<std::pair<std::string, std::string>> csv;  // (file suffix, contents)
};

/// Built space plus lazily computed spectral data, shared by all modules of a run.
class Session {
 public:
  explicit Session(ExperimentConfig config);

  const ExperimentConfig& config() const { return config_; }
  const MetricMeasureSpace& space() const { return space_; }
  const SpectralData& spectral();
  /// Header common to every report: version, config hash and canonical form, seed, fingerprint.
  Json header(const std::string& module) const;

 private:
  ExperimentConfig config_;
  MetricMeasureSpace space_;
  std::optional<SpectralData> spectral_;
};

ModuleReport run_heat(Session& s);
ModuleReport run_besov(Session& s, const std::string& kind = "both");
ModuleReport run_bv(Session& s);
/// `check`: weak | quasi | hamilton | kgrad | pseudo | cross | riesz | all.
ModuleReport run_be(Session& s, const std::string& check = "all");
/// `check`: weak | fraciso | sobolev | iso | all.
ModuleReport run_ineq(Session& s, const std::string& check = "all");
/// Koch snowflake study at the given raster resolutions.
ModuleReport run_koch(const ExperimentConfig& config, const std::vector<int>& resolutions);

/// "pass" when stability <= pass, "flag" when <= flag, else "fail".
std::string check_status(double stability, const Thresholds& t);

/// Writes `<module>.json` and any CSV sidecars; returns the JSON path.
std::filesystem::path write_report(const ModuleReport& r, const std::filesystem::path& dir, bool withCsv);

struct SuiteResult {
  std::vector<std::filesystem::path> reports;  // module reports then summary.json
  bool numericOk = true;
};

/// Every configured module on one shared session, then summary.json and a
/// timestamped manifest.json.
SuiteResult run_suite(const ExperimentConfig& config, const std::filesystem::path& outDir);

/// CSV with one row per check found in the reports of `dir`:
/// space,module,tag,p,constant,stability,status. Unreadable files are skipped
/// and named in `warnings`.
std::string summarize(const std::filesystem::path& dir, const Thresholds& thresholds,
                      std::vector<std::string>* warnings = nullptr);

}  // namespace dirbv
