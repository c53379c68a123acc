#pragma once

#include <json.hpp>
#include <string>
#include <vector>

namespace mpradon::report {

/// Accumulates the machine-readable summary plus CSV artifacts of one
/// experiment. Every numeric claim carries its tolerance in the summary,
/// and the config is echoed verbatim for reproducibility.
class ReportBundle {
public:
  explicit ReportBundle(std::string experiment) { summary_["experiment"] = std::move(experiment); }

  void echo_config(const nlohmann::json& config) { summary_["config"] = config; }

  void add_check(const std::string& name, bool pass, double value, double tolerance,
                 const std::string& comparison = "<=") {
    nlohmann::json c;
    c["name"] = name;
    c["pass"] = pass;
    c["value"] = value;
    c["tolerance"] = tolerance;
    c["comparison"] = comparison;
    summary_["checks"].push_back(c);
    all_pass_ = all_pass_ && pass;
  }

  void add_info(const std::string& key, const nlohmann::json& value) { summary_[key] = value; }

  void add_csv(const std::string& filename, const std::string& header,
               const std::vector<std::string>& rows) {
    csvs_.push_back({filename, header, rows});
  }

  bool all_pass() const { return all_pass_; }
  nlohmann::json& summary() { return summary_; }
  const nlohmann::json& summary() const { return summary_; }

  /// Writes summary.json and the CSV artifacts; returns the exit code
  /// (0 all-pass, 1 any fail).
  int write(const std::string& out_dir) const;
  void print(std::ostream& os) const;

private:
  struct Csv {
    std::string filename, header;
    std::vector<std::string> rows;
  };
  nlohmann::json summary_;
  std::vector<Csv> csvs_;
  bool all_pass_ = true;
};

}  // namespace mpradon::report
