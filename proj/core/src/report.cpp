#include "mpradon/report.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>

namespace mpradon::report {

int ReportBundle::write(const std::string& out_dir) const {
  std::filesystem::create_directories(out_dir);
  {
    std::ofstream os(out_dir + "/summary.json");
    os << summary_.dump(2) << "\n";
  }
  for (const auto& csv : csvs_) {
    std::ofstream os(out_dir + "/" + csv.filename);
    os << csv.header << "\n";
    for (const auto& row : csv.rows) os << row << "\n";
  }
  return all_pass_ ? 0 : 1;
}

void ReportBundle::print(std::ostream& os) const {
  if (summary_.contains("checks"))
    for (const auto& c : summary_["checks"])
      os << (c["pass"].get<bool>() ? "[PASS] " : "[FAIL] ") << c["name"].get<std::string>()
         << "  value=" << c["value"].get<double>() << " " << c["comparison"].get<std::string>()
         << " tol=" << c["tolerance"].get<double>() << "\n";
}

}  // namespace mpradon::report
