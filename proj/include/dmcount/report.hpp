#ifndef DMCOUNT_REPORT_HPP
#define DMCOUNT_REPORT_HPP

#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "dmcount/io.hpp"

namespace dmcount {

/// Structured key/value record of one CLI run. Fields keep insertion order
/// so identical runs serialize byte-identically; timing lines are emitted
/// last and are the only part expected to differ between reruns.
struct RunReport {
  std::string command;
  std::vector<std::pair<std::string, std::string>> inputs;
  std::vector<std::pair<std::string, std::string>> outputs;
  std::vector<std::pair<std::string, std::string>> timing;

  void input(const std::string& key, const std::string& value) {
    inputs.emplace_back(key, value);
  }
  void input(const std::string& key, double value) {
    inputs.emplace_back(key, format_real(value));
  }
  void input(const std::string& key, long value) {
    inputs.emplace_back(key, std::to_string(value));
  }
  void output(const std::string& key, const std::string& value) {
    outputs.emplace_back(key, value);
  }
  void output(const std::string& key, double value) {
    outputs.emplace_back(key, format_real(value));
  }
  void output(const std::string& key, long value) {
    outputs.emplace_back(key, std::to_string(value));
  }
  void timing_ms(const std::string& phase, double ms) {
    timing.emplace_back("timing." + phase + "_ms", format_real(ms));
  }

  std::string to_text() const {
    std::ostringstream os;
    os << "command = " << command << '\n';
    for (const auto& [k, v] : inputs) os << "input." << k << " = " << v << '\n';
    for (const auto& [k, v] : outputs)
      os << "output." << k << " = " << v << '\n';
    for (const auto& [k, v] : timing) os << k << " = " << v << '\n';
    return os.str();
  }
};

}  // namespace dmcount

#endif  // DMCOUNT_REPORT_HPP
