#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "frtsim/scenario.hpp"
#include "frtsim/simulation.hpp"

namespace frtsim {

/// Raised for any file-system failure; the message names the path.
class TraceIoError : public std::runtime_error {
 public:
  TraceIoError(const std::filesystem::path& path, const std::string& what)
      : std::runtime_error(path.string() + ": " + what), path_(path) {}
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline constexpr const char* kTraceHeader = "t,e_a,e_b,e_c,v_pcc_al,v_pcc_be,i_inv_al,i_inv_be,i_inv_pu,rst,ctr_ovs_w";

std::string format_trace(const TraceSet& traces);
void write_traces(const TraceSet& traces, const std::filesystem::path& path);
TraceSet parse_traces(const std::string& text);
TraceSet read_traces(const std::filesystem::path& path);

/// Per-execution controller telemetry, one row per high-rate sample.
void write_telemetry(const std::vector<HighRateTelemetry>& rows, const std::filesystem::path& path);

std::string format_summary(const ScenarioResult& result);
void write_summary(const ScenarioResult& result, const std::filesystem::path& path);

}  // namespace frtsim
