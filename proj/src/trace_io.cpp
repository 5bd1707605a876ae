#include "frtsim/trace_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace frtsim {

namespace {

void append(std::string& out, const char* fmt, double v) {
  char buf[40];
  const int n = std::snprintf(buf, sizeof buf, fmt, v);
  out.append(buf, std::size_t(n));
}

void append_g9(std::string& out, double v) { append(out, "%.9g", v); }

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw TraceIoError(path, "cannot open for writing");
  out << text;
  out.flush();
  if (!out) throw TraceIoError(path, "write failed");
}

nlohmann::json metrics_json(const Metrics& m) {
  nlohmann::json j;
  j["peak_current_pu"] = m.peak_current_pu;
  j["peak_time"] = m.peak_time;
  j["rst_count"] = m.rst_count;
  j["reaction_latency"] = m.reaction_latency ? nlohmann::json(*m.reaction_latency) : nlohmann::json(nullptr);
  j["steady_state_current_error_pu"] = m.steady_state_current_error_pu;
  return j;
}

nlohmann::json optional_json(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

}  // namespace

std::string format_trace(const TraceSet& traces) {
  std::string out = kTraceHeader;
  out += '\n';
  out.reserve(traces.records.size() * 160);
  for (const TraceRecord& r : traces.records) {
    const double values[] = {r.t, r.e_abc(0), r.e_abc(1), r.e_abc(2), r.v_pcc(0),
                             r.v_pcc(1), r.i_inv(0), r.i_inv(1), r.i_pu};
    for (double v : values) {
      append_g9(out, v);
      out += ',';
    }
    out += r.rst ? '1' : '0';
    out += ',';
    out += std::to_string(r.ctr_ovs_w);
    out += '\n';
  }
  return out;
}

void write_traces(const TraceSet& traces, const std::filesystem::path& path) { write_file(path, format_trace(traces)); }

TraceSet parse_traces(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kTraceHeader) {
    throw std::invalid_argument("trace header mismatch");
  }
  TraceSet traces;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    TraceRecord r;
    double v[9];
    int rst = 0;
    int ctr = 0;
    const int got = std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf,%lf,%lf,%lf,%lf,%lf,%d,%d", &v[0], &v[1], &v[2],
                                &v[3], &v[4], &v[5], &v[6], &v[7], &v[8], &rst, &ctr);
    if (got != 11) {
      throw std::invalid_argument("malformed trace row at line " + std::to_string(line_no));
    }
    r.t = v[0];
    r.e_abc << v[1], v[2], v[3];
    r.v_pcc << v[4], v[5];
    r.i_inv << v[6], v[7];
    r.i_pu = v[8];
    r.rst = rst != 0;
    r.ctr_ovs_w = ctr;
    traces.records.push_back(r);
  }
  return traces;
}

TraceSet read_traces(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw TraceIoError(path, "cannot open for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_traces(buf.str());
  } catch (const std::invalid_argument& e) {
    throw TraceIoError(path, e.what());
  }
}

void write_telemetry(const std::vector<HighRateTelemetry>& rows, const std::filesystem::path& path) {
  std::string out = "t,ctr_ovs_w,rst,u_end,dv_al,dv_be,di_norm,cmp_a,cmp_b,cmp_c\n";
  for (const HighRateTelemetry& r : rows) {
    append_g9(out, r.t);
    out += ',' + std::to_string(r.ctr_ovs_w) + ',' + (r.rst ? "1" : "0") + ',' + (r.u_end ? "1" : "0") + ',';
    append_g9(out, r.delta_v(0));
    out += ',';
    append_g9(out, r.delta_v(1));
    out += ',';
    append_g9(out, r.delta_i_norm);
    for (int p = 0; p < 3; ++p) {
      out += ',';
      if (r.cmp) out += std::to_string((*r.cmp)[p]);
    }
    out += '\n';
  }
  write_file(path, out);
}

std::string format_summary(const ScenarioResult& result) {
  nlohmann::json j;
  j["scenario"] = result.name;
  j["per_unit"] = {{"i_base", result.config.base.i_base},
                   {"v_base", result.config.base.v_base},
                   {"convention", "peak"}};
  j["peak_metric"] = "max |i_inv_alphabeta| over high-rate samples in [0, duration]";
  nlohmann::json runs = nlohmann::json::object();
  for (const RunResult& r : result.runs) {
    runs[mode_name(r.mode)] = metrics_json(r.metrics);
  }
  j["runs"] = runs;
  if (result.comparison) {
    const ModeComparison& c = *result.comparison;
    j["comparison"] = {{"peak_reduction_pu", c.peak_reduction_pu},
                       {"peak_reduction_percent", c.peak_reduction_percent},
                       {"dsdu_latency", optional_json(c.dsdu_latency)},
                       {"proposed_latency", optional_json(c.proposed_latency)},
                       {"dsdu_rst_count", c.dsdu_rst_count},
                       {"proposed_rst_count", c.proposed_rst_count}};
  }
  return j.dump(2) + "\n";
}

void write_summary(const ScenarioResult& result, const std::filesystem::path& path) {
  write_file(path, format_summary(result));
}

}  // namespace frtsim
