#pragma once

#include "krflow/flow.hpp"
#include "krflow/monitors.hpp"

#include <string>
#include <vector>

namespace krf {

enum class ScenarioKind { round, legendre_bump, multi_mode, custom_w };
enum class SweepTarget { amplitude, calabi };

struct Scenario {
  ScenarioKind kind = ScenarioKind::legendre_bump;
  int l = 2;
  double epsilon = 1e-3;
  int rescale_volume = -1;  // -1: default for the scenario (on, except custom_w)
  unsigned long long seed = 1;
  double decay_rate = 2.0;
  double amplitude = 1e-2;
  std::string file;

  bool rescales() const { return rescale_volume < 0 ? kind != ScenarioKind::custom_w : rescale_volume != 0; }
};

struct ExperimentSpec {
  Scenario scenario;
  int grid_n = 256;
  FlowConfig flow;
  MonitorParams monitors;
  double D = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> sweep;
  SweepTarget sweep_target = SweepTarget::amplitude;
  int workers = 1;
  std::string output_dir = "krflow_out";
};

ExperimentSpec default_spec();

/// Grammar: `key = value` lines, `[flow]`, `[monitors]`, `[sweep]` sections,
/// comma lists, `#` comments. Several assignments may share a line when
/// separated by commas. Throws ConfigError naming the line and key.
ExperimentSpec parse_spec(const std::string& text);
ExperimentSpec load_spec(const std::string& path);

/// Canonical text with every default filled in; parse_spec(to_text(s)) == s.
std::string to_text(const ExperimentSpec& spec);

bool operator==(const ExperimentSpec& a, const ExperimentSpec& b);

std::string scenario_name(const Scenario& s);

/// 64-bit FNV-1a, printed as 16 hex digits.
std::string fnv1a_hex(const std::string& text);

}  // namespace krf
