#pragma once

#include <map>
#include <string>
#include <vector>

#include "hs/solver.hpp"

namespace hs {

struct EnvelopeEntry {
  double value = 0.0;
  std::string tag;
};

/// Committed tolerances and pilot envelopes, keyed by metric name.
struct Envelopes {
  std::map<std::string, EnvelopeEntry> entries;
  double at(const std::string& key) const;
};

Envelopes load_envelopes(const std::string& path);

struct RunConfig {
  BoundaryGrid grid;
  EllipticSystem system;
  KernelMethod method = KernelMethod::FourierSymbol;
  unsigned seed = 1;
  std::vector<std::string> experiments;
  std::string envelopes_path;
  std::string out_dir;
  std::string digest;  // canonical-config hash, part of the summary
};

RunConfig load_run_config(const std::string& path);

struct ExperimentResult {
  std::string name;
  bool pass = false;
  std::map<std::string, double> metrics;
  std::string detail;
};

/// Runs the named experiments; jobs > 1 executes independent experiments on
/// worker threads, with the result order fixed by the config.
std::vector<ExperimentResult> run_experiments(const RunConfig& cfg, const Envelopes& env,
                                              int jobs = 1);

/// Deterministic summary document (sorted keys, fixed experiment order).
std::string summary_json(const RunConfig& cfg, const std::vector<ExperimentResult>& results);

bool all_pass(const std::vector<ExperimentResult>& results);

}  // namespace hs
