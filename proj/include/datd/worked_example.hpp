#pragma once

// The five-source worked example: fixed priors, one DATD round, and the
// published intermediate values it must reproduce.

#include <string>
#include <vector>

#include "datd/td_core.hpp"

namespace datd {

struct ExampleCheck {
  std::string name;
  double expected = 0.0;
  double actual = 0.0;
  bool pass = false;
};

struct WorkedExample {
  std::vector<Observation> observations;
  CredibilityLedger ledger;
  double task_value = 0.0;
  TDConfig config;
};

/// Priors r = {0.8,0.8,0.8,0.95,0.95}, cpec 2.5, full participation,
/// gamma 0.5, M = 8, reports {1.0,1.0,1.0,0.5,0.4}.
WorkedExample worked_example();

/// Runs the example round and compares every intermediate at `tolerance`.
std::vector<ExampleCheck> check_worked_example(double tolerance = 0.001);

}  // namespace datd
