/*
 * Copyright 2026 The polexam Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "polexam/pomdp/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "polexam/error.hpp"

namespace polexam::pomdp {

std::vector<std::size_t> PomdpModel::metric_bins() const {
  std::vector<std::size_t> bins;
  bins.reserve(metrics.size());
  for (const auto& m : metrics) bins.push_back(m.bins);
  return bins;
}

bool PomdpModel::is_terminal(StateId s) const {
  return std::find(terminal_states.begin(), terminal_states.end(), s) !=
         terminal_states.end();
}

namespace {

template <typename Names>
std::optional<std::size_t> index_of(const Names& names,
                                    const std::string& name) {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return i;
  }
  return std::nullopt;
}

class Checker {
 public:
  explicit Checker(ValidationReport& report) : report_(report) {}

  template <typename... Parts>
  void fail(const Parts&... parts) {
    std::ostringstream out;
    (out << ... << parts);
    report_.violations.push_back(out.str());
  }

  // Checks entries in [0,1] and sum 1; `where` names the row.
  void distribution(const std::vector<double>& row, std::size_t expected_size,
                    const std::string& where) {
    if (row.size() != expected_size) {
      fail(where, ": length ", row.size(), ", expected ", expected_size);
      return;
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < row.size(); ++i) {
      const double p = row[i];
      if (!std::isfinite(p) || p < 0.0 || p > 1.0) {
        fail(where, "[", i, "] = ", p, " is outside [0,1]");
      }
      sum += p;
    }
    if (!(std::abs(sum - 1.0) <= kProbabilityTolerance)) {
      std::ostringstream s;
      s.precision(17);
      s << sum;
      fail(where, ": row sums to ", s.str());
    }
  }

 private:
  ValidationReport& report_;
};

std::string label(const char* kernel, std::initializer_list<std::pair<const char*, std::size_t>> idx) {
  std::ostringstream out;
  out << kernel;
  for (const auto& [name, value] : idx) out << "[" << name << "=" << value << "]";
  return out.str();
}

}  // namespace

std::optional<StateId> PomdpModel::find_state(const std::string& n) const {
  return index_of(state_names, n);
}

std::optional<ActionId> PomdpModel::find_defender_action(
    const std::string& n) const {
  for (std::size_t i = 0; i < defender_actions.size(); ++i) {
    if (defender_actions[i].name == n) return i;
  }
  return std::nullopt;
}

std::optional<AttackerActionId> PomdpModel::find_attacker_action(
    const std::string& n) const {
  return index_of(attacker_actions, n);
}

ValidationReport validate_model(const PomdpModel& model) {
  ValidationReport report;
  Checker check(report);

  const std::size_t ns = model.num_states();
  const std::size_t na = model.num_defender_actions();
  const std::size_t nt = model.num_attacker_actions();
  const std::size_t nm = model.num_metrics();

  if (ns < 2) check.fail("state space has ", ns, " states, need at least 2");
  if (na < 1) check.fail("defender action space is empty");
  if (nt < 1) check.fail("attacker action space is empty");
  for (std::size_t a = 0; a < na; ++a) {
    const double c = model.defender_actions[a].cost;
    if (!std::isfinite(c) || c < 0.0) {
      check.fail("defender action ", a, " has invalid cost ", c);
    }
  }
  for (std::size_t m = 0; m < nm; ++m) {
    if (model.metrics[m].bins < 2) {
      check.fail("metric ", m, " (", model.metrics[m].name, ") has ",
                 model.metrics[m].bins, " bins, need at least 2");
    }
  }

  if (model.transition.size() != ns) {
    check.fail("transition has ", model.transition.size(),
               " source states, expected ", ns);
  } else {
    for (std::size_t s = 0; s < ns; ++s) {
      if (model.transition[s].size() != na) {
        check.fail("transition[s=", s, "] has ", model.transition[s].size(),
                   " actions, expected ", na);
        continue;
      }
      for (std::size_t a = 0; a < na; ++a) {
        check.distribution(model.transition[s][a], ns,
                           label("transition", {{"s", s}, {"a_def", a}}));
      }
    }
  }

  if (model.attacker_behavior.size() != ns) {
    check.fail("attacker_behavior has ", model.attacker_behavior.size(),
               " states, expected ", ns);
  } else {
    for (std::size_t s = 0; s < ns; ++s) {
      check.distribution(model.attacker_behavior[s], nt,
                         label("attacker_behavior", {{"s", s}}));
    }
  }

  if (model.observation.size() != ns) {
    check.fail("observation has ", model.observation.size(),
               " states, expected ", ns);
  } else {
    for (std::size_t s = 0; s < ns; ++s) {
      if (model.observation[s].size() != nt) {
        check.fail("observation[s=", s, "] has ", model.observation[s].size(),
                   " attacker actions, expected ", nt);
        continue;
      }
      for (std::size_t t = 0; t < nt; ++t) {
        if (model.observation[s][t].size() != nm) {
          check.fail("observation[s=", s, "][a_att=", t, "] has ",
                     model.observation[s][t].size(), " metrics, expected ", nm);
          continue;
        }
        for (std::size_t m = 0; m < nm; ++m) {
          check.distribution(
              model.observation[s][t][m], model.metrics[m].bins,
              label("observation", {{"s", s}, {"a_att", t}, {"m", m}}));
        }
      }
    }
  }

  if (model.reward.size() != ns) {
    check.fail("reward has ", model.reward.size(), " states, expected ", ns);
  } else {
    for (std::size_t s = 0; s < ns; ++s) {
      if (model.reward[s].size() != na) {
        check.fail("reward[s=", s, "] has ", model.reward[s].size(),
                   " actions, expected ", na);
        continue;
      }
      for (std::size_t a = 0; a < na; ++a) {
        if (!std::isfinite(model.reward[s][a])) {
          check.fail("reward[s=", s, "][a_def=", a, "] is not finite");
        }
      }
    }
  }

  check.distribution(model.initial_distribution, ns, "initial_distribution");

  if (model.horizon < 1) check.fail("horizon must be >= 1");
  for (StateId s : model.terminal_states) {
    if (s >= ns) check.fail("terminal state ", s, " is not a state id");
  }
  if (model.nominal_state && *model.nominal_state >= ns) {
    check.fail("nominal_state ", *model.nominal_state, " is not a state id");
  }
  if (model.defend_action && *model.defend_action >= na) {
    check.fail("defend_action ", *model.defend_action,
               " is not a defender action id");
  }
  return report;
}

void require_valid(const PomdpModel& model) {
  const auto report = validate_model(model);
  if (report.ok()) return;
  std::ostringstream out;
  out << "model '" << model.name << "' is invalid (" << report.violations.size()
      << " violations): " << report.violations.front();
  throw Error(ErrorCode::kModelInvalid, out.str());
}

void check_observation(const PomdpModel& model, const Observation& obs) {
  if (obs.bins.size() != model.num_metrics()) {
    throw Error(ErrorCode::kIndex,
                "observation has " + std::to_string(obs.bins.size()) +
                    " metrics, model has " +
                    std::to_string(model.num_metrics()));
  }
  for (std::size_t m = 0; m < obs.bins.size(); ++m) {
    if (obs.bins[m] >= model.metrics[m].bins) {
      throw Error(ErrorCode::kIndex,
                  "bin " + std::to_string(obs.bins[m]) + " out of range for metric " +
                      model.metrics[m].name);
    }
  }
}

bool same_scenario_family(const PomdpModel& model,
                          const std::string& scenario) {
  return scenario == model.name ||
         (!model.base_scenario.empty() && scenario == model.base_scenario);
}

}  // namespace polexam::pomdp
