// Copyright 2026 The advlens Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#include <cstdio>
#include <exception>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "advlens/cli/commands.hpp"

namespace {

namespace cli = advlens::cli;

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> jobs;
  std::string out;
  cli::RunOptions run;
};

void add_common(CLI::App* sub, Flags& f) {
  sub->add_option("--config", f.config, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
  sub->add_option("--seed", f.seed, "global seed override");
  sub->add_option("--jobs", f.jobs, "worker threads")->check(CLI::PositiveNumber);
  sub->add_option("--out", f.out, "output directory override");
  sub->add_flag("--force", f.run.force, "replace existing outputs");
  sub->add_flag("--plots", f.run.plots, "also write PNG plots");
  sub->add_flag("-q,--quiet", f.run.quiet, "no progress on stderr");
}

cli::ExperimentConfig effective(const Flags& f) {
  cli::ExperimentConfig c = cli::load_config(f.config);
  if (f.seed) c.seed = *f.seed;
  if (f.jobs) c.jobs = *f.jobs;
  if (!f.out.empty()) c.output = f.out;
  return c;
}

int fail(int code, const char* kind, const std::string& what) {
  std::fprintf(stderr, "advlens: %s: %s\n", kind, what.c_str());
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"advlens: adversarial robustness benchmark for toy object detectors"};
  app.require_subcommand(1);
  Flags f;

  struct Verb {
    const char* name;
    const char* help;
    void (*run)(const cli::ExperimentConfig&, const cli::RunOptions&);
  };
  const Verb verbs[] = {
      {"generate", "write the train/test shapes datasets", cli::cmd_generate},
      {"train", "train every configured detector", cli::cmd_train},
      {"attack", "run the configured attacks on the test set", cli::cmd_attack},
      {"evaluate", "score benign and adversarial detections", cli::cmd_evaluate},
      {"transfer", "cross-model and cross-resolution matrices", cli::cmd_transfer},
  };
  std::vector<std::pair<CLI::App*, const Verb*>> subs;
  for (const auto& v : verbs) {
    CLI::App* sub = app.add_subcommand(v.name, v.help);
    add_common(sub, f);
    subs.emplace_back(sub, &v);
  }

  std::vector<std::string> runs;
  std::string report_out;
  CLI::App* report = app.add_subcommand("report", "compare evaluation reports of several runs");
  report->add_option("runs", runs, "run directories");
  report->add_option("--out", report_out, "output directory")->required();
  report->add_flag("--force", f.run.force, "replace existing outputs");
  report->add_flag("--plots", f.run.plots, "also write PNG plots");
  report->add_flag("-q,--quiet", f.run.quiet, "no progress on stderr");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (report->parsed()) {
      std::vector<std::filesystem::path> dirs(runs.begin(), runs.end());
      cli::cmd_report(dirs, report_out, f.run);
      return 0;
    }
    for (const auto& [sub, v] : subs)
      if (sub->parsed()) v->run(effective(f), f.run);
    return 0;
  } catch (const advlens::ValidationError& e) {
    return fail(2, "invalid input", e.what());
  } catch (const advlens::ApplicabilityError& e) {
    return fail(3, "not applicable", e.what());
  } catch (const std::exception& e) {
    return fail(4, "failed", e.what());
  }
}
