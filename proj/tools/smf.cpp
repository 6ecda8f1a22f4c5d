// Command-line driver for the mean-field light-path experiments.
//
//   smf <verb> [flags]         verbs: oracle-sweep, light-count, verify-bounds,
//                                     bridge-pipeline, downcross-study
//   smf <verb> --config spec.json [flags]
//
// Flags override values from the config file. SMF_THREADS sets the default
// worker count.

#include <chrono>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "smf/harness.hpp"

namespace {

/// Binds a flag to a local value and records how to copy it into the
/// ExperimentSpec when the user actually passed it.
class Overrides {
 public:
  template <class T>
  void add(CLI::App& app, const std::string& flag, T smf::ExperimentSpec::*field,
           const std::string& help) {
    auto value = std::make_shared<T>();
    CLI::Option* opt = app.add_option(flag, *value, help);
    if constexpr (CLI::detail::is_mutable_container<T>::value) opt->delimiter(',');
    apply_.push_back([opt, value, field](smf::ExperimentSpec& s) {
      if (opt->count() > 0) s.*field = *value;
    });
  }

  void add_flag(CLI::App& app, const std::string& flag, bool smf::ExperimentSpec::*field,
                const std::string& help) {
    auto value = std::make_shared<bool>(false);
    CLI::Option* opt = app.add_flag(flag, *value, help);
    apply_.push_back([opt, value, field](smf::ExperimentSpec& s) {
      if (opt->count() > 0) s.*field = *value;
    });
  }

  void apply(smf::ExperimentSpec& s) const {
    for (const auto& f : apply_) f(s);
  }

 private:
  std::vector<std::function<void(smf::ExperimentSpec&)>> apply_;
};

void register_flags(CLI::App& sub, Overrides& o) {
  using S = smf::ExperimentSpec;
  o.add(sub, "-n,--n", &S::n, "number of vertices");
  o.add(sub, "--lambda", &S::lambda, "average-weight budget");
  o.add(sub, "--lambda-grid", &S::lambda_grid, "lambda values for the oracle sweep");
  o.add(sub, "--eta", &S::eta, "lambda = 1/e + eta for good paths");
  o.add(sub, "--ell", &S::ell, "short path / block length");
  o.add(sub, "-C,--c", &S::c, "sqrt(ell) slack multiplier");
  o.add(sub, "--zeta1", &S::zeta1, "reservoir fraction");
  o.add(sub, "--zeta2", &S::zeta2, "deviation-cap constant");
  o.add(sub, "--nu", &S::nu, "predecessor pool size");
  o.add(sub, "--delta", &S::delta, "target fraction of n");
  o.add(sub, "-L,--path-length", &S::path_length, "long path length for downcross trials");
  o.add(sub, "--c-grid", &S::c_grid, "A_k constants for the domination probe");
  o.add(sub, "--eta-prime-grid", &S::eta_prime_grid, "eta' values for the excursion probe");
  o.add(sub, "--seeds", &S::seeds, "explicit seed list");
  o.add(sub, "--seed-base", &S::seed_base, "base seed for split seeds");
  o.add(sub, "--seed-count", &S::seed_count, "number of split seeds");
  o.add(sub, "--trials", &S::trials, "Monte Carlo trials");
  o.add(sub, "--budget", &S::budget, "search node-expansion cap");
  o.add(sub, "-j,--threads", &S::threads, "worker threads (0: SMF_THREADS or hardware)");
  o.add(sub, "-o,--output", &S::output, "output file (default: standard output)");
  o.add(sub, "--bound-scale", &S::bound_scale, "multiply tail bounds (negative control)");
  o.add_flag(sub, "--allow-large", &S::allow_large, "lift the exact-oracle size guard");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Light paths in the stochastic mean-field model"};
  app.require_subcommand(1);

  std::vector<std::pair<CLI::App*, std::unique_ptr<Overrides>>> subs;
  std::string config_path;
  for (const auto& name : smf::command_names()) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "JSON experiment spec")->check(CLI::ExistingFile);
    auto o = std::make_unique<Overrides>();
    register_flags(*sub, *o);
    subs.emplace_back(sub, std::move(o));
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : smf::kExitInvalidSpec;
  }

  smf::ExperimentSpec spec;
  for (const auto& [sub, overrides] : subs) {
    if (!sub->parsed()) continue;
    try {
      if (!config_path.empty()) {
        std::ifstream in(config_path);
        smf::merge_spec(spec, nlohmann::json::parse(in));
      }
    } catch (const std::exception& e) {
      std::cerr << "invalid spec: " << e.what() << "\n";
      return smf::kExitInvalidSpec;
    }
    overrides->apply(spec);
    spec.command = sub->get_name();
  }

  std::ofstream file;
  if (!spec.output.empty()) {
    file.open(spec.output, std::ios::binary);
    if (!file) {
      std::cerr << "cannot open " << spec.output << "\n";
      return smf::kExitInvalidSpec;
    }
  }
  // Wall time goes to stderr only so artifacts stay byte-identical across runs.
  const auto start = std::chrono::steady_clock::now();
  const int code = smf::run_experiment(spec, spec.output.empty() ? std::cout : file, std::cerr);
  const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
  std::cerr << spec.command << ": exit " << code << ", wall " << elapsed.count() << " s\n";
  return code;
}
