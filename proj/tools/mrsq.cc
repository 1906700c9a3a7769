#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "mrsq/analysis/diagnostics.h"
#include "mrsq/analysis/search_failure.h"
#include "mrsq/common/errors.h"
#include "mrsq/env/registry.h"
#include "mrsq/harness/config.h"
#include "mrsq/harness/trainer.h"

namespace {

using namespace mrsq;

int Train(const std::string& config_path, const std::vector<std::string>& overrides,
          const std::string& out, const uint64_t* seed) {
  harness::RunConfig config =
      config_path.empty() ? harness::RunConfig{} : harness::LoadConfigFile(config_path);
  for (const std::string& o : overrides) harness::ApplyOverride(config, o);
  if (seed != nullptr) config.seed = *seed;
  if (!out.empty()) config.output_dir = out;
  config.Validate();
  harness::Trainer trainer(config);
  trainer.Run();
  trainer.Finish();
  if (!trainer.evals().empty()) {
    const auto& e = trainer.evals().back();
    std::printf("step %lld eval mean return %.4f (length %.1f)\n",
                static_cast<long long>(e.step), e.mean_return, e.mean_length);
  }
  std::printf("wrote %s\n", config.output_dir.c_str());
  return 0;
}

int Eval(const std::string& checkpoint, int episodes, uint64_t seed, bool deterministic) {
  const harness::EvalResult r =
      harness::EvaluateCheckpoint(checkpoint, episodes, seed, deterministic);
  nlohmann::json j = {{"mean_return", r.mean_return},
                      {"mean_length", r.mean_length},
                      {"returns", r.returns},
                      {"lengths", r.lengths}};
  std::cout << j.dump() << "\n";
  return 0;
}

int AnalyzeNChain(const std::vector<int>& as, const std::vector<int>& ns,
                  const std::vector<int64_t>& ms, int64_t trials, uint64_t seed,
                  bool exhaustive) {
  std::printf("A,n,m,closed_form,empirical,ci_low,ci_high\n");
  const Rng root(seed, "analyze-nchain");
  uint64_t cell = 0;
  for (int a : as) {
    for (int n : ns) {
      for (int64_t m : ms) {
        analysis::SearchFailureQuery q{a, n, m, trials};
        Rng rng = root.Derive(cell++);
        const analysis::SearchSimulation s = analysis::SimulateRandomSearch(q, rng, exhaustive);
        std::printf("%d,%d,%lld,%.10g,%.10g,%.10g,%.10g\n", a, n, static_cast<long long>(m),
                    s.closed_form, s.rate, s.ci_low, s.ci_high);
      }
    }
  }
  return 0;
}

int Diagnose(const std::string& checkpoint, const analysis::DiagnosticConfig& dc, uint64_t seed) {
  const harness::LoadedAgent la = harness::LoadAgent(checkpoint);
  auto env = env::MakeEnvironment(la.config.env, la.config.env_params);
  harness::ActorOptions o;
  o.use_mpc = la.config.use_mpc_for_acting;
  harness::AgentActor actor(la.agent, o);
  const double gamma = la.config.discount;

  Rng rng(seed, "diagnose");
  const analysis::ValueErrorReport rep = analysis::ValueErrorPercent(actor, *env, dc, gamma, rng);
  for (size_t i = 0; i < rep.estimates.size(); ++i) {
    nlohmann::json j = {{"probe", i},
                        {"estimate", rep.estimates[i]},
                        {"return", rep.returns[i]},
                        {"percent_error", rep.percent_errors[i]}};
    std::cout << j.dump() << "\n";
  }
  Rng seg_rng(seed, "diagnose_segments");
  const analysis::SegmentCollection segs =
      analysis::CollectProbeSegments(actor, *env, dc, gamma, seg_rng);
  const auto reduction = la.config.min_in_mpc ? plan::ValueReduction::kMin
                                              : plan::ValueReduction::kMean;
  const analysis::ErrorSummary dyn = analysis::DynamicsError(*la.agent, segs.segments, gamma);
  const analysis::ErrorSummary unroll =
      analysis::UnrollError(*la.agent, segs.segments, gamma, reduction);
  nlohmann::json summary = {{"summary", true},
                            {"mean_percent_error", rep.mean_percent},
                            {"dynamics_error", dyn.mean},
                            {"unroll_error", unroll.mean},
                            {"segments_used", dyn.used},
                            {"segments_skipped", segs.skipped + dyn.skipped}};
  std::cout << summary.dump() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"MRS.Q: model-based RL with MPPI over a learned latent model"};
  app.require_subcommand(1);

  auto* train = app.add_subcommand("train", "Train an agent");
  std::string config_path;
  std::vector<std::string> overrides;
  std::string out;
  uint64_t train_seed = 0;
  train->add_option("--config", config_path, "YAML config file");
  auto* seed_opt = train->add_option("--seed", train_seed, "Master seed");
  train->add_option("--out", out, "Output directory");
  train->add_option("--override", overrides, "key=value (repeatable)");

  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint");
  std::string eval_ckpt;
  int episodes = 10;
  uint64_t eval_seed = 0;
  bool deterministic = false;
  eval->add_option("--checkpoint", eval_ckpt)->required();
  eval->add_option("--episodes", episodes)->check(CLI::PositiveNumber);
  eval->add_option("--seed", eval_seed);
  eval->add_flag("--deterministic", deterministic, "Pick the best elite instead of sampling");

  auto* analyze = app.add_subcommand("analyze-nchain", "Random-search success on the N-chain");
  std::vector<int> as{10};
  std::vector<int> ns{3};
  std::vector<int64_t> ms{1000};
  int64_t trials = 20000;
  uint64_t analyze_seed = 0;
  bool exhaustive = false;
  analyze->add_option("--A", as, "Action counts")->delimiter(',');
  analyze->add_option("--n", ns, "Search horizons")->delimiter(',');
  analyze->add_option("--m", ms, "Sampled trajectories")->delimiter(',');
  analyze->add_option("--trials", trials)->check(CLI::PositiveNumber);
  analyze->add_option("--seed", analyze_seed);
  analyze->add_flag("--exhaustive", exhaustive, "Draw distinct sequences within a trial");

  auto* diagnose = app.add_subcommand("diagnose", "Value, dynamics and unroll errors");
  std::string diag_ckpt;
  analysis::DiagnosticConfig dc;
  dc.threads = harness::WorkerThreads();
  uint64_t diag_seed = 0;
  diagnose->add_option("--checkpoint", diag_ckpt)->required();
  diagnose->add_option("--probes", dc.probe_pairs);
  diagnose->add_option("--spacing", dc.probe_spacing);
  diagnose->add_option("--rollouts", dc.rollouts_per_pair);
  diagnose->add_option("--horizon", dc.rollout_horizon, "Rollout steps (0: env time limit)");
  diagnose->add_option("--seed", diag_seed);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train) return Train(config_path, overrides, out, *seed_opt ? &train_seed : nullptr);
    if (*eval) return Eval(eval_ckpt, episodes, eval_seed, deterministic);
    if (*analyze) return AnalyzeNChain(as, ns, ms, trials, analyze_seed, exhaustive);
    if (*diagnose) return Diagnose(diag_ckpt, dc, diag_seed);
  } catch (const mrsq::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
