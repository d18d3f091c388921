// SPDX-License-Identifier: Apache-2.0
// pdc: command-line front end for principal dynamical component fits.

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "pdc/pdc.hpp"

using namespace pdc;

namespace {

constexpr int kExitParse = 2;
constexpr int kExitFit = 3;

struct SlotChoice {
  SlotIndexer indexer = SlotIndexer::autonomous();
  int count = 1;
};

SlotChoice parse_slots(const std::string& text, int N) {
  if (text == "auto") return {};
  if (text == "trend") return {SlotIndexer::per_step(), N};
  if (text.rfind("periodic:", 0) == 0) {
    const int T = detail::parse_int_or_throw(text.substr(9), 0);
    if (T < 1) throw ParseError("--slots periodic:T needs T >= 1", 0);
    return {SlotIndexer::periodic(T), T};
  }
  throw ParseError("--slots must be auto, periodic:T or trend (got '" + text + "')", 0);
}

IntRange parse_range(const std::string& text) {
  const auto dots = text.find("..");
  if (dots == std::string::npos) {
    const int v = detail::parse_int_or_throw(text, 0);
    return {v, v};
  }
  return {detail::parse_int_or_throw(text.substr(0, dots), 0), detail::parse_int_or_throw(text.substr(dots + 2), 0)};
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  for (auto part : detail::split(text, ','))
    if (!detail::trim(part).empty()) out.emplace_back(detail::trim(part));
  return out;
}

// Options shared by fit and sweep.
struct FitOptions {
  int m = 1;
  int r = 1;
  std::string slots = "auto";
  int steps = 500;
  std::uint64_t seed = 1;
  double eps_theta = 0.2;
  double L0 = 1.0;
  double Lf = 1.0;
  std::string trials;
  double p_constant = 0.5;
  int fourier_k = 8;
  double ridge = 0.0;
  double stop_tol = 1e-6;
  int stop_window = 50;
  std::string trial_variable;
  std::string radial;
  double trial_period = 12.0;
  bool no_randomize = false;

  void add_to(CLI::App* app, bool with_orders) {
    if (with_orders) {
      app->add_option("--m", m, "Reduced dimension")->capture_default_str();
      app->add_option("--r", r, "Memory order")->capture_default_str();
    }
    app->add_option("--slots", slots, "Slot mode: auto, periodic:T or trend")->capture_default_str();
    app->add_option("--steps", steps, "Optimization steps (k_tot)")->capture_default_str();
    app->add_option("--seed", seed, "Random seed")->envname("PDC_SEED")->capture_default_str();
    app->add_option("--eps-theta", eps_theta, "Maximum rotation per step (rad)")->capture_default_str();
    app->add_option("--L0", L0, "Initial trial length scale")->capture_default_str();
    app->add_option("--Lf", Lf, "Final trial length scale")->capture_default_str();
    app->add_option("--trials", trials,
                    "Comma-separated trial kinds besides constant (default: periodic_sigmoid for periodic slots, "
                    "trend_sigmoid for trend)");
    app->add_option("--p-constant", p_constant, "Probability of a constant trial")->capture_default_str();
    app->add_option("--fourier-k", fourier_k, "Largest Fourier harmonic")->capture_default_str();
    app->add_option("--ridge", ridge, "Ridge added to the regression normal matrix")->capture_default_str();
    app->add_option("--stop-tol", stop_tol, "Relative cost decrease that counts as converged")->capture_default_str();
    app->add_option("--stop-window", stop_window, "Accepted steps over which stop-tol is measured")->capture_default_str();
    app->add_option("--trial-variable", trial_variable, "Exogenous track used as trial argument");
    app->add_option("--radial", radial, "Comma-separated exogenous tracks for radial trials");
    app->add_option("--trial-period", trial_period, "Period of periodic trials outside periodic slots")->capture_default_str();
    app->add_flag("--no-randomize", no_randomize, "Keep the basis fixed within each subspace between steps");
  }

  FitConfig config(const TimeSeries& series) const {
    FitConfig cfg;
    cfg.m = m;
    cfg.r = r;
    cfg.k_tot = steps;
    cfg.seed = seed;
    cfg.eps_theta = eps_theta;
    cfg.L0 = L0;
    cfg.Lf = Lf;
    cfg.ridge = ridge;
    cfg.stop_tol = stop_tol;
    cfg.stop_window = stop_window;
    cfg.trial_variable = trial_variable;
    cfg.radial_tracks = split_list(radial);
    cfg.trial_period = trial_period;
    cfg.randomize = !no_randomize;
    cfg.slots = parse_slots(slots, series.N()).indexer;
    std::vector<TrialKind> family;
    if (!trials.empty()) {
      for (const auto& name : split_list(trials)) family.push_back(trial_kind_from_string(name));
    } else if (cfg.slots.mode() == SlotIndexer::Mode::Periodic) {
      family = {TrialKind::PeriodicSigmoid};
    } else if (cfg.slots.mode() == SlotIndexer::Mode::PerStep) {
      family = {TrialKind::TrendSigmoid};
    }
    cfg.mix = TrialMix::with_constant(family.empty() ? 1.0 : p_constant, family);
    cfg.mix.fourier_max_k = fourier_k;
    return cfg;
  }
};

std::vector<std::string> channel_names(const CsvTable& header, int n) {
  std::vector<std::string> names = header.channels;
  for (int i = static_cast<int>(names.size()); i < n; ++i) names.push_back("z" + std::to_string(i + 1));
  return names;
}

/// Expands `--config FILE` into `--key=value` tokens placed right after the subcommand, ahead of the user's flags.
std::vector<std::string> expand_config(int argc, char** argv, const std::vector<std::string>& subcommands) {
  std::vector<std::string> args(argv, argv + argc);
  std::string path;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    else if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  if (path.empty()) return args;
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open config file '" + path + "'", 0);
  std::vector<std::string> injected;
  for (const CLI::ConfigItem& item : CLI::ConfigINI().from_config(in)) {
    if (item.name == "++" || item.name == "--" || item.inputs.empty()) continue;
    std::string value;
    for (std::size_t k = 0; k < item.inputs.size(); ++k) value += (k ? "," : "") + item.inputs[k];
    injected.push_back("--" + item.name + "=" + value);
  }
  auto sub = std::find_if(args.begin() + 1, args.end(),
                          [&](const std::string& a) { return std::find(subcommands.begin(), subcommands.end(), a) != subcommands.end(); });
  if (sub == args.end()) return args;
  args.insert(sub + 1, injected.begin(), injected.end());
  return args;
}

// ---------------------------------------------------------------------------

int run_generate(const std::string& scenario, int N, std::uint64_t seed, const std::string& out, const std::string& truth_out) {
  ScenarioSpec spec;
  spec.N = N;
  spec.seed = seed;
  if (scenario == "auto2d") spec.kind = Auto2D{};
  else if (scenario == "multi") spec.kind = published_multi_example();
  else if (scenario == "seasonal") spec.kind = Seasonal2D{};
  else if (scenario == "markov") spec.kind = Markov2D{};
  else throw ParseError("unknown scenario '" + scenario + "' (auto2d, multi, seasonal, markov)", 0);
  const Scenario sc = generate(spec);
  write_csv(out, sc.series);
  if (!truth_out.empty())
    write_model(truth_out, sc.truth, seed, {{"command", "generate"}, {"scenario", scenario}, {"c_star", format_number(sc.c_star)}});
  std::printf("c_star %s\n", format_number(sc.c_star).c_str());
  return 0;
}

int run_fit(const std::string& data, const FitOptions& opt, const std::string& out, const std::string& trace) {
  const TimeSeries series = ingest_csv(data);
  const FitConfig cfg = opt.config(series);
  const FitResult res = fit(series, cfg);
  const FitReport& rep = res.report;
  write_model(out, res.model, cfg.seed,
              {{"command", "fit"},
               {"slots", opt.slots},
               {"steps", std::to_string(rep.steps_taken)},
               {"converged", rep.converged ? "yes" : "no"},
               {"final_cost", format_number(rep.final_cost)}});
  if (!trace.empty()) {
    write_atomically(trace, [&](std::ostream& os) {
      os << "step,cost,accepted,kind,k,h,g,H,theta,fallback\n";
      os << "0," << format_number(rep.cost_trace.front()) << ",1,init,,,,,,\n";
      for (const StepRecord& s : rep.steps)
        os << s.step << ',' << format_number(s.cost) << ',' << s.accepted << ',' << to_string(s.kind) << ',' << s.k << ',' << s.h << ','
           << format_number(s.g) << ',' << format_number(s.H) << ',' << format_number(s.theta) << ',' << s.fallback << '\n';
    });
  }
  for (int s : rep.unvisited_slots) std::fprintf(stderr, "warning: slot %d has no data and kept its initial parameters\n", s);
  std::printf("final_cost %s\nsteps %d\n", format_number(rep.final_cost).c_str(), rep.steps_taken);
  return 0;
}

int run_predict(const std::string& model_path, const std::string& data, const std::string& out) {
  const LoadedModel lm = read_model(model_path);
  CsvTable header;
  const TimeSeries series = ingest_csv(data, &header);
  const PredictionReport rep = prediction_report(lm.model, series);
  const auto names = channel_names(header, series.n());
  write_atomically(out, [&](std::ostream& os) {
    os << "time";
    for (const auto& nm : names) os << ',' << nm << ',' << nm << "_pred";
    os << '\n';
    for (std::size_t c = 0; c < rep.index.size(); ++c) {
      os << format_number(series.times()[static_cast<std::size_t>(rep.index[c])]);
      for (int i = 0; i < series.n(); ++i)
        os << ',' << format_number(rep.z_actual(i, static_cast<Eigen::Index>(c))) << ','
           << format_number(rep.z_predicted(i, static_cast<Eigen::Index>(c)));
      os << '\n';
    }
  });
  std::printf("aggregate_mse %s\n", format_number(rep.aggregate_mse).c_str());
  return 0;
}

int run_evaluate(const std::string& model_path, const std::string& data, const std::string& truth_path, const std::string& out) {
  const LoadedModel lm = read_model(model_path);
  CsvTable header;
  const TimeSeries series = ingest_csv(data, &header);
  const Cost cost = evaluate_cost(lm.model, series);
  const PredictionReport rep = prediction_report(lm.model, series);
  const OptimalSigma sig = optimal_sigma(lm.model, series);
  std::vector<std::pair<std::string, std::string>> rows{
      {"normalized_cost", format_number(cost.normalized)},
      {"total_cost", format_number(cost.total)},
      {"terms", std::to_string(series.N() - lm.model.r())},
      {"optimal_sigma", format_number(sig.sigma)},
      {"isotropic_loglik", sig.degenerate ? "inf" : format_number(isotropic_loglik(lm.model, series, sig.sigma))}};
  const auto names = channel_names(header, series.n());
  for (int i = 0; i < series.n(); ++i) rows.emplace_back("rmse_" + names[static_cast<std::size_t>(i)], format_number(rep.channel_rmse(i)));
  for (int i = 0; i < lm.model.m(); ++i) rows.emplace_back("rmse_x" + std::to_string(i + 1), format_number(rep.x_rmse(i)));
  if (!truth_path.empty()) {
    const LoadedModel truth = read_model(truth_path);
    const SubspaceComparison cmp = compare_models(truth.model, lm.model);
    rows.emplace_back("e_Q", format_number(cmp.e_Q));
    rows.emplace_back("e_A", format_number(cmp.e_A));
    rows.emplace_back("truth_normalized_cost", format_number(evaluate_cost(truth.model, series).normalized));
  }
  write_atomically(out, [&](std::ostream& os) {
    os << "metric,value\n";
    for (const auto& [k, v] : rows) os << k << ',' << v << '\n';
  });
  std::printf("normalized_cost %s\n", format_number(cost.normalized).c_str());
  return 0;
}

int run_pca(const std::string& data, int m, const std::string& out) {
  CsvTable header;
  const TimeSeries series = ingest_csv(data, &header);
  const PcaResult p = principal_components(series);
  const int n = series.n();
  if (m < 1 || m > n) throw ContractViolation("--m must lie in 1..n");
  const auto names = channel_names(header, n);
  write_atomically(out, [&](std::ostream& os) {
    os << "component,singular_value,tail";
    for (const auto& nm : names) os << ',' << nm;
    os << '\n';
    for (int k = 0; k < m; ++k) {
      os << k + 1 << ',' << format_number(p.singular_values(k)) << ',' << format_number(spectrum_tail(p, k + 1, series.N()));
      for (int i = 0; i < n; ++i) os << ',' << format_number(p.basis(i, k));
      os << '\n';
    }
  });
  std::printf("tail_%d %s\n", m, format_number(spectrum_tail(p, m, series.N())).c_str());
  return 0;
}

int run_sweep(const std::string& data, const std::string& m_text, const std::string& r_text, const FitOptions& opt, unsigned threads,
              const std::string& out) {
  const TimeSeries series = ingest_csv(data);
  const auto rows = sweep_orders(series, parse_range(m_text), parse_range(r_text), opt.config(series), threads);
  write_atomically(out, [&](std::ostream& os) {
    os << "m,r,seed,final_cost,tail,steps,error\n";
    for (const auto& row : rows) {
      std::string err = row.error;
      for (char& c : err)
        if (c == ',' || c == '\n') c = ';';
      os << row.m << ',' << row.r << ',' << row.seed << ',' << format_number(row.final_cost) << ',' << format_number(row.tail) << ','
         << row.steps << ',' << err << '\n';
    }
  });
  int failed = 0;
  for (const auto& row : rows) failed += !row.error.empty();
  if (failed) std::fprintf(stderr, "warning: %d of %zu fits failed (see error column)\n", failed, rows.size());
  return 0;
}

int run_anomaly(const std::string& data, const std::string& channels, int window, int period, const std::string& out) {
  const TimeSeries series = ingest_csv(data);
  std::vector<int> ids;
  if (channels.empty()) ids.assign(kEnsoChannels.begin(), kEnsoChannels.end());
  else
    for (const auto& c : split_list(channels)) ids.push_back(detail::parse_int_or_throw(c, 0));
  const auto idx = anomaly_index(series, ids, window, period);
  write_atomically(out, [&](std::ostream& os) {
    os << "time,index\n";
    for (std::size_t i = 0; i < idx.size(); ++i)
      os << format_number(series.times()[i + static_cast<std::size_t>(window / 2)]) << ',' << format_number(idx[i]) << '\n';
  });
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Principal dynamical components: fit reduced linear predictive models to multichannel time series"};
  app.name("pdc");
  app.require_subcommand(1);
  app.set_version_flag("--version", "pdc 1.0");
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  std::string config_path;
  const char* config_help = "key=value file supplying any flag of the subcommand; command-line flags win";

  std::uint64_t seed = 1;
  std::string out, truth, trace, data, model_path;

  auto* gen = app.add_subcommand("generate", "Simulate a synthetic scenario to CSV");
  std::string scenario = "auto2d";
  int N = 1000;
  gen->add_option("--config", config_path, config_help);
  gen->add_option("--scenario", scenario, "auto2d, multi, seasonal or markov")->capture_default_str();
  gen->add_option("--N", N, "Number of snapshots")->capture_default_str();
  gen->add_option("--seed", seed, "Random seed")->envname("PDC_SEED")->capture_default_str();
  gen->add_option("-o,--output", out, "Dataset CSV to write")->required();
  gen->add_option("--truth", truth, "Also write the generating model here");

  FitOptions fit_opt;
  auto* fitc = app.add_subcommand("fit", "Fit a reduced model and write it as a model file");
  fitc->add_option("--config", config_path, config_help);
  fitc->add_option("data", data, "Dataset CSV")->required();
  fit_opt.add_to(fitc, true);
  fitc->add_option("-o,--output", out, "Model file to write")->required();
  fitc->add_option("--trace", trace, "Per-step cost trace CSV");

  auto* pred = app.add_subcommand("predict", "One-step predictions of a fitted model");
  pred->add_option("--config", config_path, config_help);
  pred->add_option("model", model_path, "Model file")->required();
  pred->add_option("data", data, "Dataset CSV")->required();
  pred->add_option("-o,--output", out, "Prediction CSV to write")->required();

  auto* eval = app.add_subcommand("evaluate", "Cost, likelihood and error report of a model on data");
  eval->add_option("--config", config_path, config_help);
  eval->add_option("model", model_path, "Model file")->required();
  eval->add_option("data", data, "Dataset CSV")->required();
  eval->add_option("--truth", truth, "Generating model to compare against");
  eval->add_option("-o,--output", out, "Report CSV to write")->required();

  auto* pca = app.add_subcommand("pca", "Principal components and reconstruction tails");
  int pca_m = 1;
  pca->add_option("--config", config_path, config_help);
  pca->add_option("data", data, "Dataset CSV")->required();
  pca->add_option("--m", pca_m, "Number of components to list")->capture_default_str();
  pca->add_option("-o,--output", out, "CSV to write")->required();

  auto* sweep = app.add_subcommand("sweep", "Fit every (m, r) in a grid");
  FitOptions sweep_opt;
  std::string m_range = "1..2", r_range = "1..2";
  unsigned threads = 1;
  sweep->add_option("--config", config_path, config_help);
  sweep->add_option("data", data, "Dataset CSV")->required();
  sweep->add_option("--m", m_range, "Dimension range lo..hi")->capture_default_str();
  sweep->add_option("--r", r_range, "Order range lo..hi")->capture_default_str();
  sweep->add_option("--threads", threads, "Parallel fits")->capture_default_str();
  sweep_opt.add_to(sweep, false);
  sweep->add_option("-o,--output", out, "Sweep CSV to write")->required();

  auto* anom = app.add_subcommand("anomaly", "Climatology-removed, channel-averaged, smoothed anomaly index");
  std::string channels;
  int window = 3, period = 12;
  anom->add_option("--config", config_path, config_help);
  anom->add_option("data", data, "Dataset CSV")->required();
  anom->add_option("--channels", channels, "Comma-separated 1-based channel ids (default: the 10-point equatorial set)");
  anom->add_option("--window", window, "Odd running-mean length")->capture_default_str();
  anom->add_option("--period", period, "Climatology period")->capture_default_str();
  anom->add_option("-o,--output", out, "CSV to write")->required();

  try {
    std::vector<std::string> names;
    for (const CLI::App* sub : app.get_subcommands({})) names.push_back(sub->get_name());
    std::vector<std::string> args = expand_config(argc, argv, names);
    args.erase(args.begin());
    std::reverse(args.begin(), args.end());
    app.parse(std::move(args));
  } catch (const ParseError& e) {
    std::fprintf(stderr, "parse error: %s\n", e.what());
    return kExitParse;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitParse;
  }

  try {
    if (gen->parsed()) return run_generate(scenario, N, seed, out, truth);
    if (fitc->parsed()) return run_fit(data, fit_opt, out, trace);
    if (pred->parsed()) return run_predict(model_path, data, out);
    if (eval->parsed()) return run_evaluate(model_path, data, truth, out);
    if (pca->parsed()) return run_pca(data, pca_m, out);
    if (sweep->parsed()) return run_sweep(data, m_range, r_range, sweep_opt, threads, out);
    if (anom->parsed()) return run_anomaly(data, channels, window, period, out);
  } catch (const ParseError& e) {
    std::fprintf(stderr, "parse error: %s\n", e.what());
    return kExitParse;
  } catch (const ContractViolation& e) {
    std::fprintf(stderr, "invalid input: %s\n", e.what());
    return kExitParse;
  } catch (const FitFailure& e) {
    std::fprintf(stderr, "fit failed: %s\n", e.what());
    return kExitFit;
  } catch (const IllConditioned& e) {
    std::fprintf(stderr, "fit failed: %s\n", e.what());
    return kExitFit;
  } catch (const InsufficientData& e) {
    std::fprintf(stderr, "fit failed: %s\n", e.what());
    return kExitFit;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
