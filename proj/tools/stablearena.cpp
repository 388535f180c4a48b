// stablearena: command-line front end for the rating library.
//
// Every subcommand that writes files also writes manifest.json into its
// output directory with the full option set, the seed and the SHA-256 of
// every input and output file.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "CLI11.hpp"
#include "stablearena/amelo.hpp"
#include "stablearena/arena.hpp"
#include "stablearena/classic.hpp"
#include "stablearena/core.hpp"
#include "stablearena/experiment.hpp"
#include "stablearena/io.hpp"
#include "stablearena/melo.hpp"
#include "stablearena/metrics.hpp"
#include "stablearena/perturb.hpp"
#include "stablearena/report.hpp"
#include "stablearena/synthetic.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace stablearena;

namespace {

constexpr const char* kVersion = "0.1.0";

enum ExitCode { kOk = 0, kFailure = 1, kInvalidData = 3, kRoundSkipped = 4 };

using report::format_number;
using report::csv_field;

// Collects the run description and writes manifest.json last.
class Manifest {
 public:
  Manifest(std::string command, fs::path out_dir) : command_(std::move(command)), dir_(std::move(out_dir)) {}

  void record_options(const CLI::App& app) {
    for (const CLI::Option* opt : app.get_options()) {
      const std::string name = opt->get_single_name();
      if (name == "help" || name.empty()) continue;
      if (opt->get_expected_max() == 0) {
        config_[name] = opt->count() > 0;
      } else if (opt->count() > 0) {
        const auto& res = opt->results();
        config_[name] = res.size() == 1 ? json(res.front()) : json(res);
      } else {
        config_[name] = opt->get_default_str();
      }
    }
  }

  void set(const std::string& key, json value) { extra_[key] = std::move(value); }

  void input(const fs::path& path) {
    inputs_.push_back({{"path", path.string()}, {"sha256", io::sha256_file(path)}});
  }

  // Writes `content` under the output directory and records its digest.
  fs::path write(const std::string& name, const std::string& content) {
    fs::create_directories(dir_);
    const fs::path path = dir_ / name;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    out << content;
    out.close();
    outputs_.push_back({{"path", name}, {"sha256", io::sha256_hex(content)}});
    return path;
  }

  void finish() {
    json doc{{"tool", "stablearena"},     {"version", kVersion}, {"command", command_},
             {"config", config_},         {"inputs", inputs_},   {"outputs", outputs_}};
    for (auto& [k, v] : extra_.items()) doc[k] = v;
    fs::create_directories(dir_);
    std::ofstream out(dir_ / "manifest.json", std::ios::binary);
    out << doc.dump(2) << '\n';
  }

 private:
  std::string command_;
  fs::path dir_;
  json config_ = json::object();
  json extra_ = json::object();
  json inputs_ = json::array();
  json outputs_ = json::array();
};

struct OptimArgs {
  double lr = 0.1;
  std::size_t epochs = 2000;
  double grad_tol = 1e-8;
  double ridge = 0.0;

  OptimConfig config() const { return {lr, epochs, grad_tol, ridge}; }
};

void add_optim(CLI::App* app, OptimArgs& a) {
  app->add_option("--lr", a.lr, "Learning rate")->capture_default_str();
  app->add_option("--epochs", a.epochs, "Maximum number of epochs")->capture_default_str();
  app->add_option("--grad-tol", a.grad_tol, "Stop once the gradient max-norm falls below this")
      ->capture_default_str();
  app->add_option("--ridge", a.ridge, "L2 penalty on ratings (keeps separable data finite)")
      ->capture_default_str();
}

struct SynthArgs {
  std::size_t models = 20;
  std::size_t annotators = 40;
  std::size_t records = 100;
  std::size_t per_pair = 0;
  double gap = 0.5;
  double tie_rate = 0.0;

  synthetic::SyntheticConfig config(std::uint64_t seed) const {
    synthetic::SyntheticConfig c;
    c.n_models = models;
    c.n_annotators = annotators;
    c.records_per_annotator = records;
    c.records_per_pair = per_pair;
    c.rating_gap = gap;
    c.tie_rate = tie_rate;
    c.seed = seed;
    return c;
  }
};

void add_synth(CLI::App* app, SynthArgs& a) {
  app->add_option("--models", a.models, "Synthetic: number of models")->capture_default_str();
  app->add_option("--annotators", a.annotators, "Synthetic: number of annotators")->capture_default_str();
  app->add_option("--records", a.records, "Synthetic: records per annotator")->capture_default_str();
  app->add_option("--per-pair", a.per_pair, "Synthetic: round-robin records per model pair (overrides --records)")
      ->capture_default_str();
  app->add_option("--gap", a.gap, "Synthetic: true rating spacing, natural units")->capture_default_str();
  app->add_option("--tie-rate", a.tie_rate, "Synthetic: probability of a tie")->capture_default_str();
}

// Parses a vote log; rejected lines go to stderr.
Dataset load_records(const fs::path& path, Manifest* manifest, std::size_t* rejected = nullptr) {
  auto parsed = io::parse_records(path);
  for (const auto& e : parsed.errors) {
    std::cerr << path.string() << ':' << e.line << ": " << e.message << '\n';
  }
  if (rejected) *rejected = parsed.errors.size();
  if (manifest) {
    manifest->input(path);
    manifest->set("rejected_lines", parsed.errors.size());
  }
  return std::move(parsed.dataset);
}

std::string leaderboard_csv(const std::vector<report::LeaderboardRow>& rows) {
  std::ostringstream ss;
  report::write_leaderboard_csv(rows, ss);
  return ss.str();
}

std::string abilities_csv(const std::vector<report::AbilityRow>& rows) {
  std::ostringstream ss;
  report::write_ability_csv(rows, ss);
  return ss.str();
}

std::string trace_csv(const std::vector<double>& values, const char* column) {
  std::ostringstream ss;
  ss << "epoch," << column << '\n';
  for (std::size_t i = 0; i < values.size(); ++i) ss << i + 1 << ',' << format_number(values[i]) << '\n';
  return ss.str();
}

json issues_json(const std::vector<ValidationIssue>& issues) {
  json arr = json::array();
  for (const auto& i : issues) {
    json j{{"message", i.message}};
    if (i.record) j["record"] = *i.record;
    arr.push_back(std::move(j));
  }
  return arr;
}

std::vector<experiment::Method> parse_methods(const std::string& s) {
  if (s == "all") return {experiment::Method::Elo, experiment::Method::MElo, experiment::Method::AmElo};
  return {experiment::parse_method(s)};
}

std::vector<perturb::Strategy> parse_strategies(const std::string& s) {
  if (s == "all") {
    return {perturb::Strategy::Random, perturb::Strategy::Equal, perturb::Strategy::Flip,
            perturb::Strategy::Mixed};
  }
  return {perturb::parse_strategy(s)};
}

std::vector<std::uint64_t> seed_range(std::uint64_t base, std::size_t count) {
  std::vector<std::uint64_t> out;
  for (std::size_t i = 0; i < count; ++i) out.push_back(base + i);
  return out;
}

std::set<AnnotatorId> read_id_list(const fs::path& path) {
  std::istringstream in(io::read_file(path));
  std::set<AnnotatorId> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) out.insert(AnnotatorId(line));
  }
  return out;
}

arena::ArenaState read_state(const fs::path& path, bool create) {
  if (!fs::exists(path)) {
    if (create) return {};
    throw InvalidArgument("state file '" + path.string() + "' does not exist (use --create)");
  }
  return arena::load_state(io::read_file(path));
}

void write_state(const fs::path& path, const arena::ArenaState& state) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw Error("cannot write '" + tmp.string() + "'");
    out << arena::save_state(state);
  }
  fs::rename(tmp, path);
}

json state_summary(const arena::ArenaState& s) {
  json banned = json::array();
  for (const auto& [id, ban] : s.banned) {
    banned.push_back({{"annotator", id.str()}, {"reason", ban.reason}, {"round", ban.round}, {"theta", ban.theta}});
  }
  return {{"round", s.round},
          {"records", s.accumulated.size()},
          {"models", s.accumulated.n_models()},
          {"annotators", s.accumulated.n_annotators()},
          {"dropped_total", s.dropped_total},
          {"banned", banned},
          {"has_fit", s.latest.has_value()}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pairwise-comparison rating engine: Elo, m-ELO and am-ELO", "stablearena"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  std::string out_dir = ".";
  std::uint64_t seed = 0;
  OptimArgs optim;
  SynthArgs synth;
  fs::path input;

  // validate
  auto* cmd_validate = app.add_subcommand("validate", "Check a vote log and report problems");
  cmd_validate->add_option("input", input, "JSON Lines vote log")->required()->check(CLI::ExistingFile);
  std::size_t validate_delta = 0;
  cmd_validate->add_option("--delta", validate_delta, "Also report the subset after the minimum-records filter")
      ->capture_default_str();

  // fit
  auto* cmd_fit = app.add_subcommand("fit", "Fit ratings and write a leaderboard");
  std::string fit_method = "amelo";
  std::string solver = "gd";
  std::size_t fit_delta = 0;
  std::size_t shuffles = 1000;
  bool no_norm = false;
  double fit_epsilon = 0.0;
  cmd_fit->add_option("input", input, "JSON Lines vote log")->required()->check(CLI::ExistingFile);
  cmd_fit->add_option("--method", fit_method, "elo, melo or amelo")->capture_default_str();
  cmd_fit->add_option("--solver", solver, "m-ELO solver: gd or newton")->capture_default_str();
  cmd_fit->add_option("--delta", fit_delta, "Drop annotators with fewer records")->capture_default_str();
  cmd_fit->add_option("--epsilon", fit_epsilon, "am-ELO: flag annotators with ability below this")
      ->capture_default_str();
  cmd_fit->add_option("--shuffles", shuffles, "Elo: number of shuffled passes")->capture_default_str();
  cmd_fit->add_option("--seed", seed, "Elo shuffle seed")->capture_default_str();
  cmd_fit->add_flag("--no-norm", no_norm, "am-ELO without ability normalization (diagnostic)");
  cmd_fit->add_option("--out-dir", out_dir, "Output directory")->capture_default_str();
  add_optim(cmd_fit, optim);

  // predict
  auto* cmd_predict = app.add_subcommand("predict", "Score held-out predictions (MSE, AUC)");
  std::string predict_method = "all";
  fs::path test_path;
  std::size_t splits = 10;
  double train_frac = 0.8;
  std::size_t predict_delta = 0;
  cmd_predict->add_option("input", input, "Training vote log, or the full log for random splits")
      ->required()
      ->check(CLI::ExistingFile);
  cmd_predict->add_option("--test", test_path, "Test vote log; without it, seeded random splits are used")
      ->check(CLI::ExistingFile);
  cmd_predict->add_option("--method", predict_method, "elo, melo, amelo or all")->capture_default_str();
  cmd_predict->add_option("--splits", splits, "Number of random splits")->capture_default_str();
  cmd_predict->add_option("--train-frac", train_frac, "Training fraction per split")->capture_default_str();
  cmd_predict->add_option("--delta", predict_delta, "Drop annotators with fewer records before splitting")
      ->capture_default_str();
  cmd_predict->add_option("--shuffles", shuffles, "Elo: number of shuffled passes")->capture_default_str();
  cmd_predict->add_option("--seed", seed, "Split and shuffle seed")->capture_default_str();
  cmd_predict->add_option("--out-dir", out_dir, "Output directory")->capture_default_str();
  add_optim(cmd_predict, optim);

  // simulate
  auto* cmd_sim = app.add_subcommand("simulate", "Perturbation sweep: ranking consistency and detection F1");
  fs::path sim_input;
  std::string strategy = "all";
  std::vector<double> ratios;
  std::size_t n_seeds = 1;
  cmd_sim->add_option("--input", sim_input, "Vote log to perturb (default: a synthetic arena)")
      ->check(CLI::ExistingFile);
  cmd_sim->add_option("--strategy", strategy, "random, equal, flip, mixed or all")->capture_default_str();
  cmd_sim->add_option("--ratio", ratios, "Perturbation ratios (default 0.05 to 0.50 in steps of 0.05)");
  cmd_sim->add_option("--seeds", n_seeds, "Seeds per cell, counting up from --seed")->capture_default_str();
  cmd_sim->add_option("--seed", seed, "Base seed")->capture_default_str();
  cmd_sim->add_option("--shuffles", shuffles, "Elo: number of shuffled passes")->capture_default_str();
  cmd_sim->add_option("--out-dir", out_dir, "Output directory")->capture_default_str();
  add_optim(cmd_sim, optim);
  add_synth(cmd_sim, synth);

  // detect
  auto* cmd_detect = app.add_subcommand("detect", "Fit am-ELO and flag low-ability annotators");
  std::size_t detect_delta = 50;
  double epsilon = 0.0;
  fs::path truth_path;
  cmd_detect->add_option("input", input, "JSON Lines vote log")->required()->check(CLI::ExistingFile);
  cmd_detect->add_option("--delta", detect_delta, "Drop annotators with fewer records")->capture_default_str();
  cmd_detect->add_option("--epsilon", epsilon, "Ability threshold")->capture_default_str();
  cmd_detect->add_option("--truth", truth_path, "File of known anomalous annotator ids, one per line")
      ->check(CLI::ExistingFile);
  cmd_detect->add_option("--out-dir", out_dir, "Output directory")->capture_default_str();
  add_optim(cmd_detect, optim);

  // arena
  auto* cmd_arena = app.add_subcommand("arena", "Stable Arena state machine");
  cmd_arena->require_subcommand(1);
  fs::path state_path;
  auto* arena_ingest = cmd_arena->add_subcommand("ingest", "Append a batch of votes");
  fs::path batch_path;
  bool create = false;
  arena_ingest->add_option("--state", state_path, "State file")->required();
  arena_ingest->add_option("batch", batch_path, "JSON Lines batch")->required()->check(CLI::ExistingFile);
  arena_ingest->add_flag("--create", create, "Start a fresh state when the file does not exist");

  auto* arena_eval = cmd_arena->add_subcommand("evaluate", "Fit am-ELO on eligible records and apply bans");
  std::size_t arena_delta = 50;
  double arena_epsilon = 0.0;
  bool warn_only = false;
  bool cold = false;
  arena_eval->add_option("--state", state_path, "State file")->required()->check(CLI::ExistingFile);
  arena_eval->add_option("--delta", arena_delta, "Minimum records for eligibility")->capture_default_str();
  arena_eval->add_option("--epsilon", arena_epsilon, "Ability threshold for bans")->capture_default_str();
  arena_eval->add_flag("--warn-only", warn_only, "Flag low-ability annotators without banning");
  arena_eval->add_flag("--cold", cold, "Do not warm-start from the previous fit");
  arena_eval->add_option("--out-dir", out_dir, "Output directory")->capture_default_str();
  add_optim(arena_eval, optim);

  auto* arena_unban = cmd_arena->add_subcommand("unban", "Lift a ban");
  std::string unban_id;
  arena_unban->add_option("--state", state_path, "State file")->required()->check(CLI::ExistingFile);
  arena_unban->add_option("annotator", unban_id, "Annotator id")->required();

  auto* arena_status = cmd_arena->add_subcommand("status", "Print a summary of the state");
  arena_status->add_option("--state", state_path, "State file")->required()->check(CLI::ExistingFile);

  // consistency
  auto* cmd_cons = app.add_subcommand("consistency", "Multi-init am-ELO ranking consistency per epoch");
  fs::path cons_input;
  std::size_t runs = 5;
  cmd_cons->add_option("--input", cons_input, "Vote log (default: a synthetic round-robin arena)")
      ->check(CLI::ExistingFile);
  cmd_cons->add_option("--runs", runs, "Number of random initializations")->capture_default_str();
  cmd_cons->add_option("--seed", seed, "Seed of the first run; later runs count up")->capture_default_str();
  cmd_cons->add_flag("--no-norm", no_norm, "Disable ability normalization");
  cmd_cons->add_option("--out-dir", out_dir, "Output directory")->capture_default_str();
  add_optim(cmd_cons, optim);
  SynthArgs cons_synth;
  cons_synth.models = 10;
  cons_synth.annotators = 5;
  cons_synth.per_pair = 50;
  add_synth(cmd_cons, cons_synth);

  // winmatrix
  auto* cmd_win = app.add_subcommand("winmatrix", "Pairwise win and tie counts");
  cmd_win->add_option("input", input, "JSON Lines vote log")->required()->check(CLI::ExistingFile);
  cmd_win->add_option("--out-dir", out_dir, "Output directory")->capture_default_str();

  // synth
  auto* cmd_synth = app.add_subcommand("synth", "Write a synthetic vote log");
  fs::path synth_out = "synthetic.jsonl";
  cmd_synth->add_option("--seed", seed, "Seed")->capture_default_str();
  cmd_synth->add_option("--out", synth_out, "Output vote log")->capture_default_str();
  add_synth(cmd_synth, synth);

  // perturb
  auto* cmd_perturb = app.add_subcommand("perturb", "Corrupt a share of annotators in a vote log");
  double ratio = 0.2;
  fs::path perturb_out = "perturbed.jsonl";
  cmd_perturb->add_option("input", input, "JSON Lines vote log")->required()->check(CLI::ExistingFile);
  cmd_perturb->add_option("--strategy", strategy, "random, equal, flip or mixed")->required();
  cmd_perturb->add_option("--ratio", ratio, "Share of annotators to corrupt")->capture_default_str();
  cmd_perturb->add_option("--seed", seed, "Seed")->capture_default_str();
  cmd_perturb->add_option("--out", perturb_out, "Output vote log; targets go to <out>.truth")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*cmd_validate) {
      std::size_t rejected = 0;
      const Dataset data = load_records(input, nullptr, &rejected);
      const auto rep = validate(data);
      json out{{"records", data.size()},
               {"models", data.n_models()},
               {"annotators", data.n_annotators()},
               {"rejected_lines", rejected},
               {"components", rep.components},
               {"mle_exists", rep.ok() && data.n_models() >= 2 ? json(mle_exists(data)) : json(nullptr)},
               {"errors", issues_json(rep.errors)},
               {"warnings", issues_json(rep.warnings)}};
      if (validate_delta > 0) {
        const auto kept = filter_min_records(data, validate_delta);
        out["filtered"] = {{"delta", validate_delta},
                           {"records", kept.size()},
                           {"models", kept.n_models()},
                           {"annotators", kept.n_annotators()}};
      }
      std::cout << out.dump(2) << '\n';
      return rep.ok() && rejected == 0 ? kOk : kInvalidData;
    }

    if (*cmd_fit) {
      Manifest manifest("fit", out_dir);
      manifest.record_options(*cmd_fit);
      Dataset data = load_records(input, &manifest);
      if (fit_delta > 0) data = filter_min_records(data, fit_delta);
      const auto method = experiment::parse_method(fit_method);
      std::vector<std::string> warnings;
      switch (method) {
        case experiment::Method::Elo: {
          classic::ClassicConfig cc;
          const auto summary = classic::shuffled_mean(data, cc, shuffles, seed);
          RatingVector natural = summary.mean;
          for (auto& v : natural.values) v = cc.scale.value() * (v - cc.r_init);
          manifest.write("leaderboard.csv", leaderboard_csv(report::leaderboard(natural, data)));
          manifest.write("leaderboard.json",
                         report::leaderboard_json(report::leaderboard(natural, data)).dump(2) + "\n");
          std::ostringstream ss;
          ss << "model,mean,std,min,max\n";
          for (std::size_t i = 0; i < summary.mean.size(); ++i) {
            ss << csv_field(summary.mean.models[i].str()) << ',' << format_number(summary.mean.values[i]) << ','
               << format_number(summary.std[i]) << ',' << format_number(summary.min[i]) << ','
               << format_number(summary.max[i]) << '\n';
          }
          manifest.write("elo_shuffles.csv", ss.str());
          break;
        }
        case experiment::Method::MElo: {
          const auto fit = solver == "newton"  ? melo::fit_newton(data, optim.config())
                           : solver == "gd"    ? melo::fit_gd(data, optim.config())
                                               : throw InvalidArgument("unknown solver '" + solver + "'");
          const auto rows = report::leaderboard(fit.ratings, data);
          manifest.write("leaderboard.csv", leaderboard_csv(rows));
          manifest.write("leaderboard.json", report::leaderboard_json(rows).dump(2) + "\n");
          manifest.write("loss.csv", trace_csv(fit.loss_trace, "loss"));
          manifest.set("converged", fit.converged);
          manifest.set("grad_norm", fit.grad_norm);
          warnings = fit.warnings;
          break;
        }
        case experiment::Method::AmElo: {
          amelo::JointOptions options;
          options.normalize = !no_norm;
          const auto fit = amelo::fit_joint(data, optim.config(), options);
          const auto rows = report::leaderboard(fit.scaled_ratings(), data);
          manifest.write("leaderboard.csv", leaderboard_csv(rows));
          manifest.write("leaderboard.json", report::leaderboard_json(rows).dump(2) + "\n");
          manifest.write("loss.csv", trace_csv(fit.loss_trace, "loss"));
          manifest.write("abilities.csv", abilities_csv(report::ability_report(fit.abilities, data, fit_epsilon)));
          manifest.set("converged", fit.converged);
          manifest.set("grad_norm", fit.grad_norm);
          warnings = fit.warnings;
          break;
        }
      }
      for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
      manifest.set("warnings", warnings);
      manifest.finish();
      return kOk;
    }

    if (*cmd_predict) {
      Manifest manifest("predict", out_dir);
      manifest.record_options(*cmd_predict);
      Dataset data = load_records(input, &manifest);
      if (predict_delta > 0) data = filter_min_records(data, predict_delta);
      experiment::MethodConfig mc;
      mc.optim = optim.config();
      mc.shuffles = shuffles;
      mc.seed = seed;
      const auto methods = parse_methods(predict_method);
      json summary = json::array();
      if (!test_path.empty()) {
        Dataset test = load_records(test_path, nullptr);
        manifest.input(test_path);
        std::vector<double> outcomes;
        for (const auto& r : test.records()) outcomes.push_back(r.outcome.value());
        std::ostringstream ss;
        ss << "index,first,second,annotator,outcome";
        for (auto m : methods) ss << ',' << experiment::to_string(m);
        ss << '\n';
        std::vector<std::vector<double>> preds;
        for (auto m : methods) {
          const auto fit = experiment::fit_method(m, data, mc);
          preds.push_back(experiment::predict(fit, test));
          json row{{"method", experiment::to_string(m)}, {"mse", metrics::mse(preds.back(), outcomes)}};
          try {
            row["auc"] = metrics::auc(preds.back(), outcomes);
          } catch (const UndefinedAuc&) {
            row["auc"] = nullptr;
          }
          summary.push_back(row);
        }
        for (std::size_t i = 0; i < test.size(); ++i) {
          const auto& r = test.records()[i];
          ss << i << ',' << csv_field(r.first.str()) << ',' << csv_field(r.second.str()) << ','
             << csv_field(r.annotator.str()) << ',' << format_number(r.outcome.value());
          for (const auto& p : preds) ss << ',' << format_number(p[i]);
          ss << '\n';
        }
        manifest.write("predictions.csv", ss.str());
      } else {
        const auto results = experiment::holdout_evaluation(data, methods, mc, splits, train_frac, seed);
        std::ostringstream ss;
        ss << "method,split,mse,auc\n";
        for (const auto& r : results) {
          for (std::size_t s = 0; s < r.mse.size(); ++s) {
            ss << experiment::to_string(r.method) << ',' << s << ',' << format_number(r.mse[s]) << ','
               << format_number(r.auc[s]) << '\n';
          }
          summary.push_back({{"method", experiment::to_string(r.method)},
                             {"mse_mean", r.mse_mean},
                             {"mse_std", r.mse_std},
                             {"auc_mean", r.auc_mean},
                             {"auc_std", r.auc_std}});
        }
        manifest.write("holdout.csv", ss.str());
      }
      manifest.write("metrics.json", summary.dump(2) + "\n");
      std::cout << summary.dump(2) << '\n';
      manifest.finish();
      return kOk;
    }

    if (*cmd_sim) {
      Manifest manifest("simulate", out_dir);
      manifest.record_options(*cmd_sim);
      Dataset data;
      if (!sim_input.empty()) {
        data = load_records(sim_input, &manifest);
      } else {
        data = synthetic::make_arena(synth.config(seed)).dataset;
      }
      experiment::SweepConfig sweep;
      sweep.strategies = parse_strategies(strategy);
      sweep.ratios = ratios;
      sweep.seeds = seed_range(seed, n_seeds);
      experiment::MethodConfig mc;
      mc.optim = optim.config();
      mc.shuffles = shuffles;
      mc.seed = seed;
      const auto cells = experiment::perturbation_sweep(data, sweep, mc);

      std::ostringstream cons, f1;
      cons << "strategy,ratio,seed";
      for (auto m : sweep.methods) cons << ',' << experiment::to_string(m);
      cons << '\n';
      f1 << "strategy,ratio,seed,f1_eps_0,f1_eps_0.005\n";
      for (const auto& c : cells) {
        cons << perturb::to_string(c.strategy) << ',' << format_number(c.ratio) << ',' << c.seed;
        for (double v : c.consistency) cons << ',' << format_number(v);
        cons << '\n';
        f1 << perturb::to_string(c.strategy) << ',' << format_number(c.ratio) << ',' << c.seed << ','
           << format_number(c.f1_eps0.value_or(NAN)) << ',' << format_number(c.f1_eps005.value_or(NAN)) << '\n';
      }
      manifest.write("consistency.csv", cons.str());
      manifest.write("f1.csv", f1.str());
      manifest.finish();
      return kOk;
    }

    if (*cmd_detect) {
      Manifest manifest("detect", out_dir);
      manifest.record_options(*cmd_detect);
      Dataset data = filter_min_records(load_records(input, &manifest), detect_delta);
      const auto fit = amelo::fit_joint(data, optim.config());
      const auto rows = report::ability_report(fit.abilities, data, epsilon);
      manifest.write("abilities.csv", abilities_csv(rows));
      json flagged = json::array();
      for (const auto& r : rows) {
        if (r.flagged) flagged.push_back(r.annotator.str());
      }
      json out{{"epsilon", epsilon}, {"annotators", rows.size()}, {"flagged", flagged}};
      if (!truth_path.empty()) {
        manifest.input(truth_path);
        std::set<AnnotatorId> truth;
        for (const auto& id : read_id_list(truth_path)) {
          if (data.annotator_index(id)) truth.insert(id);
        }
        const auto d = metrics::detect(fit.abilities, truth, epsilon);
        out["precision"] = d.precision;
        out["recall"] = d.recall;
        out["f1"] = d.f1;
      }
      manifest.write("detection.json", out.dump(2) + "\n");
      std::cout << out.dump(2) << '\n';
      manifest.finish();
      return kOk;
    }

    if (*cmd_arena) {
      if (*arena_ingest) {
        auto state = read_state(state_path, create);
        std::size_t rejected_lines = 0;
        const Dataset batch = load_records(batch_path, nullptr, &rejected_lines);
        auto result = arena::ingest(state, batch.records());
        write_state(state_path, result.state);
        json rejected = json::array();
        for (const auto& r : result.report.rejected) rejected.push_back({{"index", r.index}, {"reason", r.reason}});
        json out{{"round", result.state.round},
                 {"accepted", result.report.accepted},
                 {"dropped_banned", result.report.dropped_banned},
                 {"rejected_lines", rejected_lines},
                 {"rejected", rejected},
                 {"batch_sha256", io::sha256_file(batch_path)}};
        std::cout << out.dump(2) << '\n';
        return kOk;
      }
      if (*arena_eval) {
        Manifest manifest("arena evaluate", out_dir);
        manifest.record_options(*arena_eval);
        manifest.input(state_path);
        const auto state = read_state(state_path, false);
        arena::ArenaConfig cfg;
        cfg.delta = arena_delta;
        cfg.epsilon = arena_epsilon;
        cfg.optim = optim.config();
        cfg.warn_only = warn_only;
        cfg.warm_start = !cold;
        auto result = arena::evaluate_round(state, cfg);
        write_state(state_path, result.state);
        manifest.write("leaderboard.csv", leaderboard_csv(result.leaderboard));
        manifest.write("leaderboard.json", report::leaderboard_json(result.leaderboard).dump(2) + "\n");
        manifest.write("abilities.csv", abilities_csv(result.abilities));
        json banned = json::array();
        for (const auto& id : result.newly_banned) banned.push_back(id.str());
        json flagged = json::array();
        for (const auto& r : result.abilities) {
          if (r.flagged) flagged.push_back(r.annotator.str());
        }
        json out{{"round", result.state.round},
                 {"eligible_records", result.eligible_records},
                 {"newly_banned", banned},
                 {"flagged", flagged},
                 {"converged", result.state.latest->converged}};
        manifest.write("round.json", out.dump(2) + "\n");
        std::cout << out.dump(2) << '\n';
        manifest.finish();
        return kOk;
      }
      if (*arena_unban) {
        auto state = arena::unban(read_state(state_path, false), AnnotatorId(unban_id));
        write_state(state_path, state);
        std::cout << state_summary(state).dump(2) << '\n';
        return kOk;
      }
      if (*arena_status) {
        std::cout << state_summary(read_state(state_path, false)).dump(2) << '\n';
        return kOk;
      }
    }

    if (*cmd_cons) {
      Manifest manifest("consistency", out_dir);
      manifest.record_options(*cmd_cons);
      Dataset data;
      if (!cons_input.empty()) {
        data = load_records(cons_input, &manifest);
      } else {
        data = synthetic::make_arena(cons_synth.config(seed)).dataset;
      }
      const auto seeds = seed_range(seed, runs);
      const auto trace = experiment::consistency_trace(data, seeds, optim.config(), !no_norm);
      manifest.write("consistency.csv", trace_csv(trace.consistency, "consistency"));
      std::ostringstream loss;
      loss << "epoch";
      for (auto s : seeds) loss << ",run_" << s;
      loss << '\n';
      std::size_t epochs = 0;
      for (const auto& l : trace.loss) epochs = std::max(epochs, l.size());
      for (std::size_t e = 0; e < epochs; ++e) {
        loss << e + 1;
        for (const auto& l : trace.loss) loss << ',' << (e < l.size() ? format_number(l[e]) : "");
        loss << '\n';
      }
      manifest.write("loss.csv", loss.str());
      json rankings = json::array();
      for (const auto& r : trace.final_rankings) {
        json order = json::array();
        for (const auto& id : r.order) order.push_back(id.str());
        rankings.push_back(order);
      }
      const double final = trace.consistency.empty() ? 1.0 : trace.consistency.back();
      json out{{"final_consistency", final}, {"rankings", rankings}};
      manifest.write("rankings.json", out.dump(2) + "\n");
      std::cout << "final consistency " << format_number(final) << '\n';
      manifest.finish();
      return kOk;
    }

    if (*cmd_win) {
      Manifest manifest("winmatrix", out_dir);
      manifest.record_options(*cmd_win);
      const auto wm = win_matrix(load_records(input, &manifest));
      auto table = [&](const std::vector<std::vector<std::size_t>>& m) {
        std::ostringstream ss;
        ss << "model";
        for (const auto& id : wm.models) ss << ',' << csv_field(id.str());
        ss << '\n';
        for (std::size_t i = 0; i < wm.models.size(); ++i) {
          ss << csv_field(wm.models[i].str());
          for (std::size_t j = 0; j < wm.models.size(); ++j) ss << ',' << m[i][j];
          ss << '\n';
        }
        return ss.str();
      };
      manifest.write("wins.csv", table(wm.wins));
      manifest.write("ties.csv", table(wm.ties));
      manifest.finish();
      return kOk;
    }

    if (*cmd_synth) {
      const auto arena = synthetic::make_arena(synth.config(seed));
      std::ofstream out(synth_out, std::ios::binary);
      if (!out) throw Error("cannot write '" + synth_out.string() + "'");
      io::write_records(arena.dataset, out);
      std::cout << arena.dataset.size() << " records written to " << synth_out.string() << '\n';
      return kOk;
    }

    if (*cmd_perturb) {
      const Dataset data = load_records(input, nullptr);
      perturb::PerturbationPlan plan;
      plan.strategy = perturb::parse_strategy(strategy);
      plan.targets = perturb::sample_targets(data, ratio, seed);
      plan.seed = seed;
      const auto result = perturb::apply(data, plan);
      {
        std::ofstream out(perturb_out, std::ios::binary);
        if (!out) throw Error("cannot write '" + perturb_out.string() + "'");
        io::write_records(result.dataset, out);
      }
      std::ofstream truth(perturb_out.string() + ".truth", std::ios::binary);
      for (const auto& id : plan.targets) truth << id.str() << '\n';
      std::cout << plan.targets.size() << " of " << data.n_annotators() << " annotators perturbed ("
                << perturb::to_string(plan.strategy) << ")\n";
      return kOk;
    }
  } catch (const stablearena::ParseError& e) {
    std::cerr << json{{"error", "parse_error"}, {"message", e.what()}, {"location", e.location()}}.dump() << '\n';
    return kFailure;
  } catch (const RoundSkipped& e) {
    std::cerr << json{{"error", "round_skipped"}, {"message", e.what()}}.dump() << '\n';
    return kRoundSkipped;
  } catch (const DivergenceError& e) {
    std::cerr << json{{"error", "divergence"}, {"message", e.what()}, {"epoch", e.epoch()}}.dump() << '\n';
    return kFailure;
  } catch (const std::exception& e) {
    std::cerr << json{{"error", "error"}, {"message", e.what()}}.dump() << '\n';
    return kFailure;
  }
  return kOk;
}
