#include "claimnet/tools/cli.hpp"

#include <csignal>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <httplib.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "claimnet/datagen.hpp"
#include "claimnet/errors.hpp"
#include "claimnet/evaluation.hpp"
#include "claimnet/model_io.hpp"
#include "claimnet/partial_prediction.hpp"
#include "claimnet/selection.hpp"
#include "claimnet/tools/service.hpp"

namespace claimnet::tools {

namespace {

using nlohmann::json;

std::vector<Variable> parse_variables(const std::vector<std::string>& names) {
  std::vector<Variable> out;
  for (const auto& name : names) {
    if (name == "R" || name == "r") {
      const auto r = reduced_subset().variables;
      out.insert(out.end(), r.begin(), r.end());
      continue;
    }
    if (name == "F" || name == "f" || name == "all") {
      out.assign(kAllVariables.begin(), kAllVariables.end());
      continue;
    }
    const auto v = parse_variable(name);
    if (!v) throw Error("unknown variable '" + name + "'");
    if (std::find(out.begin(), out.end(), *v) == out.end()) out.push_back(*v);
  }
  return out;
}

Variable parse_one_variable(const std::string& name) {
  const auto v = parse_variable(name);
  if (!v) throw Error("unknown variable '" + name + "'");
  return *v;
}

std::vector<ClaimRecord> load_extract(const std::string& path) {
  return modelling_extract(read_claims_file(path));
}

/// Writes to the --out file when given, otherwise to `out`.
void emit(const std::string& path, std::ostream& out, const std::function<void(std::ostream&)>& write) {
  if (path.empty()) {
    write(out);
    out.flush();
    return;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw Error("cannot open '" + path + "' for writing");
  write(file);
  if (!file) throw Error("failed writing '" + path + "'");
}

void emit_json(const std::string& path, std::ostream& out, const json& doc) {
  emit(path, out, [&](std::ostream& o) { o << doc.dump(2) << '\n'; });
}

struct Common {
  std::uint64_t seed = 1;
  std::string out;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--seed", c.seed, "Random seed")->capture_default_str();
  sub->add_option("--out", c.out, "Output file (default: standard output)");
}

struct TrainFlags {
  double lambda = 0.0;
  std::optional<double> lambda_bias;
  std::size_t hidden = 0;
  int max_iterations = 500;
  double tolerance = 1e-8;
  double init_scale = 1.0;
};

void add_train_flags(CLI::App* sub, TrainFlags& f) {
  sub->add_option("--lambda", f.lambda, "Weight decay")->capture_default_str();
  sub->add_option("--lambda-bias", f.lambda_bias, "Bias weight decay (default lambda/25)");
  sub->add_option("--nh", f.hidden, "Hidden nodes")->capture_default_str();
  sub->add_option("--max-iter", f.max_iterations, "Optimizer iteration limit")->capture_default_str();
  sub->add_option("--tolerance", f.tolerance, "Relative objective decrease for convergence")->capture_default_str();
  sub->add_option("--init-scale", f.init_scale, "Width of the uniform initial weight draw")->capture_default_str();
}

TrainConfig to_config(const TrainFlags& f, std::uint64_t seed) {
  TrainConfig c;
  c.lambda = f.lambda;
  c.lambda_bias = f.lambda_bias;
  c.hidden = f.hidden;
  c.max_iterations = f.max_iterations;
  c.tolerance = f.tolerance;
  c.init_scale = f.init_scale;
  c.seed = seed;
  return c;
}

Covariates parse_assignments(const std::vector<std::string>& sets) {
  Covariates c;
  for (const auto& s : sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw Error("--set expects VAR=VALUE, got '" + s + "'");
    c.set(parse_one_variable(s.substr(0, eq)), s.substr(eq + 1));
  }
  return c;
}

volatile std::sig_atomic_t g_stop = 0;
httplib::Server* g_server = nullptr;

void on_signal(int) {
  g_stop = 1;
  if (g_server) g_server->stop();
}

std::string env_or(const char* name, std::string fallback) {
  const char* v = std::getenv(name);
  return v && *v ? std::string(v) : fallback;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run_cli(args, out, err);
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  if (!spdlog::get("claimnet")) {
    auto logger = spdlog::stderr_color_mt("claimnet");
    logger->set_pattern("%^%l%$: %v");
    spdlog::set_default_logger(logger);
  }

  CLI::App app{"Cox proportional-hazards neural network for claim durations", "claimnet"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "TOML/INI file of option values (sections named after subcommands)");
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "Debug logging");

  std::function<void()> action;

  // gen-data
  auto* gen = app.add_subcommand("gen-data", "Generate synthetic claims with a known model");
  Common gen_c;
  std::string gen_preset = "interaction-v1", gen_file, gen_oracle, gen_dump;
  std::size_t gen_records = 0;
  add_common(gen, gen_c);
  gen->add_option("--preset", gen_preset, "Built-in generator (linear-v1, interaction-v1, null-v1, trend-v1)")
      ->capture_default_str();
  gen->add_option("--generator", gen_file, "Generator configuration document (overrides --preset)");
  gen->add_option("--records", gen_records, "Record count (default: preset size)");
  gen->add_option("--oracle", gen_oracle, "Write true prediction terms to this file");
  gen->add_option("--dump-config", gen_dump, "Write the generator configuration to this file");
  gen->callback([&] {
    action = [&] {
      GeneratorConfig cfg;
      if (!gen_file.empty()) {
        std::ifstream in(gen_file);
        if (!in) throw Error("cannot open '" + gen_file + "'");
        cfg = generator_config_from_json(json::parse(in, nullptr, true, true));
        if (gen->count("--seed")) cfg.seed = gen_c.seed;
      } else {
        cfg = preset(gen_preset, 12000, gen_c.seed);
      }
      if (gen_records) cfg.records = gen_records;
      const auto data = generate(cfg);
      emit(gen_c.out, out, [&](std::ostream& o) { write_claims(o, data.records); });
      if (!gen_oracle.empty()) emit(gen_oracle, out, [&](std::ostream& o) { write_oracle(o, data.etas); });
      if (!gen_dump.empty()) emit_json(gen_dump, out, to_json(cfg));
      spdlog::info("generated {} records (capture gap {:.2f} weeks)", data.records.size(), data.capture_gap_weeks);
    };
  });

  // codebook
  auto* cbk = app.add_subcommand("codebook", "Build the category codebook of a claims file");
  Common cbk_c;
  std::string cbk_data;
  std::size_t cbk_min = kDefaultMinCount;
  std::vector<std::string> cbk_vars = {"F"};
  add_common(cbk, cbk_c);
  cbk->add_option("--data", cbk_data, "Claims file")->required();
  cbk->add_option("--min-count", cbk_min, "Consolidation threshold")->capture_default_str();
  cbk->add_option("--variables", cbk_vars, "Variables (names, R or F)")->delimiter(',');
  cbk->callback([&] {
    action = [&] {
      const auto cb = build_codebook(load_extract(cbk_data), cbk_min, parse_variables(cbk_vars));
      emit_json(cbk_c.out, out, to_json(cb));
    };
  });

  // split
  auto* spl = app.add_subcommand("split", "Random train/test partition of a claims file");
  Common spl_c;
  std::string spl_data, spl_train_out, spl_test_out;
  std::size_t spl_n = 0;
  add_common(spl, spl_c);
  spl->add_option("--data", spl_data, "Claims file")->required();
  spl->add_option("--train", spl_n, "Training records")->required();
  spl->add_option("--train-out", spl_train_out, "Training claims file")->required();
  spl->add_option("--test-out", spl_test_out, "Test claims file")->required();
  spl->callback([&] {
    action = [&] {
      const auto records = load_extract(spl_data);
      const auto s = split(records.size(), spl_n, spl_c.seed);
      write_claims_file(spl_train_out, select(records, s.train));
      write_claims_file(spl_test_out, select(records, s.test));
      spdlog::info("{} training and {} test records", s.train.size(), s.test.size());
    };
  });

  // train
  auto* trn = app.add_subcommand("train", "Train a model");
  Common trn_c;
  TrainFlags trn_f;
  std::string trn_data, trn_codebook;
  std::size_t trn_min = kDefaultMinCount;
  std::vector<std::string> trn_vars = {"F"};
  add_common(trn, trn_c);
  add_train_flags(trn, trn_f);
  trn->add_option("--data", trn_data, "Training claims file")->required();
  trn->add_option("--codebook", trn_codebook, "Use this codebook instead of building one");
  trn->add_option("--min-count", trn_min, "Consolidation threshold")->capture_default_str();
  trn->add_option("--variables", trn_vars, "Variables (names, R or F)")->delimiter(',');
  trn->callback([&] {
    action = [&] {
      const auto records = load_extract(trn_data);
      const auto cb = trn_codebook.empty() ? build_codebook(records, trn_min, parse_variables(trn_vars))
                                           : load_codebook(trn_codebook);
      const auto model = train(records, cb, to_config(trn_f, trn_c.seed));
      spdlog::info("trained: {} inputs, {} hidden, lambda {} (bias {}), {} iterations ({}), objective {}",
                   cb.input_count(), model.config.hidden, model.config.lambda, model.config.bias_lambda(),
                   model.iterations, to_string(model.stop_reason), model.objective);
      emit(trn_c.out, out, [&](std::ostream& o) { o << serialize_model(model); });
    };
  });

  // grid
  auto* grd = app.add_subcommand("grid", "Grid search over decay, hidden nodes and variable subsets");
  Common grd_c;
  TrainFlags grd_f;
  std::string grd_train, grd_test, grd_best;
  std::vector<double> grd_lambdas = GridOptions{}.lambdas;
  std::vector<std::size_t> grd_hidden = GridOptions{}.hidden_sizes;
  std::vector<std::string> grd_subsets = {"R", "F"};
  std::size_t grd_min = kDefaultMinCount;
  add_common(grd, grd_c);
  grd->add_option("--train", grd_train, "Training claims file")->required();
  grd->add_option("--test", grd_test, "Test claims file")->required();
  grd->add_option("--lambdas", grd_lambdas, "Decay values")->delimiter(',');
  grd->add_option("--hidden", grd_hidden, "Hidden node counts")->delimiter(',');
  grd->add_option("--subsets", grd_subsets, "Variable subsets: R, F")->delimiter(',');
  grd->add_option("--min-count", grd_min, "Consolidation threshold")->capture_default_str();
  grd->add_option("--max-iter", grd_f.max_iterations, "Optimizer iteration limit")->capture_default_str();
  grd->add_option("--init-scale", grd_f.init_scale, "Width of the uniform initial weight draw")->capture_default_str();
  grd->add_option("--best-model", grd_best, "Retrain the best configuration and save it here");
  grd->callback([&] {
    action = [&] {
      const auto train_records = load_extract(grd_train);
      const auto test_records = load_extract(grd_test);
      GridOptions opt;
      opt.subsets.clear();
      for (const auto& s : grd_subsets) {
        if (s == "R" || s == "r") {
          opt.subsets.push_back(reduced_subset());
        } else if (s == "F" || s == "f") {
          opt.subsets.push_back(full_subset());
        } else {
          throw Error("unknown subset '" + s + "' (expected R or F)");
        }
      }
      opt.lambdas = grd_lambdas;
      opt.hidden_sizes = grd_hidden;
      opt.min_count = grd_min;
      opt.base = to_config(grd_f, grd_c.seed);
      const auto result = grid_search(train_records, test_records, opt);
      emit(grd_c.out, out, [&](std::ostream& o) { write_grid(o, result); });
      if (!result.best) throw Error("every grid configuration failed");
      const auto& best = result.entries[*result.best];
      spdlog::info("best: subset {} lambda {} n_h {} r2 {:.4f}", best.subset, best.lambda, best.hidden, best.r2);
      if (!grd_best.empty()) {
        const auto& subset = best.subset == "R" ? reduced_subset() : full_subset();
        TrainConfig cfg = opt.base;
        cfg.lambda = best.lambda;
        cfg.hidden = best.hidden;
        save_model(grd_best, train(train_records, build_codebook(train_records, grd_min, subset.variables), cfg));
      }
    };
  });

  // stepwise
  auto* stp = app.add_subcommand("stepwise", "Likelihood-ratio report of forward main-effects construction");
  Common stp_c;
  std::string stp_data;
  std::vector<std::string> stp_vars = {"F"};
  std::size_t stp_min = kDefaultMinCount;
  add_common(stp, stp_c);
  stp->add_option("--data", stp_data, "Claims file")->required();
  stp->add_option("--variables", stp_vars, "Candidate variables")->delimiter(',');
  stp->add_option("--min-count", stp_min, "Consolidation threshold")->capture_default_str();
  stp->callback([&] {
    action = [&] {
      const auto rows = stepwise_report(load_extract(stp_data), parse_variables(stp_vars), stp_min);
      emit(stp_c.out, out, [&](std::ostream& o) { write_stepwise(o, rows); });
    };
  });

  // evaluate
  auto* evl = app.add_subcommand("evaluate", "Model quality reports");
  Common evl_c;
  std::string evl_report, evl_model, evl_data, evl_format = "csv", evl_summary = "all";
  std::string evl_code = "POB", evl_group = "SEX", evl_var = "SEX";
  std::size_t evl_min = 10, evl_min_group = 30;
  double evl_alpha = 0.05, evl_width = 1.0, evl_step = 0.5;
  add_common(evl, evl_c);
  evl->add_option("report", evl_report, "deciles, quintiles, windows, score, interactions, concordance, groups, ph")
      ->required()
      ->check(CLI::IsMember(
          {"deciles", "quintiles", "windows", "score", "interactions", "concordance", "groups", "ph"}));
  evl->add_option("--model", evl_model, "Model file");
  evl->add_option("--data", evl_data, "Claims file")->required();
  evl->add_option("--format", evl_format, "csv or json")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
  evl->add_option("--summary", evl_summary, "windows: mean, q1, median, q3 or all")->capture_default_str();
  evl->add_option("--width", evl_width, "windows: window width in weeks")->capture_default_str();
  evl->add_option("--step", evl_step, "windows: grid step in weeks")->capture_default_str();
  evl->add_option("--code-var", evl_code, "interactions/concordance/groups: code variable")->capture_default_str();
  evl->add_option("--group-var", evl_group, "interactions/groups: grouping variable")->capture_default_str();
  evl->add_option("--variable", evl_var, "ph: variable to partition by")->capture_default_str();
  evl->add_option("--min-per-group", evl_min, "interactions/concordance: smallest group")->capture_default_str();
  evl->add_option("--min-records", evl_min_group, "groups: smallest cell")->capture_default_str();
  evl->add_option("--alpha", evl_alpha, "interactions: significance level")->capture_default_str();
  evl->callback([&] {
    action = [&] {
      const auto records = load_extract(evl_data);
      const bool as_json = evl_format == "json";
      const bool needs_model = evl_report != "interactions" && evl_report != "ph";
      std::optional<FittedModel> model;
      if (!evl_model.empty()) model = load_model(evl_model);
      if (needs_model && !model) throw Error("report '" + evl_report + "' needs --model");
      const auto codebook = [&] { return model ? model->codebook : build_codebook(records); };
      std::vector<double> etas;
      if (model) {
        for (const auto& r : records) etas.push_back(predict_eta(*model, r));
      }
      const auto o = outcomes_of(records);
      auto put = [&](const json& doc, const std::function<void(std::ostream&)>& csv) {
        if (as_json) {
          emit_json(evl_c.out, out, doc);
        } else {
          emit(evl_c.out, out, csv);
        }
      };
      if (evl_report == "deciles") {
        const auto g = decile_summary(etas, o.durations, o.events);
        put(to_json(g), [&](std::ostream& s) { write_groups(s, g); });
      } else if (evl_report == "quintiles") {
        const auto t = quintile_table(etas, o.durations, o.events);
        put(to_json(t), [&](std::ostream& s) { write_quintiles(s, t); });
      } else if (evl_report == "windows") {
        std::vector<Summary> which;
        if (evl_summary == "all") {
          which = {Summary::Mean, Summary::Q1, Summary::Median, Summary::Q3};
        } else if (const auto s = parse_summary(evl_summary)) {
          which = {*s};
        } else {
          throw Error("unknown summary '" + evl_summary + "'");
        }
        const auto predicted = record_summaries(model->baseline, etas);
        WindowOptions opt;
        opt.width = evl_width;
        opt.step = evl_step;
        json docs = json::array();
        std::ostringstream csv;
        bool header = true;
        for (const auto s : which) {
          const auto pts = moving_window_calibration(predicted.of(s), o.durations, o.events, s, opt);
          docs.push_back(to_json(s, pts));
          std::ostringstream part;
          write_windows(part, s, pts);
          auto text = part.str();
          if (!header) text.erase(0, text.find('\n') + 1);
          header = false;
          csv << text;
        }
        put({{"report", "windows"}, {"mean_truncated_at_last_event", true}, {"summaries", docs}},
            [&](std::ostream& s) { s << csv.str(); });
      } else if (evl_report == "score") {
        const auto s = score_etas(etas, records);
        put({{"report", "score"}, {"r2", s.r2}, {"beta", s.beta}, {"loglik_full", s.loglik_full},
             {"loglik_null", s.loglik_null}, {"records", s.n}, {"degenerate", s.degenerate}},
            [&](std::ostream& out_csv) {
              out_csv << "r2,beta,loglik_full,loglik_null,records\n"
                      << format_double(s.r2) << ',' << format_double(s.beta) << ',' << format_double(s.loglik_full)
                      << ',' << format_double(s.loglik_null) << ',' << s.n << '\n';
            });
      } else if (evl_report == "interactions") {
        const auto r = interaction_analysis(records, codebook(), parse_one_variable(evl_code),
                                            parse_one_variable(evl_group), evl_min, evl_alpha);
        put(to_json(r), [&](std::ostream& s) { write_interactions(s, r); });
      } else if (evl_report == "concordance") {
        const auto r = sex_difference_concordance(*model, records, parse_one_variable(evl_code), evl_min);
        put(to_json(r), [&](std::ostream& s) { write_concordance(s, r); });
      } else if (evl_report == "groups") {
        const auto rows = group_calibration(*model, records, parse_one_variable(evl_code),
                                            parse_one_variable(evl_group), evl_min_group);
        put(to_json(rows), [&](std::ostream& s) { write_group_calibration(s, rows); });
      } else {
        const auto curves = ph_diagnostic(records, codebook(), parse_one_variable(evl_var));
        put(to_json(curves), [&](std::ostream& s) { write_hazard_curves(s, curves); });
      }
    };
  });

  // trend
  auto* trd = app.add_subcommand("trend", "Piecewise-linear Cox trend of duration by open date");
  Common trd_c;
  std::string trd_data, trd_format = "csv";
  add_common(trd, trd_c);
  trd->add_option("--data", trd_data, "Claims file")->required();
  trd->add_option("--format", trd_format, "csv or json")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
  trd->callback([&] {
    action = [&] {
      TrainConfig base;
      base.seed = trd_c.seed;
      const auto fit = fit_time_trend(load_extract(trd_data), base);
      if (trd_format == "json") {
        emit_json(trd_c.out, out, to_json(fit));
      } else {
        emit(trd_c.out, out, [&](std::ostream& s) { write_trend(s, fit); });
      }
    };
  });

  // predict
  auto* prd = app.add_subcommand("predict", "Predicted duration distribution for a full or partial input");
  Common prd_c;
  std::string prd_model, prd_method = "A", prd_format = "json";
  std::vector<std::string> prd_sets;
  bool prd_relax = false;
  add_common(prd, prd_c);
  prd->add_option("--model", prd_model, "Model file")->required();
  prd->add_option("--set", prd_sets, "VAR=VALUE input, repeatable");
  prd->add_option("--method", prd_method, "A (average prediction term) or B (average curve)")
      ->check(CLI::IsMember({"A", "B", "a", "b"}))
      ->capture_default_str();
  prd->add_flag("--relax", prd_relax, "Drop the most restrictive input until some training record matches");
  prd->add_option("--format", prd_format, "json or csv")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
  prd->callback([&] {
    action = [&] {
      const auto model = load_model(prd_model);
      const PartialPredictor predictor(model);
      const auto method = (prd_method == "B" || prd_method == "b") ? PartialMethod::B : PartialMethod::A;
      const auto p = predictor.predict(parse_assignments(prd_sets), method, prd_relax);
      const auto doc = prediction_json(p);
      if (prd_format == "json") {
        emit(prd_c.out, out, [&](std::ostream& s) { s << doc.dump() << '\n'; });
        return;
      }
      emit(prd_c.out, out, [&](std::ostream& s) {
        s << "# method=" << doc["method"].get<std::string>() << " match_count=" << p.match_count
          << " eta=" << format_double(p.eta) << " mean=" << format_double(doc["mean"].get<double>())
          << (doc["mean_truncated"].get<bool>() ? " (truncated at last event time)" : "");
        for (const char* k : {"q1", "median", "q3"}) {
          s << ' ' << k << '=' << (doc[k].is_null() ? std::string("beyond") : format_double(doc[k].get<double>()));
        }
        s << "\ntime,survival\n";
        for (std::size_t i = 0; i < p.curve.times.size(); ++i) {
          s << format_double(p.curve.times[i]) << ',' << format_double(p.curve.survival[i]) << '\n';
        }
      });
    };
  });

  // serve
  auto* srv = app.add_subcommand("serve", "HTTP prediction service");
  Common srv_c;
  std::string srv_model = env_or("CLAIMNET_MODEL", ""), srv_host = env_or("CLAIMNET_HOST", "127.0.0.1");
  std::string srv_ui = env_or("CLAIMNET_UI_DIR", "");
  int srv_port = std::atoi(env_or("CLAIMNET_PORT", "8080").c_str());
  add_common(srv, srv_c);
  srv->add_option("--model", srv_model, "Model file (env CLAIMNET_MODEL)");
  srv->add_option("--host", srv_host, "Bind address (env CLAIMNET_HOST)")->capture_default_str();
  srv->add_option("--port", srv_port, "Port (env CLAIMNET_PORT)")->capture_default_str();
  srv->add_option("--ui-dir", srv_ui, "Static client assets served under /ui (env CLAIMNET_UI_DIR)");
  srv->callback([&] {
    action = [&] {
      if (srv_model.empty()) throw Error("serve needs --model or CLAIMNET_MODEL");
      const PredictionService service(load_model(srv_model));
      const auto server = make_server(service, srv_ui);
      g_server = server.get();
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      spdlog::info("serving {} on {}:{}", srv_model, srv_host, srv_port);
      const bool ok = server->listen(srv_host, srv_port);
      g_server = nullptr;
      if (!ok && !g_stop) throw Error("cannot listen on " + srv_host + ":" + std::to_string(srv_port));
    };
  });

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n";
    const auto* active = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
    err << active->help();
    return e.get_exit_code() == 0 ? 2 : e.get_exit_code();
  }
  spdlog::set_level(verbose ? spdlog::level::debug : spdlog::level::info);

  try {
    if (action) action();
    return 0;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace claimnet::tools
