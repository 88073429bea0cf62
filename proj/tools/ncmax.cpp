// ncmax: command-line front end.
// Exit codes: 0 success, 2 certificate violation, 3 configuration/input error.

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ncmax/ncmax.hpp"

namespace {

using namespace ncmax;

struct Globals {
  std::uint64_t seed = 42;
  std::optional<double> tol;
  std::string out;
  std::string format;
};

void write_output(const Globals& g, const std::string& text) {
  if (g.out.empty()) {
    std::cout << text;
  } else {
    write_text_file(g.out, text);
  }
}

void write_json(const Globals& g, const Json& j) {
  if (!g.format.empty() && g.format != "json") throw ConfigError("this subcommand only emits json");
  write_output(g, j.dump(2) + "\n");
}

double parse_exponent(const std::string& s) {
  if (s == "inf" || s == "infinity") return kInf;
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos == s.size()) return v;
  } catch (const std::logic_error&) {
  }
  throw ConfigError("cannot parse exponent \"" + s + "\"");
}

ExperimentConfig load_config(const std::string& path, const Globals& g, bool seed_given) {
  ExperimentConfig cfg = path.empty() ? ExperimentConfig{} : config_from_json(read_json_file(path));
  if (seed_given || path.empty()) cfg.seed = g.seed;
  if (g.tol) cfg.tol = *g.tol;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ncmax: rearrangements, Calderon operators and majorants for noncommutative maximal nets"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  auto* seed_opt = app.add_option("--seed", g.seed, "random seed");
  app.add_option("--tol", g.tol, "certificate tolerance (relative)");
  app.add_option("--out", g.out, "output path (default stdout)");
  app.add_option("--format", g.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));

  // mu
  std::string mu_input;
  auto* mu_cmd = app.add_subcommand("mu", "decreasing rearrangement of an operator");
  mu_cmd->add_option("--input", mu_input, "operator json")->required();

  // calderon
  std::string cal_input, cal_p = "1", cal_q = "inf";
  std::vector<double> cal_at;
  auto* cal_cmd = app.add_subcommand("calderon", "Calderon operator S_{p,q} of a step function");
  cal_cmd->add_option("--input", cal_input, "step function json")->required();
  cal_cmd->add_option("--p", cal_p, "p");
  cal_cmd->add_option("--q", cal_q, "q (number or inf)");
  cal_cmd->add_option("--at", cal_at, "points to evaluate");

  // submaj
  std::string sm_h, sm_g;
  auto* sm_cmd = app.add_subcommand("submaj", "check g <<(sub) h");
  sm_cmd->set_help_flag("--help", "print this help message and exit");
  sm_cmd->add_option("--h", sm_h, "dominating step function json")->required();
  sm_cmd->add_option("--g", sm_g, "dominated step function json")->required();

  // majorant
  std::string mj_input, mj_p = "1", mj_pp = "2", mj_q = "inf", mj_qp = "inf", mj_mode = "general";
  int mj_kfloor = -40;
  bool mj_split = false;
  auto* mj_cmd = app.add_subcommand("majorant", "majorant of an operator or projection for a maximal net");
  mj_cmd->add_option("--input", mj_input, "json with \"net\" and \"operator\"")->required();
  mj_cmd->add_option("--p", mj_p);
  mj_cmd->add_option("--pprime", mj_pp);
  mj_cmd->add_option("--q", mj_q);
  mj_cmd->add_option("--qprime", mj_qp);
  mj_cmd->add_option("--kfloor", mj_kfloor);
  mj_cmd->add_option("--mode", mj_mode)->check(CLI::IsMember({"general", "projection", "commutative"}));
  mj_cmd->add_flag("--split", mj_split, "majorize the parts above and below eigenvalue 1 separately");

  // campaign
  std::string cp_config, cp_instance;
  std::optional<int> cp_trials;
  auto* cp_cmd = app.add_subcommand("campaign", "random verification campaign");
  cp_cmd->add_option("--config", cp_config, "experiment config json");
  cp_cmd->add_option("--trials", cp_trials);
  cp_cmd->add_option("--instance", cp_instance)->check(CLI::IsMember({"operator", "projection", "commutative"}));

  // doob-sweep
  std::string ds_config;
  std::vector<double> ds_grid;
  std::optional<int> ds_trials;
  auto* ds_cmd = app.add_subcommand("doob-sweep", "certified and empirical L^p Doob constants over a p-grid");
  ds_cmd->add_option("--config", ds_config, "experiment config json");
  ds_cmd->add_option("--grid", ds_grid, "exponents p > 1")->delimiter(',');
  ds_cmd->add_option("--trials", ds_trials);

  // orlicz-check
  std::string oc_config, oc_phi, oc_p, oc_pp, oc_q, oc_qp;
  std::optional<int> oc_trials;
  auto* oc_cmd = app.add_subcommand("orlicz-check", "Orlicz moments sigma(Phi(a)) against tau(Phi(x))");
  oc_cmd->add_option("--config", oc_config, "experiment config json");
  oc_cmd->add_option("--phi", oc_phi, "power:r or mix:r1,r2");
  oc_cmd->add_option("--p", oc_p);
  oc_cmd->add_option("--pprime", oc_pp);
  oc_cmd->add_option("--q", oc_q);
  oc_cmd->add_option("--qprime", oc_qp);
  oc_cmd->add_option("--trials", oc_trials);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 3;
  }
  const bool seed_given = seed_opt->count() > 0;

  try {
    if (*mu_cmd) {
      write_json(g, to_json(mu(operator_from_json(read_json_file(mu_input)))));
    } else if (*cal_cmd) {
      const auto h = calderon_apply(step_function_from_json(read_json_file(cal_input)), parse_exponent(cal_p),
                                    parse_exponent(cal_q));
      auto j = to_json(h);
      if (!cal_at.empty()) {
        Json vals = Json::array();
        for (double t : cal_at) vals.push_back({t, h(t)});
        j["values"] = vals;
      }
      write_json(g, j);
    } else if (*sm_cmd) {
      const auto h = step_function_from_json(read_json_file(sm_h));
      const auto gg = step_function_from_json(read_json_file(sm_g));
      const auto chk = check_submajorization(h, gg, g.tol ? Tolerance{*g.tol, 1e-12} : kDefaultTolerance);
      write_json(g, {{"submajorized", chk.holds},
                     {"worst_excess", std::isfinite(chk.worst_excess) ? Json(chk.worst_excess) : Json(format_double(chk.worst_excess))},
                     {"worst_t", std::isfinite(chk.worst_t) ? Json(chk.worst_t) : Json(format_double(chk.worst_t))}});
    } else if (*mj_cmd) {
      const auto in = read_json_file(mj_input);
      if (!in.contains("net") || !in.contains("operator")) throw InputError("majorant input needs \"net\" and \"operator\"");
      const auto net = net_from_json(in["net"]);
      const auto x = operator_from_json(in["operator"]);
      const auto w = ExponentWindow::make(parse_exponent(mj_p), parse_exponent(mj_pp), parse_exponent(mj_q),
                                          parse_exponent(mj_qp));
      const auto c = net_constants(net, w);
      MajorantOptions opt{mj_kfloor, g.tol.value_or(1e-8), mj_split};
      MajorantResult res;
      if (mj_mode == "general") {
        res = majorant_general(net, x, w, c, opt);
      } else {
        const auto f = Projection::from_operator(x);
        res = mj_mode == "projection" ? majorant_for_projection(net, f, w, c, opt) : majorant_commutative(net, f, w, c, opt);
      }
      write_json(g, to_json(res));
    } else if (*cp_cmd) {
      auto cfg = load_config(cp_config, g, seed_given);
      if (cp_trials) cfg.trials = *cp_trials;
      if (!cp_instance.empty()) cfg.instance = cp_instance;
      const auto rep = run_verification_campaign(cfg);
      write_output(g, render(rep, g.format.empty() ? "csv" : g.format));
    } else if (*ds_cmd) {
      auto cfg = load_config(ds_config, g, seed_given);
      if (!ds_grid.empty()) cfg.grid = ds_grid;
      if (cfg.grid.empty()) cfg.grid = {1.1, 1.2, 1.4, 1.8};
      if (ds_trials) cfg.trials = *ds_trials;
      double slope = 0.0;
      const auto recs = doob_sweep(cfg, &slope);
      const auto rep = sweep_report(cfg, recs, slope);
      write_output(g, render(rep, g.format.empty() ? "csv" : g.format));
      if (g.format != "json") std::cerr << "slope of certified constant vs log(p-1): " << format_double(slope) << "\n";
    } else if (*oc_cmd) {
      auto cfg = load_config(oc_config, g, seed_given);
      if (!oc_phi.empty()) cfg.phi = oc_phi;
      if (!oc_p.empty() || !oc_pp.empty() || !oc_q.empty() || !oc_qp.empty()) {
        cfg.window = ExponentWindow::make(oc_p.empty() ? cfg.window.p : parse_exponent(oc_p),
                                          oc_pp.empty() ? cfg.window.p_prime : parse_exponent(oc_pp),
                                          oc_q.empty() ? cfg.window.q : parse_exponent(oc_q),
                                          oc_qp.empty() ? cfg.window.q_prime : parse_exponent(oc_qp));
      }
      if (oc_trials) cfg.trials = *oc_trials;
      write_output(g, render(orlicz_report(cfg), g.format.empty() ? "csv" : g.format));
    }
  } catch (const CertificateViolation& e) {
    std::cerr << "certificate violation: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const Json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
