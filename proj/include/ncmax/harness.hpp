#pragma once

// Experiment runners: seeded verification campaigns, Doob-constant sweeps,
// Orlicz moment reports, and deterministic CSV/JSON emission.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "ncmax/json_io.hpp"
#include "ncmax/majorant.hpp"
#include "ncmax/nets.hpp"
#include "ncmax/random.hpp"

namespace ncmax {

struct ExperimentConfig {
  std::uint64_t seed = 42;
  int trials = 10;
  Json net = {{"construction", "conditional_expectation"}, {"filtration", {{"kind", "dyadic_matrix"}, {"depth", 3}, {"first", 1}}}};
  ExponentWindow window = ExponentWindow::make(1.0, 2.0, kInf);
  std::string instance = "operator";  // operator | projection | commutative
  std::string space = "lp:3";
  double tol = 1e-8;
  int k_floor = -40;
  bool split = false;
  std::vector<double> grid;  // doob sweep exponents
  std::string phi = "power:2";
};

inline Json to_json(const ExperimentConfig& c) {
  return {{"seed", c.seed},   {"trials", c.trials}, {"net", c.net},         {"window", to_json(c.window)},
          {"instance", c.instance}, {"space", c.space}, {"tol", c.tol},   {"k_floor", c.k_floor},
          {"split", c.split}, {"grid", c.grid},     {"phi", c.phi}};
}

inline ExperimentConfig config_from_json(const Json& j) {
  ExperimentConfig c;
  try {
    c.seed = j.value("seed", c.seed);
    c.trials = j.value("trials", c.trials);
    if (j.contains("net")) c.net = j["net"];
    if (j.contains("window")) c.window = window_from_json(j["window"]);
    c.instance = j.value("instance", c.instance);
    c.space = j.value("space", c.space);
    c.tol = j.value("tol", c.tol);
    c.k_floor = j.value("k_floor", c.k_floor);
    c.split = j.value("split", c.split);
    c.grid = j.value("grid", c.grid);
    c.phi = j.value("phi", c.phi);
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("experiment config: ") + e.what());
  }
  if (c.trials < 0) throw ConfigError("trials must be >= 0");
  if (c.instance != "operator" && c.instance != "projection" && c.instance != "commutative")
    throw ConfigError("instance must be operator, projection or commutative");
  return c;
}

/// Independent stream for trial i: seed_seq over (seed, i).
inline Rng trial_rng(std::uint64_t seed, std::uint64_t trial) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(trial), static_cast<std::uint32_t>(trial >> 32)};
  return Rng(seq);
}

// ---------------------------------------------------------------------------
// Tables

/// Rows of doubles under fixed column names, with optional text columns first.
struct Table {
  std::vector<std::string> text_columns;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> text;
  std::vector<std::vector<double>> rows;

  void add(std::vector<std::string> t, std::vector<double> v) {
    text.push_back(std::move(t));
    rows.push_back(std::move(v));
  }
};

inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string to_csv(const Table& t) {
  std::ostringstream os;
  bool first = true;
  for (const auto& c : t.text_columns) os << (first ? "" : ",") << c, first = false;
  for (const auto& c : t.columns) os << (first ? "" : ",") << c, first = false;
  os << '\n';
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    first = true;
    for (const auto& s : t.text[r]) os << (first ? "" : ",") << s, first = false;
    for (double v : t.rows[r]) os << (first ? "" : ",") << format_double(v), first = false;
    os << '\n';
  }
  return os.str();
}

inline Json table_json(const Table& t) {
  Json rows = Json::array();
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    Json row = Json::object();
    for (std::size_t c = 0; c < t.text_columns.size(); ++c) row[t.text_columns[c]] = t.text[r][c];
    for (std::size_t c = 0; c < t.columns.size(); ++c) {
      const double v = t.rows[r][c];
      row[t.columns[c]] = std::isfinite(v) ? Json(v) : Json(format_double(v));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Table table_from_json(const Json& rows, std::vector<std::string> text_columns, std::vector<std::string> columns) {
  Table t{std::move(text_columns), std::move(columns), {}, {}};
  for (const auto& row : rows) {
    std::vector<std::string> tx;
    std::vector<double> v;
    for (const auto& c : t.text_columns) tx.push_back(row.at(c).get<std::string>());
    for (const auto& c : t.columns) {
      const auto& e = row.at(c);
      v.push_back(e.is_string() ? std::stod(e.get<std::string>()) : e.get<double>());
    }
    t.add(std::move(tx), std::move(v));
  }
  return t;
}

struct Report {
  std::string kind;
  ExperimentConfig config;
  Table table;
  Json summary = Json::object();
};

inline Json to_json(const Report& r) {
  return {{"kind", r.kind}, {"config", to_json(r.config)}, {"summary", r.summary}, {"rows", table_json(r.table)}};
}

inline Report report_from_json(const Json& j) {
  Report r;
  r.kind = j.at("kind").get<std::string>();
  r.config = config_from_json(j.at("config"));
  r.summary = j.at("summary");
  std::vector<std::string> text, cols;
  if (!j.at("rows").empty()) {
    for (const auto& [k, v] : j.at("rows")[0].items()) (v.is_string() && v != "inf" && v != "-inf" && v != "nan" ? text : cols).push_back(k);
  }
  r.table = table_from_json(j.at("rows"), text, cols);
  return r;
}

/// Writes csv or json; IO failures name the path.
inline std::string render(const Report& r, const std::string& format) {
  if (format == "csv") return to_csv(r.table);
  if (format == "json") return to_json(r).dump(2) + "\n";
  throw ConfigError("unknown format \"" + format + "\" (csv or json)");
}

inline void emit(const Report& r, const std::string& format, const std::string& path) {
  write_text_file(path, render(r, format));
}

// ---------------------------------------------------------------------------
// Campaign

namespace detail {

inline double median(std::vector<double> v) {
  if (v.empty()) return std::nan("");
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

inline double min_of(const std::vector<double>& v) {
  return v.empty() ? std::nan("") : *std::min_element(v.begin(), v.end());
}

inline double max_of(const std::vector<double>& v) {
  return v.empty() ? std::nan("") : *std::max_element(v.begin(), v.end());
}

inline std::string repro(const ExperimentConfig& c, int trial) {
  std::ostringstream os;
  os << " [reproduce: seed=" << c.seed << " trial=" << trial << "]";
  return os.str();
}

}  // namespace detail

/// For each trial: a fresh net (trial-local witness memo), a random instance,
/// its majorant with certificates. Any violation aborts with the seed and trial.
inline Report run_verification_campaign(const ExperimentConfig& cfg) {
  Report rep;
  rep.kind = "campaign";
  rep.config = cfg;
  rep.table.text_columns = {"instance"};
  rep.table.columns = {"trial", "size", "min_order_margin", "mu_excess", "lower", "upper", "certified"};
  MajorantOptions opt{cfg.k_floor, cfg.tol, cfg.split};
  const auto space = space_from_string(cfg.space);
  std::vector<double> margins, excesses;
  for (int i = 0; i < cfg.trials; ++i) {
    auto rng = trial_rng(cfg.seed, static_cast<std::uint64_t>(i));
    const auto net = net_from_json(cfg.net);
    try {
      const auto c = net_constants(net, cfg.window);
      double size, lower = std::nan(""), upper = std::nan(""), certified = std::nan("");
      MajorantResult res;
      if (cfg.instance == "operator") {
        const auto x = random_psd(rng, net.domain());
        size = x.operator_norm();
        res = majorant_general(net, x, cfg.window, c, opt);
        const auto nb = linf_norm_bounds(net, x, space, cfg.window, c, opt, &res);
        lower = nb.lower;
        upper = nb.upper;
        certified = nb.certified;
      } else {
        const auto f = random_projection(rng, net.domain());
        size = f.trace();
        res = cfg.instance == "projection" ? majorant_for_projection(net, f, cfg.window, c, opt)
                                           : majorant_commutative(net, f, cfg.window, c, opt);
      }
      const double m = detail::min_of(res.certificate.order_margins);
      margins.push_back(m);
      excesses.push_back(res.certificate.mu_excess);
      rep.table.add({cfg.instance}, {static_cast<double>(i), size, m, res.certificate.mu_excess, lower, upper, certified});
    } catch (const CertificateViolation& e) {
      throw CertificateViolation(std::string(e.what()) + detail::repro(cfg, i));
    }
  }
  rep.summary = {{"trials", cfg.trials},
                 {"failures", 0},
                 {"min_order_margin", detail::min_of(margins)},
                 {"median_order_margin", detail::median(margins)},
                 {"max_mu_excess", detail::max_of(excesses)},
                 {"median_mu_excess", detail::median(excesses)}};
  for (auto& [k, v] : rep.summary.items()) {
    if (v.is_number_float() && !std::isfinite(v.get<double>())) v = format_double(v.get<double>());
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Doob sweep

struct SweepRecord {
  double p = 0.0;
  double p_prime = 0.0;
  double empirical_majorant_ratio = 0.0;  // max over trials of ||a||_p / ||x||_p
  double certified = 0.0;                 // 4 kappa K ||S_{p',inf}||_{L^p}
  double margin = 0.0;
  double runtime = 0.0;
};

/// Least-squares slope of log(y) against log(x).
inline double log_log_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n < 2) return std::nan("");
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) mx += std::log(x[i]), my += std::log(y[i]);
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (std::log(x[i]) - mx) * (std::log(y[i]) - my);
    sxx += (std::log(x[i]) - mx) * (std::log(x[i]) - mx);
  }
  return sxy / sxx;
}

/// Certified L^p Doob constant at p with p' = (1+p)/2 and q = inf.
inline double certified_doob_constant(const MaximalNet& net, double p, InterpolationConstants* out = nullptr) {
  const auto w = ExponentWindow::make(1.0, 0.5 * (1.0 + p), kInf);
  const auto c = net_constants(net, w);
  if (out) *out = c;
  return 4.0 * c.kappa * c.K * calderon_lr_bound(p, w.p_prime, kInf);
}

inline std::vector<SweepRecord> doob_sweep(const ExperimentConfig& cfg, double* slope = nullptr) {
  if (cfg.grid.empty()) throw ConfigError("doob sweep needs a nonempty p-grid");
  for (double p : cfg.grid) {
    if (!(p > 1.0)) throw ConfigError("doob sweep exponents must exceed 1");
  }
  std::vector<SweepRecord> out;
  MajorantOptions opt{cfg.k_floor, cfg.tol, cfg.split};
  for (std::size_t g = 0; g < cfg.grid.size(); ++g) {
    const auto t0 = std::chrono::steady_clock::now();
    const double p = cfg.grid[g];
    SweepRecord r;
    r.p = p;
    r.p_prime = 0.5 * (1.0 + p);
    const auto w = ExponentWindow::make(1.0, r.p_prime, kInf);
    const auto space = SpaceDescriptor::lp(p);
    for (int i = 0; i < cfg.trials; ++i) {
      auto rng = trial_rng(cfg.seed, (static_cast<std::uint64_t>(g) << 32) | static_cast<std::uint64_t>(i));
      const auto net = net_from_json(cfg.net);
      r.certified = certified_doob_constant(net, p);
      try {
        const auto x = random_psd(rng, net.domain());
        const auto res = majorant_general(net, x, w, net_constants(net, w), opt);
        r.empirical_majorant_ratio = std::max(r.empirical_majorant_ratio, norm(mu(res.a), space) / norm(mu(x), space));
      } catch (const CertificateViolation& e) {
        throw CertificateViolation(std::string(e.what()) + detail::repro(cfg, i));
      }
    }
    if (cfg.trials == 0) r.certified = certified_doob_constant(net_from_json(cfg.net), p);
    r.margin = r.certified - r.empirical_majorant_ratio;
    if (r.margin < 0.0) {
      std::ostringstream os;
      os << "doob sweep: empirical ratio " << r.empirical_majorant_ratio << " exceeds certified " << r.certified
         << " at p=" << p;
      throw CertificateViolation(os.str());
    }
    r.runtime = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    out.push_back(r);
  }
  if (slope) {
    std::vector<double> xs, ys;
    for (const auto& r : out) xs.push_back(r.p - 1.0), ys.push_back(r.certified);
    *slope = log_log_slope(xs, ys);
  }
  return out;
}

/// Runtime is measured but left out of the table so output bytes depend only on the config.
inline Report sweep_report(const ExperimentConfig& cfg, const std::vector<SweepRecord>& recs, double slope) {
  Report rep;
  rep.kind = "doob_sweep";
  rep.config = cfg;
  rep.table.columns = {"p", "p_prime", "empirical_majorant_ratio", "certified", "margin"};
  for (const auto& r : recs) rep.table.add({}, {r.p, r.p_prime, r.empirical_majorant_ratio, r.certified, r.margin});
  rep.summary = {{"slope_vs_log_p_minus_1", std::isfinite(slope) ? Json(slope) : Json(format_double(slope))}};
  return rep;
}

// ---------------------------------------------------------------------------
// Orlicz moments

inline OrliczFunction phi_from_string(const std::string& s) {
  try {
    if (s.rfind("power:", 0) == 0) return OrliczFunction::power(std::stod(s.substr(6)));
    if (s.rfind("mix:", 0) == 0) {
      const auto comma = s.find(',', 4);
      if (comma != std::string::npos)
        return OrliczFunction::power_mix(std::stod(s.substr(4, comma - 4)), std::stod(s.substr(comma + 1)));
    }
  } catch (const std::logic_error&) {
  }
  throw ConfigError("cannot parse Orlicz function \"" + s + "\" (power:r or mix:r1,r2)");
}

/// sigma(Phi(a)) / tau(Phi(x)) per trial; for Phi = t^r also the bound
/// (4 kappa K ||S_{p',q'}||_{L^r})^r, which every ratio must respect.
inline Report orlicz_report(const ExperimentConfig& cfg) {
  Report rep;
  rep.kind = "orlicz_check";
  rep.config = cfg;
  rep.table.columns = {"trial", "lhs", "rhs", "ratio", "bound"};
  const auto phi = phi_from_string(cfg.phi);
  MajorantOptions opt{cfg.k_floor, cfg.tol, cfg.split};
  std::vector<double> ratios;
  double bound = std::nan("");
  for (int i = 0; i < cfg.trials; ++i) {
    auto rng = trial_rng(cfg.seed, static_cast<std::uint64_t>(i));
    const auto net = net_from_json(cfg.net);
    const auto c = net_constants(net, cfg.window);
    if (cfg.phi.rfind("power:", 0) == 0) {
      const double r = std::stod(cfg.phi.substr(6));
      bound = std::pow(4.0 * c.kappa * c.K * calderon_lr_bound(r, cfg.window.p_prime, cfg.window.q_prime), r);
    }
    try {
      const auto x = random_psd(rng, net.domain());
      const auto m = orlicz_moment_check(net, x, phi, cfg.window, c, opt);
      if (std::isfinite(bound) && !Tolerance{cfg.tol, 0.0}.leq(m.ratio, bound)) {
        std::ostringstream os;
        os << "Orlicz moment ratio " << m.ratio << " exceeds " << bound;
        throw CertificateViolation(os.str());
      }
      ratios.push_back(m.ratio);
      rep.table.add({}, {static_cast<double>(i), m.lhs, m.rhs, m.ratio, bound});
    } catch (const CertificateViolation& e) {
      throw CertificateViolation(std::string(e.what()) + detail::repro(cfg, i));
    }
  }
  rep.summary = {{"trials", cfg.trials}, {"failures", 0}};
  if (!ratios.empty()) {
    rep.summary["max_ratio"] = detail::max_of(ratios);
    rep.summary["median_ratio"] = detail::median(ratios);
  }
  return rep;
}

}  // namespace ncmax
