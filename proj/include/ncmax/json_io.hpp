#pragma once

// JSON forms of step functions, Calderon evaluations, operators, filtrations,
// net descriptors and majorant dumps.

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "ncmax/errors.hpp"
#include "ncmax/majorant.hpp"
#include "ncmax/nets.hpp"
#include "ncmax/spaces.hpp"
#include "ncmax/step_function.hpp"
#include "ncmax/tracial.hpp"

namespace ncmax {

using Json = nlohmann::json;

namespace detail {

inline Json exponent_json(double r) { return std::isinf(r) ? Json("inf") : Json(r); }

inline double exponent_from(const Json& j, const char* what) {
  if (j.is_string()) {
    if (j.get<std::string>() == "inf") return kInf;
    throw InputError(std::string(what) + ": expected a number or \"inf\"");
  }
  if (!j.is_number()) throw InputError(std::string(what) + ": expected a number or \"inf\"");
  return j.get<double>();
}

template <class T>
T field(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw InputError(std::string("missing field \"") + key + "\"");
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception& e) {
    throw InputError(std::string("field \"") + key + "\": " + e.what());
  }
}

}  // namespace detail

inline Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw InputError(path + ": " + e.what());
  }
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << text;
  if (!out) throw Error("write failed for " + path);
}

// ---------------------------------------------------------------------------
// StepFunction / CalderonEvaluation

inline Json to_json(const StepFunction& g) {
  return {{"breakpoints", g.breakpoints()}, {"values", g.values()}, {"tail", g.tail()}};
}

inline StepFunction step_function_from_json(const Json& j) {
  return {detail::field<std::vector<double>>(j, "breakpoints"), detail::field<std::vector<double>>(j, "values"),
          j.value("tail", 0.0)};
}

inline Json to_json(const CalderonEvaluation& h) {
  Json terms = Json::array();
  for (const auto& t : h.terms()) terms.push_back({t.coefficient, t.scale});
  return {{"p", detail::exponent_json(h.p())}, {"q", detail::exponent_json(h.q())}, {"terms", terms}};
}

inline CalderonEvaluation calderon_from_json(const Json& j) {
  if (!j.contains("p") || !j.contains("q")) throw InputError("Calderon evaluation needs \"p\" and \"q\"");
  std::vector<CalderonEvaluation::Term> terms;
  for (const auto& t : j.value("terms", Json::array())) {
    if (!t.is_array() || t.size() != 2) throw InputError("Calderon term must be [coefficient, scale]");
    terms.push_back({t[0].get<double>(), t[1].get<double>()});
  }
  return {detail::exponent_from(j["p"], "p"), detail::exponent_from(j["q"], "q"), std::move(terms)};
}

// ---------------------------------------------------------------------------
// Algebra / operators

inline Json to_json(const Algebra& a) {
  Json blocks = Json::array();
  for (const auto& b : a.blocks()) blocks.push_back({{"dim", b.dim}, {"weight", b.weight}});
  return blocks;
}

inline Algebra algebra_from_json(const Json& blocks) {
  if (!blocks.is_array() || blocks.empty()) throw InputError("\"blocks\" must be a nonempty array");
  std::vector<Block> out;
  for (const auto& b : blocks) out.push_back({detail::field<int>(b, "dim"), b.value("weight", 1.0)});
  try {
    return Algebra(std::move(out));
  } catch (const Error& e) {
    throw InputError(e.what());
  }
}

inline Json to_json(const TracialOperator& x) {
  Json mats = Json::array();
  for (const auto& m : x.blocks()) {
    Json entries = Json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      for (Eigen::Index j = 0; j < m.cols(); ++j) entries.push_back({m(i, j).real(), m(i, j).imag()});
    }
    mats.push_back(std::move(entries));
  }
  return {{"blocks", to_json(x.algebra())}, {"matrices", mats}};
}

/// Entries are row-major [re, im] pairs; a bare number is read as real.
inline TracialOperator operator_from_json(const Json& j) {
  const auto a = algebra_from_json(j.value("blocks", Json()));
  const auto& mats = j.value("matrices", Json());
  if (!mats.is_array() || mats.size() != a.num_blocks()) throw InputError("\"matrices\" needs one entry list per block");
  std::vector<Matrix> blocks;
  for (std::size_t b = 0; b < a.num_blocks(); ++b) {
    const int n = a.dim(b);
    const auto& e = mats[b];
    if (!e.is_array() || e.size() != static_cast<std::size_t>(n) * static_cast<std::size_t>(n))
      throw InputError("block " + std::to_string(b) + " needs dim*dim entries");
    Matrix m(n, n);
    for (int i = 0; i < n; ++i) {
      for (int k = 0; k < n; ++k) {
        const auto& v = e[static_cast<std::size_t>(i * n + k)];
        if (v.is_number()) {
          m(i, k) = Complex(v.get<double>(), 0.0);
        } else if (v.is_array() && v.size() == 2) {
          m(i, k) = Complex(v[0].get<double>(), v[1].get<double>());
        } else {
          throw InputError("matrix entries must be [re, im] pairs");
        }
      }
    }
    blocks.push_back(std::move(m));
  }
  return {a, std::move(blocks)};
}

// ---------------------------------------------------------------------------
// Filtrations and nets

/// A level is a list of parts; a part is either a list of [block, index]
/// sites (a full matrix group) or {"m": m, "sites": [...]} (m x m copies).
inline Json to_json(const SubalgebraLevel& level) {
  Json parts = Json::array();
  for (const auto& g : level) {
    Json sites = Json::array();
    for (const auto& [b, i] : g.sites) sites.push_back({b, i});
    if (g.copies() == 1) {
      parts.push_back(std::move(sites));
    } else {
      parts.push_back({{"m", g.m}, {"sites", std::move(sites)}});
    }
  }
  return parts;
}

inline SubalgebraLevel level_from_json(const Json& j) {
  if (!j.is_array()) throw InputError("a filtration level must be a list of parts");
  SubalgebraLevel level;
  for (const auto& part : j) {
    SiteGroup g;
    const Json* sites = &part;
    if (part.is_object()) {
      g.m = detail::field<int>(part, "m");
      sites = &part.at("sites");
    }
    if (!sites->is_array()) throw InputError("a part must list its sites");
    for (const auto& s : *sites) {
      if (!s.is_array() || s.size() != 2) throw InputError("a site must be [block, index]");
      g.sites.emplace_back(s[0].get<int>(), s[1].get<int>());
    }
    if (!part.is_object()) g.m = static_cast<int>(g.sites.size());
    level.push_back(std::move(g));
  }
  return level;
}

inline Json to_json(const Filtration& f) {
  Json levels = Json::array();
  for (const auto& l : f.levels()) levels.push_back(to_json(l));
  return {{"blocks", to_json(f.algebra())}, {"levels", levels}};
}

/// Either explicit {"blocks", "levels"} or a named family:
/// {"kind": "dyadic_matrix", "depth": d, "first": j0, "weight": w},
/// {"kind": "dyadic_atoms", "depth": d, "weights": [...]}, {"kind": "trivial", "blocks": [...]}.
inline Filtration filtration_from_json(const Json& j) {
  try {
    if (j.contains("kind")) {
      const auto kind = j["kind"].get<std::string>();
      if (kind == "dyadic_matrix")
        return Filtration::dyadic_matrix(detail::field<int>(j, "depth"), j.value("first", 0), j.value("weight", 1.0));
      if (kind == "dyadic_atoms")
        return Filtration::dyadic_atoms(detail::field<int>(j, "depth"), j.value("weights", std::vector<double>{}));
      if (kind == "trivial") return Filtration::trivial(algebra_from_json(j.value("blocks", Json())));
      throw ConfigError("unknown filtration kind \"" + kind + "\"");
    }
    std::vector<SubalgebraLevel> levels;
    for (const auto& l : j.value("levels", Json::array())) levels.push_back(level_from_json(l));
    return {algebra_from_json(j.value("blocks", Json())), std::move(levels)};
  } catch (const Json::exception& e) {
    throw InputError(std::string("filtration: ") + e.what());
  }
}

/// {"construction": "conditional_expectation", "filtration": {...}, "c1": 1}
/// {"construction": "pinching", "blocks": [...], "partitions": [level, ...]}
inline MaximalNet net_from_json(const Json& j) {
  const auto kind = detail::field<std::string>(j, "construction");
  if (kind == "conditional_expectation") {
    return conditional_expectation_net(filtration_from_json(j.value("filtration", Json::object())), j.value("c1", 1.0));
  }
  if (kind == "pinching") {
    const auto a = algebra_from_json(j.value("blocks", Json()));
    std::vector<SubalgebraLevel> parts;
    for (const auto& l : j.value("partitions", Json::array())) parts.push_back(level_from_json(l));
    return pinching_net(a, parts);
  }
  throw ConfigError("unknown net construction \"" + kind + "\"");
}

// ---------------------------------------------------------------------------
// Windows, spaces, majorants

inline Json to_json(const ExponentWindow& w) {
  return {{"p", w.p}, {"pprime", w.p_prime}, {"qprime", detail::exponent_json(w.q_prime)}, {"q", detail::exponent_json(w.q)}};
}

inline ExponentWindow window_from_json(const Json& j) {
  const double q = detail::exponent_from(j.value("q", Json("inf")), "q");
  const double qp = detail::exponent_from(j.value("qprime", Json("inf")), "qprime");
  return ExponentWindow::make(detail::field<double>(j, "p"), detail::field<double>(j, "pprime"), q, qp);
}

/// "lp:2", "lorentz:2,1", "orlicz:power:3", "orlicz:mix:1.5,3"
inline SpaceDescriptor space_from_string(const std::string& s) {
  auto nums = [](const std::string& t) {
    std::vector<double> v;
    std::stringstream ss(t);
    std::string tok;
    while (std::getline(ss, tok, ',')) v.push_back(std::stod(tok));
    return v;
  };
  try {
    if (s.rfind("lp:", 0) == 0) return SpaceDescriptor::lp(std::stod(s.substr(3)));
    if (s.rfind("lorentz:", 0) == 0) {
      const auto v = nums(s.substr(8));
      if (v.size() == 2) return SpaceDescriptor::lorentz(v[0], v[1]);
    }
    if (s.rfind("orlicz:power:", 0) == 0) return SpaceDescriptor::orlicz(OrliczFunction::power(std::stod(s.substr(13))));
    if (s.rfind("orlicz:mix:", 0) == 0) {
      const auto v = nums(s.substr(11));
      if (v.size() == 2) return SpaceDescriptor::orlicz(OrliczFunction::power_mix(v[0], v[1]));
    }
  } catch (const std::logic_error&) {
  }
  throw ConfigError("cannot parse space \"" + s + "\"");
}

inline Json to_json(const InterpolationConstants& c) {
  return {{"C_p", c.c_p}, {"C_q", c.c_q}, {"kappa", c.kappa}, {"gamma", c.gamma}, {"delta", c.delta}, {"K", c.K}};
}

inline Json to_json(const MajorantResult& r) {
  static const char* kinds[] = {"projection", "commutative", "general"};
  Json ladder = Json::array();
  for (const auto& st : r.ladder) ladder.push_back({{"k", st.k}, {"tau_d", st.d.trace()}, {"coefficient", st.coefficient}});
  Json groups = Json::array();
  for (const auto& g : r.groups) {
    groups.push_back({{"k_lo", g.k_lo == std::numeric_limits<int>::min() ? Json("-inf") : Json(g.k_lo)},
                      {"k_hi", g.k_hi},
                      {"coefficient", g.coefficient},
                      {"tau_f", g.tau_f}});
  }
  const auto& c = r.certificate;
  Json cert = {{"holds", c.holds},
               {"order_margins", c.order_margins},
               {"mu_excess", c.mu_excess},
               {"mu_excess_t", c.mu_excess_t}};
  if (r.kind != MajorantResult::Kind::kGeneral) cert["trace_bound_excess"] = c.trace_bound_excess;
  if (r.kind == MajorantResult::Kind::kCommutative) cert["commutation_residue"] = c.commutation_residue;
  if (r.kind == MajorantResult::Kind::kGeneral) {
    cert["sandwich_margin"] = c.sandwich_margin;
    cert["identity_error"] = c.identity_error;
  }
  Json out = {{"kind", kinds[static_cast<int>(r.kind)]},
              {"window", to_json(r.window)},
              {"constants", to_json(r.constants)},
              {"bound_factor", r.bound_factor},
              {"certificate", cert},
              {"mu_a", to_json(mu(r.a))},
              {"a", to_json(r.a)}};
  if (r.kind != MajorantResult::Kind::kGeneral) {
    out["k_max"] = r.k_max;
    out["k_floor"] = r.k_floor;
    out["ladder"] = ladder;
    out["e_minus_inf"] = {{"tau", r.e_minus_inf ? r.e_minus_inf->trace() : 0.0},
                          {"coefficient", r.e_minus_inf_coefficient}};
    if (r.top) out["e0_perp"] = {{"tau", r.top->trace()}, {"coefficient", r.top_coefficient}};
  } else {
    out["groups"] = groups;
  }
  return out;
}

}  // namespace ncmax
