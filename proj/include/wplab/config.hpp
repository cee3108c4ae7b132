#pragma once

// Run configuration for the command-line front end: JSON round trip with
// strict key checking, defaults that reproduce the cubic-well experiment.

#include "energy.hpp"
#include "model.hpp"
#include "wigner.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace wplab {

/// Invalid or unreadable configuration (exit code 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GridAxis {
  double lo = 0.0;
  double hi = 0.0;
  int count = 0;
};

struct RunConfig {
  OscillatorFrame frame = OscillatorFrame::unit();
  std::vector<double> potential{0.0, 0.0, 2.0, -0.2};
  int basis_size = 50;
  std::vector<int> states{0, 1, 2, 3};
  GridAxis wigner_x{-4.0, 6.0, 400};
  GridAxis wigner_p{-5.0, 5.0, 400};
  Window profile_x{-3.0, 5.0, 2001};
  Window profile_p{-4.0, 4.0, 2001};
  Window density{-4.0, 6.0, 1001};
  std::string out_dir = "wplab_out";
  std::vector<std::string> formats{"csv", "json", "svg"};
  std::optional<double> negativity_tol;
  std::optional<double> denominator_tol_x;
  std::optional<double> denominator_tol_p;
  int verify_max_nk = 12;
  double perturb_g = 0.0;

  bool wants(const std::string& fmt) const {
    return std::find(formats.begin(), formats.end(), fmt) != formats.end();
  }
  double neg_tol() const { return negativity_tol.value_or(default_negativity_tol(frame)); }
  double den_tol(Axis a) const {
    const auto& o = a == Axis::x ? denominator_tol_x : denominator_tol_p;
    return o.value_or(default_denominator_tol(frame, a));
  }
  const Window& profile(Axis a) const { return a == Axis::x ? profile_x : profile_p; }

  /// Throws ConfigError on any inconsistency.
  void validate() const {
    auto fail = [](const std::string& m) { throw ConfigError("config: " + m); };
    try {
      PolynomialPotential pot(potential);
      if (basis_size < pot.degree() + 2) fail("basis_size too small for the potential degree");
      SpectralBasis basis(basis_size, frame);
      profile_x.validate();
      profile_p.validate();
      density.validate();
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      fail(e.what());
    }
    if (basis_size > 120) fail("basis_size above 120 is not supported");
    std::set<int> seen;
    for (int s : states) {
      if (s < 0 || s >= basis_size) fail("state index " + std::to_string(s) + " outside the basis");
      if (!seen.insert(s).second) fail("duplicate state index " + std::to_string(s));
    }
    for (const auto* g : {&wigner_x, &wigner_p}) {
      if (!(g->hi > g->lo) || g->count < 2) fail("wigner grid axis needs lo < hi and count >= 2");
    }
    for (const auto& f : formats) {
      if (f != "csv" && f != "json" && f != "svg") fail("unknown format '" + f + "'");
    }
    if (out_dir.empty()) fail("empty output directory");
    for (const auto& t : {negativity_tol, denominator_tol_x, denominator_tol_p}) {
      if (t && !(*t > 0.0)) fail("tolerances must be positive");
    }
    if (verify_max_nk < 0 || verify_max_nk > 20) fail("verify.max_nk must be in [0, 20]");
    if (!std::isfinite(perturb_g)) fail("verify.perturb_g must be finite");
  }
};

namespace detail {

inline nlohmann::ordered_json window_json(const Window& w) {
  return {{"lo", w.lo}, {"hi", w.hi}, {"samples", w.samples}};
}
inline nlohmann::ordered_json grid_json(const GridAxis& g) { return {{"lo", g.lo}, {"hi", g.hi}, {"count", g.count}}; }
inline nlohmann::ordered_json opt_json(const std::optional<double>& v) {
  return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
}

inline void check_keys(const nlohmann::json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError("config: '" + where + "' must be an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || it.key() == a;
    if (!ok) throw ConfigError("config: unknown key '" + where + "." + it.key() + "'");
  }
}

inline Window window_from(const nlohmann::json& j, Window w, const std::string& where) {
  check_keys(j, {"lo", "hi", "samples"}, where);
  w.lo = j.value("lo", w.lo);
  w.hi = j.value("hi", w.hi);
  w.samples = j.value("samples", w.samples);
  return w;
}

inline GridAxis grid_from(const nlohmann::json& j, GridAxis g, const std::string& where) {
  check_keys(j, {"lo", "hi", "count"}, where);
  g.lo = j.value("lo", g.lo);
  g.hi = j.value("hi", g.hi);
  g.count = j.value("count", g.count);
  return g;
}

inline std::optional<double> opt_from(const nlohmann::json& j, const char* key, std::optional<double> cur) {
  if (!j.contains(key)) return cur;
  if (j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<double>();
}

}  // namespace detail

/// Canonical JSON form, fixed key order.
inline nlohmann::ordered_json to_json(const RunConfig& c) {
  nlohmann::ordered_json j;
  j["frame"] = {{"mass", c.frame.mass()}, {"omega", c.frame.omega()}, {"hbar", c.frame.hbar()}};
  j["potential"] = c.potential;
  j["basis_size"] = c.basis_size;
  j["states"] = c.states;
  j["wigner_grid"] = {{"x", detail::grid_json(c.wigner_x)}, {"p", detail::grid_json(c.wigner_p)}};
  j["profile"] = {{"x", detail::window_json(c.profile_x)}, {"p", detail::window_json(c.profile_p)}};
  j["density"] = detail::window_json(c.density);
  j["output"] = {{"dir", c.out_dir}, {"formats", c.formats}};
  j["tolerances"] = {{"negativity", detail::opt_json(c.negativity_tol)},
                     {"denominator_x", detail::opt_json(c.denominator_tol_x)},
                     {"denominator_p", detail::opt_json(c.denominator_tol_p)}};
  j["verify"] = {{"max_nk", c.verify_max_nk}, {"perturb_g", c.perturb_g}};
  return j;
}

/// Overlays the keys present in `j` onto `base`.
inline RunConfig config_from_json(const nlohmann::json& j, RunConfig c = {}) {
  try {
    detail::check_keys(j, {"frame", "potential", "basis_size", "states", "wigner_grid", "profile", "density", "output",
                           "tolerances", "verify"},
                       "root");
    if (j.contains("frame")) {
      const auto& f = j.at("frame");
      detail::check_keys(f, {"mass", "omega", "hbar"}, "frame");
      c.frame = OscillatorFrame(f.value("mass", c.frame.mass()), f.value("omega", c.frame.omega()),
                                f.value("hbar", c.frame.hbar()));
    }
    if (j.contains("potential")) c.potential = j.at("potential").get<std::vector<double>>();
    if (j.contains("basis_size")) c.basis_size = j.at("basis_size").get<int>();
    if (j.contains("states")) c.states = j.at("states").get<std::vector<int>>();
    if (j.contains("wigner_grid")) {
      const auto& g = j.at("wigner_grid");
      detail::check_keys(g, {"x", "p"}, "wigner_grid");
      if (g.contains("x")) c.wigner_x = detail::grid_from(g.at("x"), c.wigner_x, "wigner_grid.x");
      if (g.contains("p")) c.wigner_p = detail::grid_from(g.at("p"), c.wigner_p, "wigner_grid.p");
    }
    if (j.contains("profile")) {
      const auto& g = j.at("profile");
      detail::check_keys(g, {"x", "p"}, "profile");
      if (g.contains("x")) c.profile_x = detail::window_from(g.at("x"), c.profile_x, "profile.x");
      if (g.contains("p")) c.profile_p = detail::window_from(g.at("p"), c.profile_p, "profile.p");
    }
    if (j.contains("density")) c.density = detail::window_from(j.at("density"), c.density, "density");
    if (j.contains("output")) {
      const auto& o = j.at("output");
      detail::check_keys(o, {"dir", "formats"}, "output");
      c.out_dir = o.value("dir", c.out_dir);
      if (o.contains("formats")) c.formats = o.at("formats").get<std::vector<std::string>>();
    }
    if (j.contains("tolerances")) {
      const auto& t = j.at("tolerances");
      detail::check_keys(t, {"negativity", "denominator_x", "denominator_p"}, "tolerances");
      c.negativity_tol = detail::opt_from(t, "negativity", c.negativity_tol);
      c.denominator_tol_x = detail::opt_from(t, "denominator_x", c.denominator_tol_x);
      c.denominator_tol_p = detail::opt_from(t, "denominator_p", c.denominator_tol_p);
    }
    if (j.contains("verify")) {
      const auto& v = j.at("verify");
      detail::check_keys(v, {"max_nk", "perturb_g"}, "verify");
      c.verify_max_nk = v.value("max_nk", c.verify_max_nk);
      c.perturb_g = v.value("perturb_g", c.perturb_g);
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return c;
}

inline RunConfig load_config(const std::string& path, RunConfig base = {}) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ConfigError("config: '" + path + "' is not valid JSON: " + e.what());
  }
  return config_from_json(j, std::move(base));
}

/// Splits "a,b,c" into doubles; throws ConfigError naming `what`.
inline std::vector<double> parse_number_list(const std::string& text, const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const double v = std::stod(item, &used);
      if (used != item.size() && item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(item);
      out.push_back(v);
    } catch (const std::exception&) {
      throw ConfigError("config: bad number '" + item + "' in " + what);
    }
  }
  if (out.empty()) throw ConfigError("config: empty list for " + what);
  return out;
}

/// %.17g, the fixed numeric format of every CSV output.
inline std::string fmt17(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace wplab
