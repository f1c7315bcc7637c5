#include "sma/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

namespace sma {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<double> parse_numbers(const std::string& text, const std::string& key, int line) {
  std::vector<double> out;
  std::istringstream ss(text);
  std::string tok;
  while (ss >> tok) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc{} || ptr != tok.data() + tok.size() || !std::isfinite(v)) {
      throw ConfigError("key '" + key + "': '" + tok + "' is not a finite number", key, line);
    }
    out.push_back(v);
  }
  return out;
}

double parse_number(const std::string& text, const std::string& key, int line) {
  const auto v = parse_numbers(text, key, line);
  if (v.size() != 1) throw ConfigError("key '" + key + "' expects one number", key, line);
  return v[0];
}

int parse_int(const std::string& text, const std::string& key, int line) {
  int v = 0;
  const std::string t = trim(text);
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc{} || ptr != t.data() + t.size()) {
    throw ConfigError("key '" + key + "' expects an integer", key, line);
  }
  return v;
}

using Setter = std::function<void(double)>;

std::map<std::string, Setter> param_setters(MaterialParams& p) {
  return {
      {"young_austenite", [&p](double v) { p.young_austenite = v; }},
      {"young_martensite", [&p](double v) { p.young_martensite = v; }},
      {"poisson_austenite", [&p](double v) { p.poisson_austenite = v; }},
      {"poisson_martensite", [&p](double v) { p.poisson_martensite = v; }},
      {"caloric_austenite_c0", [&p](double v) { p.caloric_austenite_c0 = v; }},
      {"caloric_austenite_c1", [&p](double v) { p.caloric_austenite_c1 = v; }},
      {"caloric_martensite", [&p](double v) { p.caloric_martensite = v; }},
      {"eta_hat", [&p](double v) { p.eta_hat = v; }},
      {"nu_hat", [&p](double v) { p.nu_hat = v; }},
      {"hardening_k0", [&p](double v) { p.hardening_k0 = v; }},
      {"hardening_k1", [&p](double v) { p.hardening_k1 = v; }},
      {"hardening_k2", [&p](double v) { p.hardening_k2 = v; }},
      {"penalty", [&p](double v) { p.penalty = v; }},
      {"r_lambda", [&p](double v) { p.r_lambda = v; }},
      {"r_alpha", [&p](double v) { p.r_alpha = v; }},
      {"r_plastic", [&p](double v) { p.r_plastic = v; }},
  };
}

std::map<std::string, Setter> solver_setters(SolverSettings& s) {
  const auto as_int = [](double v) { return static_cast<int>(v); };
  return {
      {"t_lambda_rel", [&s](double v) { s.t_lambda_rel = v; }},
      {"t_alpha_rel", [&s](double v) { s.t_alpha_rel = v; }},
      {"t_plastic_rel", [&s](double v) { s.t_plastic_rel = v; }},
      {"t_alpha_beta", [&s](double v) { s.t_alpha_beta = v; }},
      {"delta_alpha_max", [&s](double v) { s.delta_alpha_max = v; }},
      {"max_iterations", [&s, as_int](double v) { s.max_iterations = as_int(v); }},
      {"max_outer_passes", [&s, as_int](double v) { s.max_outer_passes = as_int(v); }},
      {"bisection_tol", [&s](double v) { s.bisection_tol = v; }},
      {"bisection_max_iterations", [&s, as_int](double v) { s.bisection_max_iterations = as_int(v); }},
      {"bracket_max_doublings", [&s, as_int](double v) { s.bracket_max_doublings = as_int(v); }},
      {"fd_step", [&s](double v) { s.fd_step = v; }},
      {"lambda_min", [&s](double v) { s.lambda_min = v; }},
      {"max_backtracks", [&s, as_int](double v) { s.max_backtracks = as_int(v); }},
  };
}

Mat3 axis_angle(const std::vector<double>& axis, double degrees) {
  const double n = std::sqrt(axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]);
  const double x = axis[0] / n, y = axis[1] / n, z = axis[2] / n;
  const double t = degrees * std::numbers::pi / 180.0;
  const double c = std::cos(t), s = std::sin(t), v = 1.0 - c;
  return Mat3({c + x * x * v, x * y * v - z * s, x * z * v + y * s,  //
               y * x * v + z * s, c + y * y * v, y * z * v - x * s,  //
               z * x * v - y * s, z * y * v + x * s, c + z * z * v});
}

}  // namespace

MaterialState RunConfig::initial_state() const {
  switch (initial_phase) {
    case InitialPhase::Austenitic:
      return MaterialState::austenitic(initial_delta);
    case InitialPhase::TwinnedMartensite:
      return MaterialState::twinned_martensite(initial_delta);
    case InitialPhase::Explicit:
      break;
  }
  return MaterialState::with_fractions(initial_lambda);
}

void RunConfig::validate() const {
  try {
    params.validate();
  } catch (const ValidationError& e) {
    throw ConfigError(e.what(), "param", 0);
  }
  try {
    solver.validate();
  } catch (const ValidationError& e) {
    throw ConfigError(e.what(), "solver", 0);
  }
  if (steps.empty()) throw ConfigError("at least one [step] section is required", "[step]", 0);
  for (const auto& st : steps) {
    if (st.increments < 1) throw ConfigError("step '" + st.label + "': increments must be >= 1", "increments", 0);
    bool any_strain = false;
    for (const auto& t : st.targets) any_strain = any_strain || t.mode == Control::Strain;
    if (!any_strain) {
      throw ConfigError("step '" + st.label + "': at least one component must be strain-controlled", "sig", 0);
    }
  }
  if (!(initial_delta > 0.0 && initial_delta < 1.0 / 3.0)) {
    throw ConfigError("initial_delta must lie in (0, 1/3)", "initial_delta", 0);
  }
  try {
    (void)initial_state();
  } catch (const DomainError& e) {
    throw ConfigError(e.what(), "initial_lambda", 0);
  }
}

RunConfig parse_config(std::istream& in) {
  RunConfig cfg;
  auto params = param_setters(cfg.params);
  auto solver = solver_setters(cfg.solver);

  std::vector<double> frame_axis{0.0, 0.0, 1.0};
  double frame_angle = 0.0;
  std::set<std::string> seen;
  LoadStep* step = nullptr;
  std::array<ComponentTarget, 6> inherited{};
  double step_temperature = 0.0;

  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line != "[step]") throw ConfigError("unknown section '" + line + "'", line, line_no);
      if (step) inherited = step->targets;
      step_temperature = step ? step->temperature : cfg.initial_temperature;
      cfg.steps.push_back(LoadStep{});
      step = &cfg.steps.back();
      step->label = "step" + std::to_string(cfg.steps.size());
      step->temperature = step_temperature;
      step->targets = inherited;
      seen.clear();
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("expected 'key = value'", line, line_no);
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("empty key", key, line_no);
    if (!seen.insert(key).second) throw ConfigError("duplicate key '" + key + "'", key, line_no);

    if (step) {
      if (key == "label") {
        step->label = value;
      } else if (key == "increments") {
        step->increments = parse_int(value, key, line_no);
      } else if (key == "temperature") {
        step->temperature = parse_number(value, key, line_no);
      } else if ((key.rfind("eps_", 0) == 0 || key.rfind("sig_", 0) == 0) && key.size() == 6) {
        std::size_t k = 0;
        while (k < 6 && key.substr(4) != kComponentNames[k]) ++k;
        if (k == 6) throw ConfigError("unknown key '" + key + "' in [step]", key, line_no);
        const bool strain = key[0] == 'e';
        const std::string other = std::string(strain ? "sig_" : "eps_") + kComponentNames[k];
        if (seen.count(other)) {
          throw ConfigError("component " + std::string(kComponentNames[k]) + " is both strain- and stress-controlled",
                            key, line_no);
        }
        step->targets[k] = {strain ? Control::Strain : Control::Stress, parse_number(value, key, line_no)};
      } else {
        throw ConfigError("unknown key '" + key + "' in [step]", key, line_no);
      }
      continue;
    }

    if (key == "temperature") {
      cfg.initial_temperature = parse_number(value, key, line_no);
    } else if (key == "initial_phase") {
      if (value == "austenitic") {
        cfg.initial_phase = InitialPhase::Austenitic;
      } else if (value == "twinned-martensite") {
        cfg.initial_phase = InitialPhase::TwinnedMartensite;
      } else if (value == "explicit") {
        cfg.initial_phase = InitialPhase::Explicit;
      } else {
        throw ConfigError("initial_phase must be austenitic, twinned-martensite or explicit", key, line_no);
      }
    } else if (key == "initial_lambda") {
      const auto v = parse_numbers(value, key, line_no);
      if (v.size() != 4) throw ConfigError("initial_lambda expects four numbers", key, line_no);
      cfg.initial_lambda = {v[0], v[1], v[2], v[3]};
    } else if (key == "initial_delta") {
      cfg.initial_delta = parse_number(value, key, line_no);
    } else if (key == "lambda_projection") {
      if (value == "verbatim") {
        cfg.params.lambda_projection = LambdaProjection::Verbatim;
      } else if (value == "unweighted-mean") {
        cfg.params.lambda_projection = LambdaProjection::UnweightedMean;
      } else {
        throw ConfigError("lambda_projection must be verbatim or unweighted-mean", key, line_no);
      }
    } else if (key == "frame_axis") {
      frame_axis = parse_numbers(value, key, line_no);
      if (frame_axis.size() != 3 || frame_axis[0] * frame_axis[0] + frame_axis[1] * frame_axis[1] +
                                            frame_axis[2] * frame_axis[2] == 0.0) {
        throw ConfigError("frame_axis expects a non-zero 3-vector", key, line_no);
      }
    } else if (key == "frame_angle") {
      frame_angle = parse_number(value, key, line_no);
    } else if (key == "output") {
      cfg.output = value;
    } else if (key.rfind("param.", 0) == 0) {
      const auto it = params.find(key.substr(6));
      if (it == params.end()) throw ConfigError("unknown material parameter '" + key + "'", key, line_no);
      it->second(parse_number(value, key, line_no));
    } else if (key.rfind("solver.", 0) == 0) {
      const auto it = solver.find(key.substr(7));
      if (it == solver.end()) throw ConfigError("unknown solver setting '" + key + "'", key, line_no);
      it->second(parse_number(value, key, line_no));
    } else {
      throw ConfigError("unknown key '" + key + "'", key, line_no);
    }
  }

  cfg.frame = axis_angle(frame_axis, frame_angle);
  cfg.validate();
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'", "", 0);
  return parse_config(in);
}

}  // namespace sma
