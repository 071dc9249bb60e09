#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qcarleson/io.hpp"

using namespace qcarleson;
using io::json;

namespace {

struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Failure {
  std::string metric;
  double value, threshold;
};

// Defaults for every command. Keys double as config-file fields and, with
// '_' written as '-', as command-line flags.
const std::map<std::string, json>& defaults() {
  static const std::map<std::string, json> table = {
      {"gauss", {{"qmax", 16}}},
      {"shell", {{"s", 3}}},
      {"multiplier-sample", {{"j", 10}, {"grid", 64}, {"field", "E"}, {"epsilon", 0.1}, {"tol", 1e-10}}},
      {"approx-error",
       {{"jmin", 8},
        {"jmax", 18},
        {"epsilon", 0.1},
        {"grid", 512},
        {"box_points", 9},
        {"fine_box_points", 25},
        {"fine_q", 2},
        {"max_boxes", 48},
        {"derivative_points", 50},
        {"seed", 1},
        {"tol", 1e-10}}},
      {"cantor", {{"cantor", {2, 6}}}},
      {"cover", {{"cantor", {2, 6}}, {"lambda", ""}, {"t_exp", 3}, {"t", 0.0}, {"den_cap", 1000000}}},
      {"maximal",
       {{"cantor", {3, 4}}, {"lambda", ""}, {"signal", ""}, {"length", 256}, {"radius", 1024}, {"seed", 1}}},
      {"norm-probe",
       {{"cantor", {3, 5}},
        {"lambda", ""},
        {"lengths", {256, 512, 1024, 2048, 4096}},
        {"trials", 200},
        {"radius_factor", 4},
        {"seed", 1}}},
      {"bourgain-growth",
       {{"ns", {2, 4, 8, 16, 32, 64}}, {"trials", 100}, {"grid", 32768}, {"per_octave", 8}, {"seed", 1}}},
      {"oscillatory-growth",
       {{"ns", {4, 16, 64}},
        {"trials", 20},
        {"grid", 32768},
        {"per_octave", 8},
        {"scales", 5},
        {"lambda_octaves", 6},
        {"tol", 1e-10},
        {"seed", 1}}},
      {"single-l",
       {{"ls", {0, 2, 4, 6, 8, 10, 12}}, {"scales", 4}, {"per_octave", 8}, {"trials", 4}, {"seed", 1}}},
  };
  return table;
}

const std::map<std::string, std::string>& descriptions() {
  static const std::map<std::string, std::string> d = {
      {"gauss", "complete Gauss sums for all reduced (A,B,Q), Q <= qmax (CSV)"},
      {"shell", "reduced triples of one dyadic shell (CSV)"},
      {"multiplier-sample", "M_j, L_j or E_j on a uniform grid (CSV)"},
      {"approx-error", "error decay sweep over j (JSON, optional CSV)"},
      {"cantor", "Cantor-type modulation set (JSON array of decimals)"},
      {"cover", "verified covering certificate (JSON)"},
      {"maximal", "truncated maximal operator applied to one signal (JSON)"},
      {"norm-probe", "l2 ratio probe over signal lengths (JSON, optional CSV)"},
      {"bourgain-growth", "multi-frequency maximal growth in N (JSON, optional CSV)"},
      {"oscillatory-growth", "oscillatory maximal growth in N (JSON, optional CSV)"},
      {"single-l", "single-scale maximal decay in l (JSON, optional CSV)"},
  };
  return d;
}

bool has_csv(const std::string& cmd) {
  return cmd == "approx-error" || cmd == "norm-probe" || cmd == "bourgain-growth" || cmd == "oscillatory-growth" ||
         cmd == "single-l";
}

std::string flag_name(std::string key) {
  for (auto& c : key)
    if (c == '_') c = '-';
  return "--" + key;
}

std::int64_t parse_int(const std::string& s, const std::string& where) {
  std::size_t pos = 0;
  long long v = 0;
  try {
    v = std::stoll(s, &pos);
  } catch (const std::exception&) {
    throw config_error(where + ": expected an integer, got '" + s + "'");
  }
  if (pos != s.size()) throw config_error(where + ": expected an integer, got '" + s + "'");
  return v;
}

double parse_real(const std::string& s, const std::string& where) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || *end != '\0' || !std::isfinite(v)) throw config_error(where + ": expected a number, got '" + s + "'");
  return v;
}

json from_tokens(const json& like, const std::vector<std::string>& tokens, const std::string& where) {
  if (like.is_array()) {
    json a = json::array();
    for (const auto& tok : tokens) {
      std::size_t start = 0;
      while (start <= tok.size()) {
        const auto comma = tok.find(',', start);
        const auto part = tok.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
        if (!part.empty()) a.push_back(parse_int(part, where));
        if (comma == std::string::npos) break;
        start = comma + 1;
      }
    }
    if (a.empty()) throw config_error(where + ": expected a list of integers");
    return a;
  }
  if (tokens.size() != 1) throw config_error(where + ": expected a single value");
  if (like.is_number_integer()) return parse_int(tokens[0], where);
  if (like.is_number()) return parse_real(tokens[0], where);
  return tokens[0];
}

bool same_kind(const json& like, const json& v) {
  if (like.is_array()) {
    if (!v.is_array() || v.empty()) return false;
    for (const auto& e : v)
      if (!e.is_number_integer()) return false;
    return true;
  }
  if (like.is_number_integer()) return v.is_number_integer();
  if (like.is_number()) return v.is_number();
  return v.is_string();
}

json load_config(const std::string& path, const std::string& cmd, json resolved) {
  std::string text;
  try {
    text = io::read_file(path);
  } catch (const std::exception& e) {
    throw config_error(e.what());
  }
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1;
    for (std::size_t i = 0; i < std::min(e.byte, text.size()); ++i)
      if (text[i] == '\n') ++line;
    throw config_error(path + ":" + std::to_string(line) + ": " + e.what());
  }
  if (!j.is_object()) throw config_error(path + ": expected a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (key == "command") {
      if (value != cmd) throw config_error(path + ": field 'command' names a different command");
      continue;
    }
    if (!resolved.contains(key)) throw config_error(path + ": field '" + key + "' is not used by '" + cmd + "'");
    if (!same_kind(resolved[key], value)) throw config_error(path + ": field '" + key + "' has the wrong type");
    resolved[key] = value;
  }
  return resolved;
}

void validate(const json& c) {
  auto need = [&](bool ok, const std::string& key, const std::string& what) {
    if (!ok) throw config_error("field '" + key + "': " + what);
  };
  for (const auto& [key, v] : c.items()) {
    if (key == "epsilon") need(v.get<double>() > 0.0 && v.get<double>() < 1.0 / 7.0, key, "must lie in (0, 1/7)");
    if (key == "tol") need(v.get<double>() >= 1e-14 && v.get<double>() <= 1e-6, key, "must lie in [1e-14, 1e-6]");
    if (key == "seed") need(v.get<std::int64_t>() >= 0, key, "must be >= 0");
    if (key == "qmax" || key == "grid" || key == "trials" || key == "radius" || key == "radius_factor" ||
        key == "length" || key == "s" || key == "den_cap" || key == "per_octave" || key == "scales" ||
        key == "lambda_octaves" || key == "max_boxes" || key == "derivative_points" || key == "fine_q")
      need(v.get<std::int64_t>() >= 1, key, "must be >= 1");
    if (key == "j" || key == "jmin" || key == "jmax") need(v.get<std::int64_t>() >= 0, key, "must be >= 0");
    if (key == "field") need(v == "M" || v == "L" || v == "E", key, "must be M, L or E");
    if (key == "cantor") need(v.size() == 2 && v[0].get<int>() >= 2 && v[1].get<int>() >= 1, key, "expects D >= 2 and depth >= 1");
    if (key == "t") need(v.get<double>() >= 0.0 && v.get<double>() < 1.0, key, "must lie in (0,1), or 0 to use t_exp");
  }
  if (c.contains("qmax"))
    need(c["qmax"].get<std::int64_t>() <= 128, "qmax", "CSV emission is capped at 128");
  if (c.contains("jmin")) need(c["jmin"].get<int>() <= c["jmax"].get<int>(), "jmin", "empty j range");
  if (c.contains("grid") && c.contains("field")) need(c["grid"].get<int>() <= 1024, "grid", "must be <= 1024");
}

LambdaSet load_set(const json& c) {
  const auto path = c["lambda"].get<std::string>();
  if (!path.empty()) {
    try {
      return io::lambda_set_from_json(json::parse(io::read_file(path)));
    } catch (const json::parse_error& e) {
      throw config_error(path + ": " + e.what());
    } catch (const std::runtime_error& e) {
      throw config_error(e.what());
    }
  }
  return cantor_set(c["cantor"][0].get<int>(), c["cantor"][1].get<int>());
}

template <class T>
std::vector<T> list(const json& v) {
  std::vector<T> out;
  for (const auto& e : v) out.push_back(e.get<T>());
  return out;
}

struct Artifacts {
  std::string primary;
  std::string csv;
  std::vector<Failure> failures;
};

json wrap(const std::string& cmd, const json& c, json body) {
  json out = {{"command", cmd}, {"config", c}};
  for (auto& [k, v] : body.items()) out[k] = v;
  return out;
}

Artifacts run_gauss(const json& c, bool check) {
  const auto qmax = c["qmax"].get<std::int64_t>();
  io::Csv csv({"Q", "A", "B", "re_S", "im_S", "abs_S"});
  for (std::int64_t Q = 1; Q <= qmax; ++Q) {
    const auto roots = roots_of_unity(Q);
    for (std::int64_t A = 0; A < Q; ++A) {
      const auto row = gauss_sums_over_b(A, Q, &roots);
      const std::int64_t g = std::gcd(A, Q);
      for (std::int64_t B = 0; B < Q; ++B)
        if (std::gcd(g, B) == 1) csv.row(Q, A, B, row[B].real(), row[B].imag(), std::abs(row[B]));
    }
  }
  Artifacts a{csv.str(), "", {}};
  if (check) {
    const auto law = gauss_modulus_law(qmax);
    if (law.max_deviation > 1e-12) a.failures.push_back({"gauss_modulus_deviation", law.max_deviation, 1e-12});
  }
  return a;
}

Artifacts run_shell(const json& c) {
  io::Csv csv({"Q", "A", "B"});
  for (const auto& r : enumerate_shell(c["s"].get<int>())) csv.row(r.Q, r.A, r.B);
  return {csv.str(), "", {}};
}

Artifacts run_multiplier_sample(const json& c) {
  const int n = c["grid"].get<int>();
  std::vector<double> axis;
  for (int i = 0; i < n; ++i) axis.push_back(static_cast<double>(i) / n);
  const auto f = c["field"].get<std::string>();
  const Field field = f == "M" ? Field::M : f == "L" ? Field::L : Field::E;
  const auto g = sample_grid(c["j"].get<int>(), c["epsilon"].get<double>(), field, axis, axis, c["tol"].get<double>());
  io::Csv csv({"lambda", "beta", "re", "im", "abs"});
  for (std::size_t i = 0; i < axis.size(); ++i)
    for (std::size_t k = 0; k < axis.size(); ++k) {
      const cplx v = g.at(i, k);
      csv.row(axis[i], axis[k], v.real(), v.imag(), std::abs(v));
    }
  return {csv.str(), "", {}};
}

Artifacts run_approx_error(const json& c, bool check) {
  DecayConfig d;
  d.j_min = c["jmin"].get<int>();
  d.j_max = c["jmax"].get<int>();
  d.epsilon = c["epsilon"].get<double>();
  d.grid = c["grid"].get<int>();
  d.box_points = c["box_points"].get<int>();
  d.fine_box_points = c["fine_box_points"].get<int>();
  d.fine_q = c["fine_q"].get<int>();
  d.max_boxes = c["max_boxes"].get<int>();
  d.derivative_points = c["derivative_points"].get<int>();
  d.seed = c["seed"].get<std::uint64_t>();
  d.tol = c["tol"].get<double>();
  const auto r = decay_report(d);
  Artifacts a{io::dump(wrap("approx-error", c, io::to_json(r))), io::decay_csv(r), {}};
  if (check) {
    if (!(r.slope_E <= -0.05)) a.failures.push_back({"slope_sup_abs_Ej", r.slope_E, -0.05});
    const double major = -(1.0 - 3.0 * d.epsilon) + 0.2;
    if (!(r.slope_major_error <= major)) a.failures.push_back({"slope_major_error", r.slope_major_error, major});
  }
  return a;
}

Artifacts run_cantor(const json& c) {
  return {io::dump(io::to_json(cantor_set(c["cantor"][0].get<int>(), c["cantor"][1].get<int>()))), "", {}};
}

Artifacts run_cover(const json& c, bool check) {
  const auto set = load_set(c);
  double t = c["t"].get<double>();
  if (t == 0.0) {
    const auto e = c["t_exp"].get<int>();
    if (e < 1 || e > 1074) throw config_error("field 't_exp': must lie in [1, 1074]");
    t = std::ldexp(1.0, -e);
  }
  CoveringCertificate cert;
  try {
    cert = cover(set, t, c["den_cap"].get<std::int64_t>());
  } catch (const uncoverable& e) {
    Artifacts a;
    a.failures.push_back({"uncoverable_point", e.witness, t});
    return a;
  }
  json body = io::to_json(cert);
  body["level"] = cert.level;
  Artifacts a{io::dump(wrap("cover", c, std::move(body))), "", {}};
  if (check) {
    const auto v = verify_certificate(set, cert);
    if (!v.ok) a.failures.push_back({"certificate_verification", 0.0, 1.0});
    if (set.cantor) {
      const double bound = 1.0 - std::log2(cert.t) / set.cantor->D;
      for (const auto& iv : cert.intervals)
        if (log2_int(iv.den) > bound + 1e-9) {
          a.failures.push_back({"log2_denominator", log2_int(iv.den), bound});
          break;
        }
    }
  }
  return a;
}

Artifacts run_maximal(const json& c) {
  const auto set = load_set(c);
  Signal f;
  const auto path = c["signal"].get<std::string>();
  if (!path.empty()) {
    try {
      f = io::signal_from_json(json::parse(io::read_file(path)));
    } catch (const json::exception& e) {
      throw config_error(path + ": " + e.what());
    } catch (const std::runtime_error& e) {
      throw config_error(e.what());
    }
  } else {
    Rng rng(c["seed"].get<std::uint64_t>());
    f.samples.resize(c["length"].get<std::size_t>());
    for (auto& v : f.samples) {
      const double re = rng.normal();
      v = {re, rng.normal()};
    }
  }
  const auto out = carleson_max(f, set, c["radius"].get<std::int64_t>());
  const double in = l2_norm(f.samples), on = l2_norm(out.values);
  json body = {{"origin", out.origin},
               {"values", out.values},
               {"input_l2", in},
               {"output_l2", on},
               {"ratio", in == 0.0 ? 0.0 : on / in}};
  return {io::dump(wrap("maximal", c, std::move(body))), "", {}};
}

Artifacts run_norm_probe(const json& c, bool check) {
  NormProbeConfig p;
  p.lengths = list<std::int64_t>(c["lengths"]);
  p.trials = c["trials"].get<int>();
  p.radius_factor = c["radius_factor"].get<std::int64_t>();
  p.seed = c["seed"].get<std::uint64_t>();
  const auto r = norm_probe(load_set(c), p);
  Artifacts a{io::dump(wrap("norm-probe", c, io::to_json(r))), io::norm_probe_csv(r), {}};
  if (check)
    for (std::size_t i = r.rows.size() >= 2 ? r.rows.size() - 2 : r.rows.size(); i < r.rows.size(); ++i)
      if (i > 0 && !(r.rows[i].growth < 1.10))
        a.failures.push_back({"growth_at_length_" + std::to_string(r.rows[i].length), r.rows[i].growth, 1.10});
  return a;
}

GrowthConfig growth_config(const json& c) {
  GrowthConfig g;
  g.Ns = list<int>(c["ns"]);
  g.trials = c["trials"].get<int>();
  g.grid = c["grid"].get<std::size_t>();
  g.per_octave = c["per_octave"].get<int>();
  g.seed = c["seed"].get<std::uint64_t>();
  if (c.contains("scales")) {
    g.scales = c["scales"].get<int>();
    g.lambda_octaves = c["lambda_octaves"].get<int>();
    g.tol = c["tol"].get<double>();
  }
  return g;
}

Artifacts run_growth(const std::string& cmd, const json& c, bool check) {
  const auto g = growth_config(c);
  const bool osc = cmd == "oscillatory-growth";
  const auto rows = osc ? oscillatory_growth(g) : bourgain_growth(g);
  Artifacts a{io::dump(wrap(cmd, c, io::to_json(rows, g, osc))), io::growth_csv(rows), {}};
  if (check) {
    if (osc) {
      for (const auto& r : rows)
        if (!std::isfinite(r.max_ratio)) a.failures.push_back({"max_ratio_N" + std::to_string(r.N), r.max_ratio, 0.0});
    } else {
      const GrowthRow* prev = nullptr;
      for (const auto& r : rows) {
        if (r.N < 8) continue;
        if (prev && r.ratio_over_log2N > prev->ratio_over_log2N)
          a.failures.push_back({"ratio_over_log2N_increase_at_N" + std::to_string(r.N), r.ratio_over_log2N,
                                prev->ratio_over_log2N});
        prev = &r;
      }
    }
  }
  return a;
}

Artifacts run_single_l(const json& c, bool check) {
  SingleLConfig s;
  s.ls = list<int>(c["ls"]);
  s.scales = c["scales"].get<int>();
  s.per_octave = c["per_octave"].get<int>();
  s.gaussian_trials = c["trials"].get<int>();
  s.seed = c["seed"].get<std::uint64_t>();
  const auto r = single_l_sweep(s);
  Artifacts a{io::dump(wrap("single-l", c, io::to_json(r))), io::single_l_csv(r), {}};
  if (check && !(r.slope <= -0.1)) a.failures.push_back({"slope_log2_ratio_vs_l", r.slope, -0.1});
  return a;
}

Artifacts dispatch(const std::string& cmd, const json& c, bool check) {
  if (cmd == "gauss") return run_gauss(c, check);
  if (cmd == "shell") return run_shell(c);
  if (cmd == "multiplier-sample") return run_multiplier_sample(c);
  if (cmd == "approx-error") return run_approx_error(c, check);
  if (cmd == "cantor") return run_cantor(c);
  if (cmd == "cover") return run_cover(c, check);
  if (cmd == "maximal") return run_maximal(c);
  if (cmd == "norm-probe") return run_norm_probe(c, check);
  if (cmd == "bourgain-growth" || cmd == "oscillatory-growth") return run_growth(cmd, c, check);
  if (cmd == "single-l") return run_single_l(c, check);
  throw config_error("unknown command " + cmd);
}

struct Sub {
  CLI::App* app = nullptr;
  std::map<std::string, std::vector<std::string>> values;
  std::map<std::string, CLI::Option*> options;
  std::string config, output, csv;
  bool check = false;
};

int run(int argc, char** argv) {
  CLI::App app{"qcarleson: exponential sums, covering certificates and maximal-operator probes"};
  app.require_subcommand(1);
  std::map<std::string, Sub> subs;
  for (const auto& [cmd, defs] : defaults()) {
    auto& s = subs[cmd];
    s.app = app.add_subcommand(cmd, descriptions().at(cmd));
    for (const auto& [key, value] : defs.items()) {
      auto* opt = s.app->add_option(flag_name(key), s.values[key], "default " + value.dump());
      if (value.is_array()) opt->expected(1, CLI::detail::expected_max_vector_size);
      else opt->expected(1);
      s.options[key] = opt;
    }
    s.app->add_option("--config", s.config, "JSON config; flags take precedence");
    s.app->add_option("--output", s.output, "artifact path (stdout if omitted)");
    if (has_csv(cmd)) s.app->add_option("--csv", s.csv, "CSV companion path");
    s.app->add_flag("--check", s.check, "exit 1 if an acceptance metric fails");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  for (auto& [cmd, s] : subs) {
    if (!s.app->parsed()) continue;
    json c = defaults().at(cmd);
    if (!s.config.empty()) c = load_config(s.config, cmd, c);
    for (const auto& [key, opt] : s.options)
      if (opt->count() > 0) c[key] = from_tokens(c[key], s.values[key], flag_name(key));
    validate(c);

    Artifacts a;
    try {
      a = dispatch(cmd, c, s.check);
    } catch (const cap_exceeded& e) {
      throw config_error(std::string("cap exceeded: ") + e.what());
    } catch (const std::invalid_argument& e) {
      throw config_error(e.what());
    }
    if (!a.primary.empty()) {
      if (s.output.empty()) std::fwrite(a.primary.data(), 1, a.primary.size(), stdout);
      else io::write_file(s.output, a.primary);
    }
    if (!s.csv.empty()) io::write_file(s.csv, a.csv);
    for (const auto& f : a.failures)
      std::fprintf(stderr, "FAIL %s = %s (threshold %s)\n", f.metric.c_str(), io::num(f.value).c_str(),
                   io::num(f.threshold).c_str());
    return a.failures.empty() ? 0 : 1;
  }
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const config_error& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
  }
  return 2;
}
