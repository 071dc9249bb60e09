#pragma once

#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "qcarleson/lambda_sets.hpp"
#include "qcarleson/multiplier.hpp"
#include "qcarleson/operators.hpp"

namespace qcarleson::io {

using json = nlohmann::ordered_json;

// %.17g: round-trips every double and is byte-stable
inline std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
  if (!out.flush()) throw std::runtime_error("write failed: " + path);
}

inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

// ---- covering certificates ----

inline json to_json(const CoveringCertificate& c) {
  json iv = json::array();
  for (const auto& i : c.intervals)
    iv.push_back({{"num", i.num.str()}, {"den", i.den.str()}, {"center", i.center}, {"half_width", i.half_width}});
  return {{"t", c.t}, {"N", c.N()}, {"C_lambda", c.C_lambda}, {"d", c.d}, {"intervals", std::move(iv)}};
}

inline CoveringCertificate certificate_from_json(const json& j) {
  CoveringCertificate c;
  c.t = j.at("t").get<double>();
  c.C_lambda = j.at("C_lambda").get<double>();
  c.d = j.at("d").get<double>();
  for (const auto& i : j.at("intervals")) {
    CoverInterval iv;
    iv.num = cpp_int(i.at("num").get<std::string>());
    iv.den = cpp_int(i.at("den").get<std::string>());
    iv.center = i.at("center").get<double>();
    iv.half_width = i.at("half_width").get<double>();
    c.intervals.push_back(std::move(iv));
  }
  if (j.at("N").get<std::size_t>() != c.N()) throw std::invalid_argument("certificate: N does not match the interval count");
  return c;
}

// ---- modulation sets: JSON array of decimal strings ----

inline json to_json(const LambdaSet& s) {
  json a = json::array();
  for (double p : s.points) a.push_back(num(p));
  return a;
}

// strings parse with strtod (round to nearest); plain numbers are accepted too
inline LambdaSet lambda_set_from_json(const json& j) {
  if (!j.is_array()) throw std::invalid_argument("lambda file: expected a JSON array");
  std::vector<double> xs;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const auto& e = j[i];
    if (e.is_number()) {
      xs.push_back(e.get<double>());
      continue;
    }
    if (!e.is_string()) throw std::invalid_argument("lambda file: entry " + std::to_string(i) + " is not a string");
    const auto str = e.get<std::string>();
    char* end = nullptr;
    const double v = std::strtod(str.c_str(), &end);
    if (str.empty() || *end != '\0')
      throw std::invalid_argument("lambda file: entry " + std::to_string(i) + " is not a decimal: " + str);
    xs.push_back(v);
  }
  if (xs.empty()) throw std::invalid_argument("lambda file: empty set");
  return LambdaSet::from_doubles(xs);
}

// ---- signals ----

inline json to_json(const Signal& s) {
  json a = json::array();
  for (const auto& v : s.samples) a.push_back({v.real(), v.imag()});
  return {{"origin", s.origin}, {"samples", std::move(a)}};
}

inline Signal signal_from_json(const json& j) {
  Signal s;
  s.origin = j.at("origin").get<std::int64_t>();
  for (const auto& v : j.at("samples")) {
    if (!v.is_array() || v.size() != 2) throw std::invalid_argument("signal: samples must be [re, im] pairs");
    s.samples.emplace_back(v[0].get<double>(), v[1].get<double>());
  }
  s.validate();
  return s;
}

// ---- CSV ----

class Csv {
 public:
  explicit Csv(std::vector<std::string> header) : width_(header.size()) { line(header); }

  template <class... T>
  void row(const T&... xs) {
    static_assert(sizeof...(T) > 0);
    std::vector<std::string> cells{cell(xs)...};
    if (cells.size() != width_) throw std::logic_error("csv: row width mismatch");
    line(cells);
  }

  const std::string& str() const { return text_; }

 private:
  static std::string cell(double x) { return num(x); }
  static std::string cell(const std::string& s) { return s; }
  static std::string cell(const char* s) { return s; }
  template <class I>
  static std::enable_if_t<std::is_integral_v<I>, std::string> cell(I x) {
    return std::to_string(x);
  }

  void line(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) text_ += ',';
      text_ += cells[i];
    }
    text_ += '\n';
  }

  std::size_t width_;
  std::string text_;
};

// ---- reports ----

inline json to_json(const DecayReport& r) {
  const auto& c = r.config;
  json rows = json::array();
  for (const auto& w : r.rows)
    rows.push_back({{"j", w.j},
                    {"sup_abs_Ej", w.sup_E},
                    {"sup_major_error", w.sup_major_error},
                    {"sup_L_off_major", w.sup_L_off},
                    {"derivative_constant", w.derivative_constant},
                    {"samples", w.samples},
                    {"sampled_boxes", w.boxes},
                    {"qmax", w.qmax}});
  return {{"seed", c.seed},
          {"params",
           {{"epsilon", c.epsilon},
            {"j_range", {c.j_min, c.j_max}},
            {"grid", c.grid},
            {"box_points", c.box_points},
            {"fine_box_points", c.fine_box_points},
            {"fine_q", c.fine_q},
            {"max_boxes", c.max_boxes},
            {"derivative_points", c.derivative_points},
            {"tol", c.tol}}},
          {"rows", std::move(rows)},
          {"slopes",
           {{"sup_abs_Ej", r.slope_E}, {"major_error", r.slope_major_error}, {"L_off_major", r.slope_L_off}}},
          {"constants", {{"derivative", r.derivative_constant}}}};
}

inline std::string decay_csv(const DecayReport& r) {
  Csv csv({"j", "sup_abs_Ej", "slope_to_date"});
  for (std::size_t i = 0; i < r.rows.size(); ++i) {
    std::vector<DecayRow> head(r.rows.begin(), r.rows.begin() + static_cast<std::ptrdiff_t>(i + 1));
    csv.row(r.rows[i].j, r.rows[i].sup_E, detail::fit_log2_slope(head, &DecayRow::sup_E));
  }
  return csv.str();
}

inline json to_json(const NormProbeReport& r) {
  json rows = json::array(), ratios = json::array();
  for (const auto& w : r.rows) {
    rows.push_back({{"length", w.length},
                    {"radius", w.radius},
                    {"max_ratio", w.max_ratio},
                    {"worst_trial", w.worst_trial},
                    {"growth", w.growth}});
    ratios.push_back(w.max_ratio);
  }
  const double top = r.rows.size() >= 2 ? r.rows.back().growth : 1.0;
  return {{"seed", r.config.seed},
          {"params",
           {{"lengths", r.config.lengths}, {"trials", r.config.trials}, {"radius_factor", r.config.radius_factor}}},
          {"ratios", std::move(ratios)},
          {"rows", std::move(rows)},
          {"slopes", {{"growth_top_doubling", top}}}};
}

inline std::string norm_probe_csv(const NormProbeReport& r) {
  Csv csv({"length", "radius", "max_ratio", "growth"});
  for (const auto& w : r.rows) csv.row(w.length, w.radius, w.max_ratio, w.growth);
  return csv.str();
}

inline json to_json(const std::vector<GrowthRow>& rows, const GrowthConfig& c, bool oscillatory) {
  json ratios = json::array(), over = json::array();
  for (const auto& w : rows) {
    ratios.push_back(w.max_ratio);
    over.push_back(w.ratio_over_log2N);
  }
  json params = {{"Ns", c.Ns}, {"trials", c.trials}, {"grid", c.grid}, {"per_octave", c.per_octave}};
  if (oscillatory) {
    params["scales"] = c.scales;
    params["lambda_octaves"] = c.lambda_octaves;
    params["tol"] = c.tol;
  }
  std::vector<double> x, y;
  for (const auto& w : rows)
    if (w.N > 1) {
      x.push_back(std::log2(static_cast<double>(w.N)));
      y.push_back(std::log2(w.max_ratio));
    }
  const double slope = x.size() >= 2 ? fit_line(x, y).slope : 0.0;
  return {{"seed", c.seed},
          {"params", std::move(params)},
          {"ratios", std::move(ratios)},
          {"ratio_over_log2N", std::move(over)},
          {"slopes", {{"log2_ratio_vs_log2N", slope}}}};
}

inline std::string growth_csv(const std::vector<GrowthRow>& rows) {
  Csv csv({"N", "max_ratio", "ratio_over_log2N"});
  for (const auto& w : rows) csv.row(w.N, w.max_ratio, w.ratio_over_log2N);
  return csv.str();
}

inline json to_json(const SingleLReport& r) {
  json ratios = json::array(), grids = json::array();
  for (const auto& w : r.rows) {
    ratios.push_back(w.max_ratio);
    grids.push_back(w.grid);
  }
  return {{"seed", r.config.seed},
          {"params",
           {{"ls", r.config.ls},
            {"scales", r.config.scales},
            {"per_octave", r.config.per_octave},
            {"gaussian_trials", r.config.gaussian_trials}}},
          {"grids", std::move(grids)},
          {"ratios", std::move(ratios)},
          {"slopes", {{"log2_ratio_vs_l", r.slope}}}};
}

inline std::string single_l_csv(const SingleLReport& r) {
  Csv csv({"l", "grid", "max_ratio"});
  for (const auto& w : r.rows) csv.row(w.l, w.grid, w.max_ratio);
  return csv.str();
}

}  // namespace qcarleson::io
