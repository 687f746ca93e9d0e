#pragma once

// Command-line surface. Every command writes CSV or JSON to a stream and returns an
// exit code: 0 success, 2 invalid input, 3 numeric assertion, 4 reproduction tolerance.

#include "cvsep/detector.hpp"
#include "cvsep/threshold.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace cvsep::cli {

using Json = nlohmann::ordered_json;

enum ExitCode { kExitOk = 0, kExitInvalid = 2, kExitNumeric = 3, kExitTolerance = 4 };

enum class Format { csv, json };

struct RunConfig {
  std::string command;
  std::string input = "fock:1";
  std::optional<double> a;  ///< defaults to the value the input fixes, else 3
  double lambda = 0.5;
  double eta = 0.1;
  double mu = 0.7;
  std::string method;
  bool cross_check = false;
  std::optional<int> fock_cutoff;
  double s_plus = 1.0;
  double s_minus = 1.0;
  double g_min = 0.75;
  double g_max = 1.5;
  std::optional<int> steps;
  std::vector<double> at;
  std::string vary = "mu";
  std::vector<double> values;
  std::optional<double> from;
  std::optional<double> to;
  int terms = 25;
  int points = 401;
  std::optional<Format> format;
  std::string out;
};

// ---------------------------------------------------------------------------
// Parsing

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return std::string(s.substr(b, e - b + 1));
}

namespace detail {

inline bool parse_integer(std::string_view s, long& out) {
  const auto* end = s.data() + s.size();
  const auto [p, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && p == end;
}

inline bool parse_double(std::string_view s, double& out) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  const auto* end = s.data() + s.size();
  const auto [p, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && p == end;
}

}  // namespace detail

/// Decimal or rational literal such as "0.5", "-3" or "1/13". Integer fractions are
/// divided once, after both parts are read exactly.
inline double parse_number(std::string_view text) {
  const std::string s = trim(text);
  const auto bad = [&] { return InvalidArgument("not a number: '" + s + "'"); };
  double v = 0.0;
  if (const auto slash = s.find('/'); slash != std::string::npos) {
    const std::string num = trim(std::string_view(s).substr(0, slash));
    const std::string den = trim(std::string_view(s).substr(slash + 1));
    long ni = 0, di = 0;
    if (detail::parse_integer(num, ni) && detail::parse_integer(den, di)) {
      if (di == 0) throw InvalidArgument("zero denominator in '" + s + "'");
      v = static_cast<double>(ni) / static_cast<double>(di);
    } else {
      double nd = 0.0, dd = 0.0;
      if (!detail::parse_double(num, nd) || !detail::parse_double(den, dd)) throw bad();
      if (dd == 0.0) throw InvalidArgument("zero denominator in '" + s + "'");
      v = nd / dd;
    }
  } else if (!detail::parse_double(s, v)) {
    throw bad();
  }
  if (!std::isfinite(v)) throw bad();
  return v;
}

inline int parse_int(std::string_view text) {
  const std::string s = trim(text);
  long v = 0;
  if (!detail::parse_integer(s, v) || v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max())
    throw InvalidArgument("not an integer: '" + s + "'");
  return static_cast<int>(v);
}

inline std::vector<double> parse_number_list(std::string_view text) {
  std::vector<double> out;
  std::string item;
  std::istringstream in{std::string(text)};
  while (std::getline(in, item, ',')) out.push_back(parse_number(item));
  if (out.empty()) throw InvalidArgument("empty number list");
  return out;
}

inline GaussianityMethod parse_method(const std::string& s) {
  if (s == "wigner_overlap" || s == "overlap") return GaussianityMethod::wigner_overlap;
  if (s == "dual_circuit" || s == "dual") return GaussianityMethod::dual_circuit;
  if (s == "quadrature") return GaussianityMethod::quadrature;
  if (s == "radial_series" || s == "radial") return GaussianityMethod::radial_series;
  throw InvalidArgument("unknown method '" + s + "'");
}

inline Format parse_format(const std::string& s) {
  if (s == "csv") return Format::csv;
  if (s == "json") return Format::json;
  throw InvalidArgument("unknown format '" + s + "' (expected csv or json)");
}

/// vacuum | fock:N | pdc[:A] | custom:p0,p1,... | counterexample:N[:P]
/// `a` is the circuit variance, used by a bare pdc and by --fock-cutoff.
inline StateFamily parse_input(const std::string& text, std::optional<double> a = std::nullopt,
                               std::optional<int> fock_cutoff = std::nullopt) {
  const auto colon = text.find(':');
  const std::string kind = text.substr(0, colon);
  const std::string rest = colon == std::string::npos ? std::string() : text.substr(colon + 1);
  const bool has_arg = colon != std::string::npos;
  if (kind == "vacuum" && !has_arg) return StateFamily::vacuum();
  if (kind == "fock" && has_arg) return StateFamily::fock(parse_int(rest));
  if (kind == "pdc") {
    const std::optional<double> pa = has_arg ? std::optional<double>(parse_number(rest)) : a;
    if (fock_cutoff) {
      if (!pa) throw InvalidArgument("pdc with --fock-cutoff needs a variance");
      return StateFamily::custom(pdc_weights(*pa, *fock_cutoff).weights());
    }
    return StateFamily::pdc(has_arg ? pa : std::nullopt);
  }
  if (kind == "custom" && has_arg) return StateFamily::custom(parse_number_list(rest));
  if (kind == "counterexample" && has_arg) {
    const auto c2 = rest.find(':');
    const int n = parse_int(rest.substr(0, c2));
    double p;
    if (c2 != std::string::npos) {
      p = parse_number(rest.substr(c2 + 1));
    } else {
      const auto roots = counterexample_roots(n);
      if (roots.empty()) throw InvalidArgument("no g = 1 mixture of |0> and |" + std::to_string(n) + ">");
      p = roots.front();
    }
    return StateFamily::custom(counterexample_spec(n, p).weights());
  }
  throw InvalidArgument("unrecognised input '" + text +
                        "' (expected vacuum, fock:N, pdc[:A], custom:p0,p1,... or counterexample:N[:P])");
}

namespace detail {

inline double json_number(const Json& v, const std::string& key) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) return parse_number(v.get<std::string>());
  throw InvalidArgument("config field '" + key + "' must be a number or a numeric string");
}

inline int json_int(const Json& v, const std::string& key) {
  if (v.is_number_integer()) return v.get<int>();
  if (v.is_string()) return parse_int(v.get<std::string>());
  throw InvalidArgument("config field '" + key + "' must be an integer");
}

inline std::string json_string(const Json& v, const std::string& key) {
  if (!v.is_string()) throw InvalidArgument("config field '" + key + "' must be a string");
  return v.get<std::string>();
}

inline bool json_bool(const Json& v, const std::string& key) {
  if (v.is_boolean()) return v.get<bool>();
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "true" || s == "1") return true;
    if (s == "false" || s == "0") return false;
  }
  throw InvalidArgument("config field '" + key + "' must be a boolean");
}

inline std::vector<double> json_list(const Json& v, const std::string& key) {
  if (v.is_string()) return parse_number_list(v.get<std::string>());
  if (!v.is_array()) throw InvalidArgument("config field '" + key + "' must be an array or a comma list");
  std::vector<double> out;
  for (const auto& x : v) out.push_back(json_number(x, key));
  return out;
}

}  // namespace detail

/// Fills a RunConfig from a JSON object whose keys mirror the struct fields.
inline RunConfig config_from_json(const Json& j, RunConfig c = {}) {
  using namespace detail;
  if (!j.is_object()) throw InvalidArgument("config must be a JSON object");
  for (const auto& [key, v] : j.items()) {
    if (key == "command") c.command = json_string(v, key);
    else if (key == "input") c.input = json_string(v, key);
    else if (key == "a") c.a = json_number(v, key);
    else if (key == "lambda") c.lambda = json_number(v, key);
    else if (key == "eta") c.eta = json_number(v, key);
    else if (key == "mu") c.mu = json_number(v, key);
    else if (key == "method") c.method = json_string(v, key);
    else if (key == "cross_check") c.cross_check = json_bool(v, key);
    else if (key == "fock_cutoff") c.fock_cutoff = json_int(v, key);
    else if (key == "splus" || key == "s_plus") c.s_plus = json_number(v, key);
    else if (key == "sminus" || key == "s_minus") c.s_minus = json_number(v, key);
    else if (key == "g_min") c.g_min = json_number(v, key);
    else if (key == "g_max") c.g_max = json_number(v, key);
    else if (key == "steps") c.steps = json_int(v, key);
    else if (key == "at") c.at = json_list(v, key);
    else if (key == "vary") c.vary = json_string(v, key);
    else if (key == "values") c.values = json_list(v, key);
    else if (key == "from") c.from = json_number(v, key);
    else if (key == "to") c.to = json_number(v, key);
    else if (key == "terms") c.terms = json_int(v, key);
    else if (key == "points") c.points = json_int(v, key);
    else if (key == "format") c.format = parse_format(json_string(v, key));
    else if (key == "out") c.out = json_string(v, key);
    else throw InvalidArgument("unknown config field '" + key + "'");
  }
  return c;
}

inline RunConfig load_config(const std::string& path, RunConfig c = {}) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open config file '" + path + "'");
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw InvalidArgument("config file '" + path + "' is not valid JSON: " + e.what());
  }
  return config_from_json(j, std::move(c));
}

// ---------------------------------------------------------------------------
// Output

inline std::string fmt(double v) {
  char buf[64];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 12);
  return std::string(buf, p);
}

inline std::string fmt(const std::optional<int>& v) { return v ? std::to_string(*v) : std::string(); }
inline std::string fmt(const std::optional<double>& v) { return v ? fmt(*v) : std::string(); }

class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& os) : os_(os) {}
  template <class... T>
  void row(const T&... cells) {
    bool first = true;
    ((os_ << (first ? "" : ",") << cell(cells), first = false), ...);
    os_ << '\n';
  }

 private:
  static std::string cell(double v) { return fmt(v); }
  static std::string cell(int v) { return std::to_string(v); }
  static std::string cell(bool v) { return v ? "true" : "false"; }
  static std::string cell(const char* v) { return v; }
  static std::string cell(const std::string& v) { return v; }
  static std::string cell(const std::optional<int>& v) { return fmt(v); }
  static std::string cell(const std::optional<double>& v) { return fmt(v); }
  std::ostream& os_;
};

inline Json to_json(const GaussianityDiagnostics& d) {
  return Json{{"terms_used", d.terms_used},
              {"last_term", d.last_term},
              {"extrapolation_residual", d.extrapolation_residual},
              {"isotropy_defect", d.isotropy_defect},
              {"notes", d.notes}};
}

inline Json to_json(const DetectionVerdict& v) {
  Json j{{"nu_plus", v.nu_plus},
         {"nu_minus", v.nu_minus},
         {"g2", v.g2},
         {"nu_th", v.nu_th},
         {"zone", to_string(v.zone)},
         {"eb_flag", v.eb_flag},
         {"method", to_string(v.method)}};
  j["segment_n"] = v.segment_n ? Json(*v.segment_n) : Json(nullptr);
  j["diagnostics"] = to_json(v.diagnostics);
  j["warnings"] = v.warnings;
  return j;
}

inline Json to_json(const CircuitParams& p) {
  return Json{{"a", p.a()}, {"lambda", p.lambda()}, {"eta", p.eta()}, {"mu", p.mu()}};
}

inline void emit_json(std::ostream& os, const Json& j) { os << j.dump(2) << '\n'; }

// ---------------------------------------------------------------------------
// Commands

namespace detail {

inline double circuit_a(const RunConfig& c, const StateFamily& f) {
  if (c.a) return *c.a;
  if (const auto ia = f.implied_a()) return *ia;
  return 3.0;
}

/// Input family and circuit parameters, validated before anything is computed.
inline std::pair<StateFamily, CircuitParams> circuit_setup(const RunConfig& c) {
  const StateFamily probe = parse_input(c.input, c.a);
  const double a = circuit_a(c, probe);
  const CircuitParams p(a, c.lambda, c.eta, c.mu);
  return {c.fock_cutoff ? parse_input(c.input, a, c.fock_cutoff) : probe, p};
}

inline AnalyzeOptions analyze_options(const RunConfig& c) {
  AnalyzeOptions opt;
  if (!c.method.empty()) opt.method = parse_method(c.method);
  if (opt.method == GaussianityMethod::radial_series)
    throw InvalidArgument("radial_series applies to one-mode states; use the gaussianity command");
  opt.cross_check = c.cross_check;
  return opt;
}

}  // namespace detail

inline int cmd_analyze(const RunConfig& c, std::ostream& os) {
  const auto [family, p] = detail::circuit_setup(c);
  const auto opt = detail::analyze_options(c);
  const auto v = analyze(family, p, opt);
  if (c.format.value_or(Format::json) == Format::csv) {
    CsvWriter w(os);
    w.row("input", "a", "lambda", "eta", "mu", "nu_minus", "g2", "nu_th", "zone", "eb_flag", "method");
    w.row(c.input, p.a(), p.lambda(), p.eta(), p.mu(), v.nu_minus, v.g2, v.nu_th, to_string(v.zone), v.eb_flag,
          to_string(v.method));
  } else {
    Json j{{"input", c.input}, {"params", to_json(p)}};
    j.update(to_json(v));
    emit_json(os, j);
  }
  return kExitOk;
}

inline int cmd_path_state(const RunConfig& c, std::ostream& os) {
  const auto r = analyze_path_state(c.s_plus, c.s_minus);
  const auto& v = r.verdict;
  if (c.format.value_or(Format::json) == Format::csv) {
    CsvWriter w(os);
    w.row("s_plus", "s_minus", "ratio", "nu_minus", "g2", "nu_th", "zone", "boundary_ratio");
    w.row(c.s_plus, c.s_minus, r.ratio, v.nu_minus, v.g2, v.nu_th, to_string(v.zone), r.boundary_ratio);
  } else {
    Json j{{"s_plus", c.s_plus},
           {"s_minus", c.s_minus},
           {"ratio", r.ratio},
           {"expected_nu_minus", r.expected_nu_minus},
           {"expected_g2", r.expected_g2},
           {"boundary_ratio", r.boundary_ratio}};
    j.update(to_json(v));
    emit_json(os, j);
  }
  return kExitOk;
}

inline int cmd_table1(const RunConfig& c, std::ostream& os, std::ostream& err) {
  const auto opt = detail::analyze_options(c);
  const auto rows = reproduce_table1(opt);
  Json failures = Json::array();
  for (std::size_t i = 0; i < rows.size(); ++i)
    if (!rows[i].within_tolerance())
      failures.push_back({{"row", i + 1}, {"dev_nu", rows[i].dev_nu}, {"dev_g2", rows[i].dev_g2}});

  if (c.format.value_or(Format::csv) == Format::csv) {
    CsvWriter w(os);
    w.row("type", "a", "lambda", "eta", "mu", "nu_minus_ref", "g2_ref", "nu_minus", "g2", "dev_nu", "dev_g2");
    for (const auto& r : rows)
      w.row(r.entry.fock ? "fock" : "pdc", r.params.a(), r.params.lambda(), r.params.eta(), r.params.mu(),
            r.entry.nu_minus_ref, r.entry.g2_ref, r.verdict.nu_minus, r.verdict.g2, r.dev_nu, r.dev_g2);
  } else {
    Json arr = Json::array();
    for (const auto& r : rows) {
      Json j{{"type", r.entry.fock ? "fock" : "pdc"}};
      j.update(to_json(r.params));
      j.update(Json{{"nu_minus_ref", r.entry.nu_minus_ref},
                    {"g2_ref", r.entry.g2_ref},
                    {"nu_minus", r.verdict.nu_minus},
                    {"g2", r.verdict.g2},
                    {"dev_nu", r.dev_nu},
                    {"dev_g2", r.dev_g2},
                    {"zone", to_string(r.verdict.zone)},
                    {"within_tolerance", r.within_tolerance()}});
      arr.push_back(std::move(j));
    }
    emit_json(os, arr);
  }
  if (failures.empty()) return kExitOk;
  emit_json(err, Json{{"error", "tolerance"},
                      {"message", "reference table rows outside tolerance (nu " + fmt(kTable1NuTol) + ", g2 " +
                                      fmt(kTable1G2Tol) + ")"},
                      {"rows", failures}});
  return kExitTolerance;
}

inline int cmd_threshold(const RunConfig& c, std::ostream& os) {
  const auto curve = threshold_curve(c.g_min, c.g_max, c.steps.value_or(101), c.at);
  if (c.format.value_or(Format::csv) == Format::csv) {
    CsvWriter w(os);
    w.row("g", "nu_th", "segment_n", "segment_r");
    for (const auto& t : curve) w.row(t.g, t.nu_th, t.n, t.r);
  } else {
    Json arr = Json::array();
    for (const auto& t : curve)
      arr.push_back({{"g", t.g},
                     {"nu_th", t.nu_th},
                     {"segment_n", t.n ? Json(*t.n) : Json(nullptr)},
                     {"segment_r", t.r ? Json(*t.r) : Json(nullptr)}});
    emit_json(os, arr);
  }
  return kExitOk;
}

namespace detail {

inline std::vector<double> sweep_values(const RunConfig& c, SweepParam vary) {
  if (!c.values.empty()) {
    if (c.from || c.to) throw InvalidArgument("give either --values or --from/--to, not both");
    return c.values;
  }
  double from = 0.0, to = 0.0;
  int steps = c.steps.value_or(17);
  switch (vary) {
    case SweepParam::mu: from = 0.7, to = 1.5; break;
    case SweepParam::lambda: from = 0.5, to = 0.1; break;
    case SweepParam::eta: from = 0.1, to = 1.0; break;
    case SweepParam::a: from = 1.0, to = 9.0, steps = c.steps.value_or(5); break;
  }
  from = c.from.value_or(from);
  to = c.to.value_or(to);
  if (steps < 1) throw InvalidArgument("sweep needs at least one step");
  if (steps == 1) return {from};
  std::vector<double> v;
  for (int i = 0; i < steps; ++i) v.push_back(from + (to - from) * i / (steps - 1));
  v.back() = to;
  return v;
}

}  // namespace detail

inline int cmd_sweep(const RunConfig& c, std::ostream& os) {
  const SweepParam vary = parse_sweep_param(c.vary);
  const auto [family, base] = detail::circuit_setup(c);
  const auto opt = detail::analyze_options(c);
  const auto values = detail::sweep_values(c, vary);
  const auto res = sweep(family, base, vary, values, opt);
  if (c.format.value_or(Format::csv) == Format::csv) {
    CsvWriter w(os);
    w.row("param", "nu_minus", "g2", "nu_th", "zone");
    for (const auto& pt : res.points)
      w.row(pt.value, pt.verdict.nu_minus, pt.verdict.g2, pt.verdict.nu_th, to_string(pt.verdict.zone));
  } else {
    Json pts = Json::array();
    for (const auto& pt : res.points) {
      Json j{{"param", pt.value}};
      j.update(to_json(pt.verdict));
      pts.push_back(std::move(j));
    }
    Json j{{"input", c.input}, {"vary", to_string(vary)}, {"base", to_json(base)}, {"points", pts}};
    j["crossing"] = res.crossing ? Json(*res.crossing) : Json(nullptr);
    emit_json(os, j);
  }
  return kExitOk;
}

inline int cmd_gaussianity(const RunConfig& c, std::ostream& os) {
  const GaussianityMethod method = c.method.empty() ? GaussianityMethod::wigner_overlap : parse_method(c.method);
  const StateFamily probe = parse_input(c.input, c.a);
  const double a = detail::circuit_a(c, probe);
  const StateFamily family = c.fock_cutoff ? parse_input(c.input, a, c.fock_cutoff) : probe;
  if (const auto ia = family.implied_a(); ia && c.a && std::abs(*ia - *c.a) > 1e-9 * *ia)
    throw InvalidArgument("input family fixes a = " + fmt(*ia) + " but a = " + fmt(*c.a) + " was given");
  if (c.terms < 1) throw InvalidArgument("--terms must be >= 1");
  if (c.points < 11 || c.points % 2 == 0) throw InvalidArgument("--points must be odd and >= 11");
  const FockDiagonalSpec spec = family.spec(a);
  const PolyGaussian w = spec.wigner();

  GaussianityResult r{};
  switch (method) {
    case GaussianityMethod::wigner_overlap: r = degree_of_gaussianity(PGSum(w)); break;
    case GaussianityMethod::radial_series: r = radial_series_g(w, c.terms); break;
    case GaussianityMethod::quadrature: r = gaussianity_quadrature(w, c.points); break;
    case GaussianityMethod::dual_circuit:
      throw InvalidArgument("dual_circuit computes g2 of a circuit output; use analyze");
  }
  const double closed = gaussianity_fock_diagonal(spec);
  if (c.format.value_or(Format::json) == Format::csv) {
    CsvWriter w2(os);
    w2.row("input", "method", "g", "g_fock_closed_form");
    w2.row(c.input, to_string(r.method), r.g, closed);
  } else {
    emit_json(os, Json{{"input", c.input},
                       {"variance", spec.a()},
                       {"weights", spec.weights()},
                       {"g", r.g},
                       {"method", to_string(r.method)},
                       {"g_fock_closed_form", closed},
                       {"diagnostics", to_json(r.diagnostics)}});
  }
  return kExitOk;
}

inline void emit_error(std::ostream& err, const char* kind, const std::string& message,
                       const std::string& command) {
  emit_json(err, Json{{"error", kind}, {"command", command}, {"message", message}});
}

/// Runs one configured command, mapping exceptions to exit codes.
inline int execute(const RunConfig& c, std::ostream& os, std::ostream& err) {
  try {
    std::ofstream file;
    std::ostringstream buffer;
    const int code = [&] {
      if (c.command == "analyze") return cmd_analyze(c, buffer);
      if (c.command == "path-state") return cmd_path_state(c, buffer);
      if (c.command == "table1") return cmd_table1(c, buffer, err);
      if (c.command == "threshold") return cmd_threshold(c, buffer);
      if (c.command == "sweep") return cmd_sweep(c, buffer);
      if (c.command == "gaussianity") return cmd_gaussianity(c, buffer);
      throw InvalidArgument("unknown command '" + c.command + "'");
    }();
    if (c.out.empty()) {
      os << buffer.str();
    } else {
      file.open(c.out);
      if (!file) throw InvalidArgument("cannot open output file '" + c.out + "'");
      file << buffer.str();
    }
    return code;
  } catch (const InvalidArgument& e) {
    emit_error(err, "invalid_input", e.what(), c.command);
    return kExitInvalid;
  } catch (const NumericError& e) {
    emit_error(err, "numeric_assertion", e.what(), c.command);
    return kExitNumeric;
  }
}

// ---------------------------------------------------------------------------
// Argument parsing

namespace detail {

struct Flag {
  const char* name;
  const char* key;
  const char* help;
};

inline const std::vector<Flag>& circuit_flags() {
  static const std::vector<Flag> f{
      {"--input", "input", "vacuum | fock:N | pdc[:A] | custom:p0,p1,... | counterexample:N[:P]"},
      {"--a", "a", "input variance (defaults to the value the input fixes, else 3)"},
      {"--lambda", "lambda", "two-mode squeezing lambda in [0, 1) (default 0.5)"},
      {"--eta", "eta", "noise on mode 1 (default 0.1)"},
      {"--mu", "mu", "noise on mode 2 (default 0.7)"},
      {"--method", "method", "wigner_overlap | dual_circuit | quadrature"},
      {"--fock-cutoff", "fock_cutoff", "truncate the PDC input at this photon number"},
  };
  return f;
}

}  // namespace detail

/// Thrown by parse_args when --help was requested.
struct HelpRequested {
  std::string text;
};

/// Parses argv into a RunConfig: --config first, explicit flags on top.
inline RunConfig parse_args(int argc, const char* const* argv) {
  CLI::App app{"Gaussianity-bounded two-mode entanglement detection", "cvsep"};
  app.require_subcommand(0, 1);
  std::string top_config;
  app.add_option("--config", top_config, "JSON run configuration");

  std::map<std::string, std::string> raw;
  std::vector<std::pair<CLI::App*, std::vector<std::pair<CLI::Option*, std::string>>>> bound;
  bool cross_check = false;
  CLI::Option* cross_opt = nullptr;

  const auto make = [&](const char* name, const char* help, const std::vector<detail::Flag>& flags) {
    CLI::App* sub = app.add_subcommand(name, help);
    std::vector<std::pair<CLI::Option*, std::string>> opts;
    const std::vector<detail::Flag> common{{"--config", "config", "JSON run configuration"},
                                           {"--out", "out", "output file (default stdout)"},
                                           {"--format", "format", "csv | json"}};
    for (const auto* list : {&common, &flags})
      for (const auto& f : *list) opts.emplace_back(sub->add_option(f.name, raw[std::string(name) + "." + f.key], f.help),
                                                    f.key);
    bound.emplace_back(sub, std::move(opts));
    return sub;
  };

  auto* analyze_cmd = make("analyze", "classify the circuit output state", detail::circuit_flags());
  cross_opt = analyze_cmd->add_flag("--cross-check", cross_check, "also run the dual-circuit method");
  make("path-state", "analyse the squeezed single-photon path state",
       {{"--splus", "splus", "squeezing s+ (default 1)"}, {"--sminus", "sminus", "squeezing s- (default 1)"}});
  make("table1", "reproduce the Fock and PDC reference table", {{"--method", "method", "g2 method"}});
  make("threshold", "sample the threshold curve nu_th(g)",
       {{"--g-min", "g_min", "lower end (default 0.75)"},
        {"--g-max", "g_max", "upper end (default 1.5)"},
        {"--steps", "steps", "evenly spaced samples (default 101)"},
        {"--at", "at", "extra comma-separated g values"}});
  auto sweep_flags = detail::circuit_flags();
  sweep_flags.insert(sweep_flags.end(), {{"--vary", "vary", "a | lambda | eta | mu (default mu)"},
                                         {"--values", "values", "comma-separated values"},
                                         {"--from", "from", "first value"},
                                         {"--to", "to", "last value"},
                                         {"--steps", "steps", "number of values (default 17)"}});
  make("sweep", "vary one circuit parameter", sweep_flags);
  make("gaussianity", "degree of Gaussianity of a one-mode input",
       {{"--input", "input", "vacuum | fock:N | pdc[:A] | custom:p0,p1,... | counterexample:N[:P]"},
        {"--a", "a", "variance for a bare pdc input (default 3)"},
        {"--method", "method", "wigner_overlap | radial_series | quadrature"},
        {"--terms", "terms", "radial series terms (default 25)"},
        {"--points", "points", "quadrature nodes per axis (default 401)"},
        {"--fock-cutoff", "fock_cutoff", "truncate the PDC input at this photon number"}});

  std::vector<std::string> args;
  for (int i = argc - 1; i > 0; --i) args.emplace_back(argv[i]);
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    throw HelpRequested{app.help()};
  }

  RunConfig cfg;
  if (!top_config.empty()) cfg = load_config(top_config);
  for (auto& [sub, opts] : bound) {
    if (!sub->parsed()) continue;
    const std::string name = sub->get_name();
    Json overrides = Json::object();
    for (auto& [opt, key] : opts) {
      if (opt->count() == 0) continue;
      const std::string& v = raw[name + "." + key];
      if (key == "config") cfg = load_config(v, cfg);
      else overrides[key] = v;
    }
    cfg = config_from_json(overrides, cfg);
    cfg.command = name;
    if (cross_opt && sub == analyze_cmd && cross_opt->count() > 0) cfg.cross_check = cross_check;
  }
  if (cfg.command.empty()) throw InvalidArgument("no command given (see --help)");
  return cfg;
}

/// Full command-line entry point.
inline int run(int argc, const char* const* argv, std::ostream& os, std::ostream& err) {
  RunConfig cfg;
  try {
    cfg = parse_args(argc, argv);
  } catch (const HelpRequested& h) {
    os << h.text;
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    emit_error(err, "invalid_input", e.what(), "");
    return kExitInvalid;
  } catch (const InvalidArgument& e) {
    emit_error(err, "invalid_input", e.what(), "");
    return kExitInvalid;
  }
  return execute(cfg, os, err);
}

}  // namespace cvsep::cli
