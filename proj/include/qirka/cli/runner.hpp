#pragma once

// Batch front end: INI configuration, model construction, Q-IRKA runs and
// CSV artifacts. All CSVs except timing.csv / sweep_timing.csv are
// deterministic for a fixed configuration.

#include <algorithm>
#include <array>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "qirka/analysis.hpp"
#include "qirka/benchmarks.hpp"
#include "qirka/engine.hpp"
#include "qirka/matrix_io.hpp"

namespace qirka::cli {

namespace fs = std::filesystem;

enum class BenchmarkType { chain, bkc, bus, file };

inline std::string to_string(BenchmarkType t) {
  switch (t) {
    case BenchmarkType::chain: return "chain";
    case BenchmarkType::bkc: return "bkc";
    case BenchmarkType::bus: return "bus";
    case BenchmarkType::file: return "file";
  }
  return "unknown";
}

struct BenchmarkSpec {
  BenchmarkType type = BenchmarkType::chain;
  Variant variant = Variant::homogeneous;
  Index n = 0;
  Index m = 0;
  fs::path model_dir;  // type = file
  BusCoupling bus_coupling = BusCoupling::exchange;
  // optional overrides of the generator defaults
  std::optional<double> coupling;          // chain: scalar c in c * I2
  std::optional<double> kappa_ch;          // uniform channel rate
  std::optional<double> kappa_site_scale;  // multiplies the default site rates
  std::optional<double> j_mag;             // bkc
  std::optional<double> lambda_mag;        // bkc
  std::optional<double> gamma;             // bus
};

struct RunConfig {
  BenchmarkSpec benchmark;
  QirkaConfig qirka;
  fs::path output_dir;
};

struct SweepConfig {
  RunConfig base;
  std::vector<std::array<Index, 3>> triples;  // (n, m, r)
  std::vector<Variant> variants;
};

struct RunReport {
  std::string benchmark;
  std::string variant;
  Index n = 0;
  Index m = 0;
  Index r = 0;
  double seconds = 0.0;
  int iterations = 0;
  bool converged = false;
  double h2_abs = 0.0;
  double h2_rel = 0.0;
  double h2_full = 0.0;
  StructuralDiagnostics defects;
  std::string error_code;  // empty on success
  std::string message;
  int exit_status = 0;  // 0 ok, 1 not converged or defects above 1e-10, 2 error
};

inline constexpr double kDefectGate = 1e-10;

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

/// Accepts "1.5", "-2", "0.1+2i", "3-0.5i", "2i".
inline Complex parse_complex(const std::string& text) {
  const auto bad = [&] {
    throw Error(ErrorCode::config_error, "malformed complex number '" + text + "'");
  };
  if (text.empty()) bad();
  auto to_double = [&](const std::string& s) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      bad();
    }
    if (used != s.size()) bad();
    return v;
  };
  if (text.back() != 'i') return {to_double(text), 0.0};
  const std::string body = text.substr(0, text.size() - 1);
  std::size_t split = std::string::npos;
  for (std::size_t k = body.size(); k-- > 1;) {
    if ((body[k] == '+' || body[k] == '-') && body[k - 1] != 'e' && body[k - 1] != 'E') {
      split = k;
      break;
    }
  }
  if (split == std::string::npos) {
    if (body.empty() || body == "+") return {0.0, 1.0};
    if (body == "-") return {0.0, -1.0};
    return {0.0, to_double(body)};
  }
  const std::string im = body.substr(split);
  const double imag = (im == "+") ? 1.0 : (im == "-") ? -1.0 : to_double(im);
  return {to_double(body.substr(0, split)), imag};
}

namespace detail {

using boost::property_tree::ptree;

inline void reject_unknown(const ptree& tree, const std::map<std::string, std::set<std::string>>& allowed) {
  for (const auto& [section, body] : tree) {
    const auto it = allowed.find(section);
    if (it == allowed.end()) {
      if (body.empty()) {
        throw Error(ErrorCode::config_error, "key '" + section + "' outside any section");
      }
      throw Error(ErrorCode::config_error, "unknown section [" + section + "]");
    }
    for (const auto& [key, value] : body) {
      (void)value;
      if (!it->second.count(key)) {
        throw Error(ErrorCode::config_error, "unknown key '" + key + "' in [" + section + "]");
      }
    }
  }
}

template <typename T>
std::optional<T> get(const ptree& tree, const std::string& path) {
  const auto node = tree.get_child_optional(ptree::path_type(path, '.'));
  if (!node) return std::nullopt;
  const std::string text = node->get_value<std::string>();
  std::istringstream is(text);
  T value{};
  std::string rest;
  if (!(is >> value) || (is >> rest)) {
    throw Error(ErrorCode::config_error, "bad value '" + text + "' for " + path);
  }
  return value;
}

inline std::optional<std::string> get_string(const ptree& tree, const std::string& path) {
  const auto node = tree.get_child_optional(ptree::path_type(path, '.'));
  if (!node) return std::nullopt;
  return node->get_value<std::string>();
}

inline std::vector<std::string> split_ws(const std::string& s) {
  std::istringstream is(s);
  std::vector<std::string> out;
  for (std::string tok; is >> tok;) out.push_back(tok);
  return out;
}

inline ptree read_ini(std::istream& is, const std::string& source) {
  ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(is, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw Error(ErrorCode::parse_error,
                source + ":" + std::to_string(e.line()) + ": " + e.message(),
                static_cast<double>(e.line()));
  }
  return tree;
}

inline RunConfig run_config_from(const ptree& tree) {
  RunConfig cfg;
  BenchmarkSpec& b = cfg.benchmark;

  const auto type = get_string(tree, "benchmark.type");
  if (!type) throw Error(ErrorCode::config_error, "missing benchmark.type");
  if (*type == "chain") b.type = BenchmarkType::chain;
  else if (*type == "bkc") b.type = BenchmarkType::bkc;
  else if (*type == "bus") b.type = BenchmarkType::bus;
  else if (*type == "file") b.type = BenchmarkType::file;
  else throw Error(ErrorCode::config_error, "unknown benchmark type '" + *type + "'");

  if (const auto v = get_string(tree, "benchmark.variant")) b.variant = parse_variant(*v);
  b.n = get<Index>(tree, "benchmark.n").value_or(0);
  b.m = get<Index>(tree, "benchmark.m").value_or(0);
  if (const auto d = get_string(tree, "benchmark.model_dir")) b.model_dir = *d;
  if (const auto c = get_string(tree, "benchmark.bus_coupling")) {
    if (*c == "exchange") b.bus_coupling = BusCoupling::exchange;
    else if (*c == "position") b.bus_coupling = BusCoupling::position;
    else throw Error(ErrorCode::config_error, "unknown bus_coupling '" + *c + "'");
  }
  b.coupling = get<double>(tree, "benchmark.coupling");
  b.kappa_ch = get<double>(tree, "benchmark.kappa_ch");
  b.kappa_site_scale = get<double>(tree, "benchmark.kappa_site_scale");
  b.j_mag = get<double>(tree, "benchmark.j_mag");
  b.lambda_mag = get<double>(tree, "benchmark.lambda_mag");
  b.gamma = get<double>(tree, "benchmark.gamma");

  if ((b.type == BenchmarkType::chain || b.type == BenchmarkType::bkc) && (b.n < 1 || b.m < 1)) {
    throw Error(ErrorCode::config_error, "chain benchmarks need benchmark.n and benchmark.m >= 1");
  }
  if (b.type == BenchmarkType::file && b.model_dir.empty()) {
    throw Error(ErrorCode::config_error, "file benchmark needs benchmark.model_dir");
  }

  QirkaConfig& q = cfg.qirka;
  const auto r = get<Index>(tree, "qirka.r");
  if (!r) throw Error(ErrorCode::config_error, "missing qirka.r");
  q.r = *r;
  q.L = get<Index>(tree, "qirka.L");
  q.epsilon = get<double>(tree, "qirka.epsilon").value_or(q.epsilon);
  q.max_iter = get<int>(tree, "qirka.max_iter").value_or(q.max_iter);
  q.tau = get<double>(tree, "qirka.tau").value_or(q.tau);
  if (const auto init = get_string(tree, "qirka.init")) {
    if (*init == "log_spaced") q.init = InitStrategy::log_spaced_real;
    else if (*init == "user") q.init = InitStrategy::user_provided;
    else throw Error(ErrorCode::config_error, "unknown qirka.init '" + *init + "'");
  }
  if (const auto shifts = get_string(tree, "qirka.shifts")) {
    for (const auto& tok : split_ws(*shifts)) q.user_shifts.push_back(parse_complex(tok));
  }
  q.validate();

  if (const auto dir = get_string(tree, "output.dir")) cfg.output_dir = *dir;
  return cfg;
}

inline const std::map<std::string, std::set<std::string>>& allowed_keys(bool sweep) {
  static const std::map<std::string, std::set<std::string>> run_keys{
      {"benchmark",
       {"type", "variant", "n", "m", "model_dir", "bus_coupling", "coupling", "kappa_ch",
        "kappa_site_scale", "j_mag", "lambda_mag", "gamma"}},
      {"qirka", {"r", "L", "epsilon", "max_iter", "tau", "init", "shifts"}},
      {"output", {"dir"}},
  };
  static const std::map<std::string, std::set<std::string>> sweep_keys = [] {
    auto k = run_keys;
    k["sweep"] = {"triples", "variants"};
    return k;
  }();
  return sweep ? sweep_keys : run_keys;
}

}  // namespace detail

inline RunConfig parse_run_config(std::istream& is, const std::string& source = "<config>") {
  const auto tree = detail::read_ini(is, source);
  detail::reject_unknown(tree, detail::allowed_keys(false));
  return detail::run_config_from(tree);
}

inline RunConfig load_run_config(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorCode::io_error, "cannot open " + path.string());
  return parse_run_config(is, path.string());
}

/// [sweep] triples = "n:m:r n:m:r ..."; variants = "homogeneous heterogeneous".
/// The benchmark n/m and qirka r of the base config are overridden per triple.
inline SweepConfig parse_sweep_config(std::istream& is, const std::string& source = "<config>") {
  auto tree = detail::read_ini(is, source);
  detail::reject_unknown(tree, detail::allowed_keys(true));
  SweepConfig sweep;
  for (const auto& tok : detail::split_ws(detail::get_string(tree, "sweep.triples").value_or(""))) {
    std::array<Index, 3> t{};
    char c1 = 0, c2 = 0;
    std::string rest;
    std::istringstream ts(tok);
    if (!(ts >> t[0] >> c1 >> t[1] >> c2 >> t[2]) || c1 != ':' || c2 != ':' || (ts >> rest)) {
      throw Error(ErrorCode::config_error, "malformed sweep triple '" + tok + "'");
    }
    sweep.triples.push_back(t);
  }
  const auto variants = detail::get_string(tree, "sweep.variants");
  for (const auto& tok : detail::split_ws(variants.value_or("homogeneous"))) {
    sweep.variants.push_back(parse_variant(tok));
  }
  if (sweep.triples.empty() || sweep.variants.empty()) {
    throw Error(ErrorCode::config_error, "sweep needs at least one triple and one variant");
  }
  // Base config: triples supply n, m, r.
  const auto& t0 = sweep.triples.front();
  tree.put("benchmark.n", t0[0]);
  tree.put("benchmark.m", t0[1]);
  tree.put("qirka.r", t0[2]);
  sweep.base = detail::run_config_from(tree);
  return sweep;
}

inline SweepConfig load_sweep_config(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorCode::io_error, "cannot open " + path.string());
  return parse_sweep_config(is, path.string());
}

/// Triple-major, variant-minor.
inline std::vector<RunConfig> expand_sweep(const SweepConfig& sweep) {
  std::vector<RunConfig> out;
  for (const auto& t : sweep.triples) {
    for (const Variant v : sweep.variants) {
      RunConfig c = sweep.base;
      c.benchmark.n = t[0];
      c.benchmark.m = t[1];
      c.benchmark.variant = v;
      c.qirka.r = t[2];
      out.push_back(std::move(c));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Models
// ---------------------------------------------------------------------------

struct BuiltModel {
  StateSpaceModel external;
  std::optional<StateSpaceModel> full_port;
};

inline BuiltModel build_model(const BenchmarkSpec& b) {
  switch (b.type) {
    case BenchmarkType::chain: {
      ChainConfig c = ChainConfig::defaults(b.n, b.m, b.variant);
      if (b.coupling) c.coupling = *b.coupling * Matrix::Identity(2, 2);
      if (b.kappa_ch) c.kappa_ch.setConstant(*b.kappa_ch);
      if (b.kappa_site_scale) c.kappa_site *= *b.kappa_site_scale;
      auto pair = build_chain(c);
      return {std::move(pair.external), std::move(pair.full_port)};
    }
    case BenchmarkType::bkc: {
      BKCConfig c = BKCConfig::defaults(b.n, b.m, b.variant);
      if (b.j_mag) c.J_mag = *b.j_mag;
      if (b.lambda_mag) c.lambda_mag = *b.lambda_mag;
      if (b.kappa_ch) c.kappa_ch.setConstant(*b.kappa_ch);
      if (b.kappa_site_scale) c.kappa_site *= *b.kappa_site_scale;
      auto pair = build_bkc(c);
      return {std::move(pair.external), std::move(pair.full_port)};
    }
    case BenchmarkType::bus: {
      BusConfig c;
      c.coupling = b.bus_coupling;
      if (b.gamma) c.gamma = *b.gamma;
      return {build_bus(c), std::nullopt};
    }
    case BenchmarkType::file:
      return {io::load_model(b.model_dir), std::nullopt};
  }
  throw Error(ErrorCode::config_error, "unknown benchmark type");
}

// ---------------------------------------------------------------------------
// CSV output
// ---------------------------------------------------------------------------

namespace detail {

inline std::ofstream open_csv(const fs::path& path) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorCode::io_error, "cannot open " + path.string() + " for writing");
  return os;
}

inline std::string fmt(double x) { return io::format_double(x); }

inline void write_trace(const fs::path& dir, const IterationTrace& trace) {
  auto os = open_csv(dir / "trace.csv");
  os << "iteration,relchg,symp,left,identity,pr1,pr2,pr3\n";
  for (const auto& rec : trace.records) {
    const auto& d = rec.defects;
    os << rec.iteration << ',' << fmt(rec.relchg) << ',' << fmt(d.symp) << ',' << fmt(d.left)
       << ',' << fmt(d.identity) << ',' << fmt(d.pr1) << ',' << fmt(d.pr2) << ',' << fmt(d.pr3)
       << '\n';
  }
}

inline void write_shifts_and_poles(const fs::path& dir, const IterationTrace& trace) {
  auto shifts = open_csv(dir / "shifts.csv");
  shifts << "iteration,index,re,im\n";
  auto poles = open_csv(dir / "poles.csv");
  poles << "iteration,index,re,im\n";
  for (const auto& rec : trace.records) {
    for (std::size_t i = 0; i < rec.shifts.sigma.size(); ++i) {
      const Complex s = rec.shifts.sigma[i];
      shifts << rec.iteration << ',' << i << ',' << fmt(s.real()) << ',' << fmt(s.imag()) << '\n';
    }
    for (std::size_t i = 0; i < rec.poles.size(); ++i) {
      const Complex p = rec.poles[i];
      poles << rec.iteration << ',' << i << ',' << fmt(p.real()) << ',' << fmt(p.imag()) << '\n';
    }
  }
}

inline void write_spectra(const fs::path& dir, const GramianPair& g) {
  const HankelSpectrum hsv = hankel_singular_values(g);
  auto h = open_csv(dir / "hsv.csv");
  h << "index,sigma\n";
  for (Index i = 0; i < hsv.sigma.size(); ++i) h << i + 1 << ',' << fmt(hsv.sigma(i)) << '\n';

  const Vector ec = gramian_spectrum(g.Wc);
  const Vector eo = gramian_spectrum(g.Wo);
  auto s = open_csv(dir / "gramian_spectra.csv");
  s << "index,wc,wo\n";
  for (Index i = 0; i < ec.size(); ++i) {
    s << i + 1 << ',' << fmt(ec(i)) << ',' << fmt(eo(i)) << '\n';
  }
}

inline void write_interpolation(const fs::path& dir, const InterpolationDiagnostics& d) {
  auto os = open_csv(dir / "interpolation.csv");
  os << "pole_re,pole_im,right,left,derivative,reliable\n";
  for (const auto& e : d.entries) {
    os << fmt(e.pole.real()) << ',' << fmt(e.pole.imag()) << ',' << fmt(e.right) << ','
       << fmt(e.left) << ',' << fmt(e.derivative) << ',' << (d.reliable ? 1 : 0) << '\n';
  }
}

inline const char* summary_header() {
  return "benchmark,variant,n,m,r,iterations,converged,h2_abs,h2_rel,h2_full,symp,left,pr1,pr2,"
         "error_code";
}

inline std::string summary_row(const RunReport& r) {
  std::ostringstream os;
  os << r.benchmark << ',' << r.variant << ',' << r.n << ',' << r.m << ',' << r.r << ','
     << r.iterations << ',' << (r.converged ? 1 : 0) << ',' << fmt(r.h2_abs) << ','
     << fmt(r.h2_rel) << ',' << fmt(r.h2_full) << ',' << fmt(r.defects.symp) << ','
     << fmt(r.defects.left) << ',' << fmt(r.defects.pr1) << ',' << fmt(r.defects.pr2) << ','
     << r.error_code;
  return os.str();
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

/// Builds the model and runs Q-IRKA, writing the artifacts into `out`.
/// Configuration and model-construction errors are thrown before anything is
/// written; engine and analysis errors are recorded in summary.csv.
inline RunReport cmd_run(const RunConfig& config, const fs::path& out) {
  RunReport report;
  const BenchmarkSpec& b = config.benchmark;
  report.benchmark = to_string(b.type);
  report.variant = (b.type == BenchmarkType::chain || b.type == BenchmarkType::bkc)
                       ? to_string(b.variant)
                       : "-";
  report.r = config.qirka.r;

  config.qirka.validate();
  BuiltModel built = build_model(b);
  report.n = built.external.n();
  report.m = built.external.m();
  if (config.qirka.r > report.n) {
    throw Error(ErrorCode::config_error, "qirka.r must not exceed the model's n");
  }

  fs::create_directories(out);
  try {
    const QirkaResult result =
        run(built.external, config.qirka, built.full_port ? &*built.full_port : nullptr);
    report.seconds = result.loop_seconds;
    report.iterations = static_cast<int>(result.trace.records.size());
    report.converged = result.converged;
    report.defects = result.trace.records[static_cast<std::size_t>(result.best_iteration)].defects;
    for (const auto& w : result.warnings) report.message += (report.message.empty() ? "" : "; ") + w;

    detail::write_trace(out, result.trace);
    detail::write_shifts_and_poles(out, result.trace);
    io::save_model(out / "reduced_model", result.reduced);
    io::save_matrix(out / "reduced_model" / "V.txt", result.pair.V);

    const H2Error err = h2_error(built.external, result.reduced, result.pair.V);
    report.h2_abs = err.absolute;
    report.h2_rel = err.relative;
    report.h2_full = h2_norm(built.external);

    detail::write_spectra(out, gramians(built.external));
    detail::write_interpolation(out, interpolation_residuals(built.external, result.reduced));

    const auto& d = report.defects;
    const bool clean = d.symp <= kDefectGate && d.left <= kDefectGate && d.pr1 <= kDefectGate &&
                       d.pr2 <= kDefectGate;
    report.exit_status = (report.converged && clean) ? 0 : 1;
  } catch (const Error& e) {
    report.error_code = to_string(e.code());
    report.message = e.what();
    report.exit_status = 2;
  }

  {
    auto os = detail::open_csv(out / "summary.csv");
    os << detail::summary_header() << '\n' << detail::summary_row(report) << '\n';
  }
  {
    auto os = detail::open_csv(out / "timing.csv");
    os << "loop_seconds\n" << detail::fmt(report.seconds) << '\n';
  }
  return report;
}

/// Runs every config in its own subdirectory run_<index> with up to `workers`
/// threads. Rows of sweep.csv follow input order.
inline std::vector<RunReport> cmd_sweep(const std::vector<RunConfig>& configs, const fs::path& out,
                                        unsigned workers = 1) {
  if (configs.empty()) throw Error(ErrorCode::config_error, "sweep needs at least one run");
  fs::create_directories(out);
  std::vector<RunReport> reports(configs.size());

  auto work = [&](std::size_t i) {
    const RunConfig& c = configs[i];
    try {
      reports[i] = cmd_run(c, out / ("run_" + std::to_string(i)));
    } catch (const Error& e) {
      RunReport r;
      r.benchmark = to_string(c.benchmark.type);
      r.variant = to_string(c.benchmark.variant);
      r.n = c.benchmark.n;
      r.m = c.benchmark.m;
      r.r = c.qirka.r;
      r.error_code = to_string(e.code());
      r.message = e.what();
      r.exit_status = 2;
      reports[i] = std::move(r);
    }
  };

  const std::size_t threads = std::clamp<std::size_t>(workers, 1, configs.size());
  if (threads == 1) {
    for (std::size_t i = 0; i < configs.size(); ++i) work(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < configs.size(); i = next++) work(i);
      });
    }
    for (auto& th : pool) th.join();
  }

  auto table = detail::open_csv(out / "sweep.csv");
  table << "index," << detail::summary_header() << '\n';
  auto timing = detail::open_csv(out / "sweep_timing.csv");
  timing << "index,loop_seconds\n";
  for (std::size_t i = 0; i < reports.size(); ++i) {
    table << i << ',' << detail::summary_row(reports[i]) << '\n';
    timing << i << ',' << detail::fmt(reports[i].seconds) << '\n';
  }
  return reports;
}

struct DiagnoseReport {
  PRResiduals pr;
  std::optional<ProjectionPair> basis;
};

inline DiagnoseReport cmd_diagnose(const fs::path& model_dir,
                                   const std::optional<fs::path>& basis = std::nullopt) {
  const StateSpaceModel model = io::load_model(model_dir);
  DiagnoseReport report{pr_residuals(model), std::nullopt};
  if (basis) {
    const Matrix V = io::load_matrix(*basis);
    if (V.rows() != model.A().rows()) {
      throw Error(ErrorCode::invalid_dimension, "basis rows do not match the model state size");
    }
    report.basis = make_projection_pair(V);
  }
  return report;
}

}  // namespace qirka::cli
