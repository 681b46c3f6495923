#include "cglasso/cli.hpp"

#include "cglasso/dataset_io.hpp"
#include "cglasso/sim_bench.hpp"
#include "cglasso/study.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace cglasso {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

std::string RunConfig::to_json() const {
  json j;
  j["command"] = command;
  j["input"] = input;
  j["lower"] = json::array();
  for (double x : lower) j["lower"].push_back(format_double(x));
  j["upper"] = json::array();
  for (double x : upper) j["upper"].push_back(format_double(x));
  j["na_side"] = na_side;
  j["mode"] = cglasso::to_string(mode);
  j["K"] = K;
  j["rho_min"] = rho_min;
  j["spacing"] = cglasso::to_string(spacing);
  j["rho"] = rho ? json(*rho) : json(nullptr);
  j["seed"] = seed;
  j["out"] = out;
  j["criterion"] = criterion;
  j["estimator"] = estimator;
  j["gibbs_sweeps"] = gibbs_sweeps;
  j["burn_in"] = burn_in;
  j["exact_bic"] = exact_bic;
  j["bic_draws"] = bic_draws;
  j["em_tol"] = em_tol;
  j["em_max_iter"] = em_max_iter;
  return j.dump();
}

RunConfig RunConfig::from_json(const std::string& text) {
  const json j = json::parse(text);
  RunConfig c;
  c.command = j.at("command").get<std::string>();
  c.input = j.at("input").get<std::string>();
  for (const auto& x : j.at("lower")) c.lower.push_back(parse_double(x.get<std::string>()));
  for (const auto& x : j.at("upper")) c.upper.push_back(parse_double(x.get<std::string>()));
  c.na_side = j.at("na_side").get<std::vector<std::string>>();
  c.mode = parse_estep_mode(j.at("mode").get<std::string>());
  c.K = j.at("K").get<int>();
  c.rho_min = j.at("rho_min").get<double>();
  c.spacing = parse_spacing(j.at("spacing").get<std::string>());
  if (!j.at("rho").is_null()) c.rho = j.at("rho").get<double>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.out = j.at("out").get<std::string>();
  c.criterion = j.at("criterion").get<std::string>();
  c.estimator = j.at("estimator").get<std::string>();
  c.gibbs_sweeps = j.at("gibbs_sweeps").get<long>();
  c.burn_in = j.at("burn_in").get<long>();
  c.exact_bic = j.at("exact_bic").get<bool>();
  c.bic_draws = j.at("bic_draws").get<long>();
  c.em_tol = j.at("em_tol").get<double>();
  c.em_max_iter = j.at("em_max_iter").get<int>();
  return c;
}

namespace {

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << text;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json matrix_rows(const Matrix& m) {
  json rows = json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    json r = json::array();
    for (Index j = 0; j < m.cols(); ++j) r.push_back(m(i, j));
    rows.push_back(r);
  }
  return rows;
}

json vector_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Matrix matrix_from_json(const json& rows) {
  const auto n = static_cast<Index>(rows.size());
  Matrix m(n, n);
  for (Index i = 0; i < n; ++i) {
    if (static_cast<Index>(rows[static_cast<std::size_t>(i)].size()) != n)
      throw DataError("matrix in JSON is not square");
    for (Index j = 0; j < n; ++j) m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)].get<double>();
  }
  return m;
}

/// Upper-triangle nonzeros as [h, k, theta] with 1-based indices.
json edge_list(const Matrix& theta) {
  json e = json::array();
  for (Index h = 0; h < theta.rows(); ++h)
    for (Index k = h + 1; k < theta.cols(); ++k)
      if (theta(h, k) != 0.0) e.push_back(json::array({h + 1, k + 1, theta(h, k)}));
  return e;
}

std::string edges_tsv(const Matrix& theta, const std::vector<std::string>& names,
                      const std::string& header) {
  std::ostringstream os;
  os << header << "h\tk\tname_h\tname_k\ttheta\n";
  for (Index h = 0; h < theta.rows(); ++h)
    for (Index k = h + 1; k < theta.cols(); ++k)
      if (theta(h, k) != 0.0)
        os << h + 1 << '\t' << k + 1 << '\t' << names[static_cast<std::size_t>(h)] << '\t'
           << names[static_cast<std::size_t>(k)] << '\t' << format_double(theta(h, k)) << '\n';
  return os.str();
}

std::string artifact_header(const std::string& config_json) {
  return "# cglasso " + std::string(kVersion) + "\n# config " + config_json + "\n";
}

CensoredDataset load_data(const RunConfig& c) {
  if (c.input.empty()) throw UsageError("--input is required");
  CsvReadOptions opt;
  if (!c.lower.empty()) opt.lower = c.lower;
  if (!c.upper.empty()) opt.upper = c.upper;
  for (const auto& s : c.na_side) {
    if (s == "left") opt.na_side.push_back(Censor::Left);
    else if (s == "right") opt.na_side.push_back(Censor::Right);
    else throw UsageError("--na-side expects left or right, got '" + s + "'");
  }
  return read_dataset_csv(c.input, opt);
}

EmConfig em_config(const RunConfig& c) {
  EmConfig em;
  em.tol = c.em_tol;
  em.max_iter = c.em_max_iter;
  em.estep.mode = c.mode;
  em.estep.seed = c.seed;
  em.estep.threads = c.threads;
  em.estep.gibbs.sweeps = c.gibbs_sweeps;
  em.estep.gibbs.burn_in = c.burn_in;
  return em;
}

void check_run_config(const RunConfig& c) {
  if (c.mode == EStepMode::MissingAtRandom) throw UsageError("--mode must be exact or meanfield");
  if (c.K < 1) throw UsageError("--K must be at least 1");
  if (c.criterion != "abic" && c.criterion != "bic") throw UsageError("--criterion must be bic or abic");
  if (c.estimator != "cglasso" && c.estimator != "glasso")
    throw UsageError("--estimator must be cglasso or glasso");
  if (c.gibbs_sweeps < 2 || c.burn_in < 0) throw UsageError("invalid Gibbs settings");
  if (c.rho && !(*c.rho >= 0.0)) throw UsageError("--rho must be >= 0");
}

json fit_diagnostics(const FitResult& f) {
  json d;
  d["em_iterations"] = f.em_iterations;
  d["converged"] = f.converged;
  d["q_value"] = f.q_value;
  d["kkt_residual"] = f.kkt_residual;
  d["fixed_point_residual"] = f.fixed_point_residual;
  d["psd_repairs"] = f.psd_repairs;
  d["stalled"] = f.stalled;
  return d;
}

int cmd_fit(const RunConfig& c, std::ostream& out, std::ostream& err) {
  check_run_config(c);
  if (!c.rho) throw UsageError("fit requires --rho");
  const CensoredDataset data = load_data(c);
  const EmConfig em = em_config(c);
  const RhoMax rm = rho_max(data, em.estep);
  const FitResult f = fit_em(data, *c.rho, rm.params0, em);

  const std::string cfg = c.to_json();
  json j;
  j["version"] = kVersion;
  j["config"] = json::parse(cfg);
  j["p"] = data.p();
  j["n"] = data.n();
  j["names"] = data.names();
  j["rho"] = *c.rho;
  j["rho_max"] = rm.rho_max;
  j["mu"] = vector_json(f.params.mu());
  std::vector<double> theta(static_cast<std::size_t>(data.p() * data.p()));
  for (Index h = 0; h < data.p(); ++h)
    for (Index k = 0; k < data.p(); ++k)
      theta[static_cast<std::size_t>(h * data.p() + k)] = f.params.theta()(h, k);
  j["theta"] = theta;
  j["diagnostics"] = fit_diagnostics(f);
  write_file(fs::path(c.out) / "params.json", j.dump(2) + "\n");
  write_file(fs::path(c.out) / "edges.tsv", edges_tsv(f.params.theta(), data.names(), artifact_header(cfg)));
  out << "fit: rho = " << format_double(*c.rho) << ", " << f.params.offdiag_nonzeros() / 2
      << " edges, " << f.em_iterations << " EM iterations\n";
  if (!f.converged) {
    err << "error: EM did not converge within " << c.em_max_iter << " iterations\n";
    return kExitNumerical;
  }
  return kExitOk;
}

int cmd_path(const RunConfig& c, std::ostream& out, std::ostream& err) {
  check_run_config(c);
  const CensoredDataset data = load_data(c);
  const std::string cfg = c.to_json();

  std::vector<double> rhos;
  std::vector<Matrix> thetas;
  std::vector<double> abic;
  std::vector<double> bic;
  std::vector<json> diagnostics;
  double rmax = 0.0;
  bool complete = true;
  std::string error;

  if (c.estimator == "glasso") {
    // Reference: graphical lasso on the covariance with censored cells at their limits.
    Matrix x = data.values();
    for (Index i = 0; i < data.n(); ++i)
      for (Index h = 0; h < data.p(); ++h)
        if (data.status(i, h) != Censor::Observed) x(i, h) = data.threshold(i, h);
    const Matrix S = empirical_covariance(x);
    rmax = max_offdiag_abs(S);
    rhos = rho_grid(rmax, c.rho_min, c.K, c.spacing);
    for (const auto& sol : glasso_path(S, rhos)) {
      const ModelParams mp = ModelParams::from_parts(column_means(x), sol.theta, sol.sigma);
      abic.push_back(bic_approx_value(mp, S, data.n()));
      thetas.push_back(sol.theta);
    }
    if (c.criterion == "bic") throw UsageError("--criterion bic is not available for --estimator glasso");
  } else {
    PathConfig pc;
    pc.K = c.K;
    pc.rho_min = c.rho_min;
    pc.spacing = c.spacing;
    pc.em = em_config(c);
    const PathResult path = fit_path(data, pc);
    rmax = path.rho_max;
    complete = path.complete;
    error = path.error;
    for (const auto& f : path.fits) {
      rhos.push_back(f.rho);
      thetas.push_back(f.params.theta());
      diagnostics.push_back(fit_diagnostics(f));
    }
    abic = bic_approx(path, data.n());
    if (c.exact_bic || c.criterion == "bic") {
      LogLikConfig lc;
      lc.draws = c.bic_draws;
      lc.seed = c.seed;
      lc.threads = c.threads;
      bic = bic_exact(path, data, lc);
    }
  }
  if (thetas.empty()) throw NumericalError("path: no fit succeeded: " + error);

  json j;
  j["version"] = kVersion;
  j["config"] = json::parse(cfg);
  j["estimator"] = c.estimator;
  j["names"] = data.names();
  j["p"] = data.p();
  j["n"] = data.n();
  j["rho_max"] = rmax;
  j["rhos"] = rhos;
  std::vector<Index> counts;
  json edges = json::array();
  for (const auto& t : thetas) {
    Index cnt = 0;
    for (Index h = 0; h < t.rows(); ++h)
      for (Index k = h + 1; k < t.cols(); ++k)
        if (t(h, k) != 0.0) ++cnt;
    counts.push_back(cnt);
    edges.push_back(edge_list(t));
  }
  j["edge_counts"] = counts;
  j["abic"] = abic;
  if (!bic.empty()) j["bic"] = bic;
  json sel;
  sel["abic"] = select_index(abic);
  if (!bic.empty()) sel["bic"] = select_index(bic);
  j["selected"] = sel;
  j["criterion"] = c.criterion;
  j["complete"] = complete;
  if (!complete) j["error"] = error;
  if (!diagnostics.empty()) j["diagnostics"] = diagnostics;
  j["edges"] = edges;
  write_file(fs::path(c.out) / "path.json", j.dump(2) + "\n");

  const std::string header = artifact_header(cfg);
  const std::size_t chosen = sel[c.criterion].get<std::size_t>();
  write_file(fs::path(c.out) / "edges.tsv", edges_tsv(thetas[chosen], data.names(), header));
  write_file(fs::path(c.out) / "edges_abic.tsv",
             edges_tsv(thetas[sel["abic"].get<std::size_t>()], data.names(), header));
  if (!bic.empty())
    write_file(fs::path(c.out) / "edges_bic.tsv",
               edges_tsv(thetas[sel["bic"].get<std::size_t>()], data.names(), header));

  out << "path: " << thetas.size() << " of " << c.K << " fits, rho_max = " << format_double(rmax)
      << ", selected index " << chosen + 1 << " by " << c.criterion << "\n";
  if (!complete) {
    err << "error: path stopped early: " << error << "\n";
    return kExitNumerical;
  }
  return kExitOk;
}

struct SimulateOptions {
  SimSpec spec;
  std::string background = "calibrated";
  std::string out = ".";
};

int cmd_simulate(const SimulateOptions& o, std::ostream& out) {
  SimSpec spec = o.spec;
  if (o.background == "calibrated") spec.background = Background::Calibrated;
  else if (o.background == "uniform") spec.background = Background::Uniform;
  else throw UsageError("--background must be calibrated or uniform");
  spec.validate();
  const SimSample s = simulate(spec);

  json cfg;
  cfg["p"] = spec.p;
  cfg["n"] = spec.n;
  cfg["edge_prob"] = spec.edge_prob;
  cfg["H"] = spec.H;
  cfg["u"] = format_double(spec.u);
  cfg["censor_prob"] = spec.censor_prob;
  cfg["background"] = o.background;
  cfg["background_prob"] = spec.background_prob;
  cfg["mu_lo"] = spec.mu_lo;
  cfg["mu_hi"] = spec.mu_hi;
  cfg["seed"] = spec.seed;
  const std::string cfg_text = cfg.dump();

  std::ostringstream csv;
  write_dataset_csv(csv, s.data, "cglasso " + std::string(kVersion) + " simulate " + cfg_text);
  write_file(fs::path(o.out) / "data.csv", csv.str());

  json t;
  t["version"] = kVersion;
  t["config"] = cfg;
  t["seed"] = spec.seed;
  t["names"] = s.data.names();
  t["mu"] = vector_json(s.truth.mu);
  t["theta"] = matrix_rows(s.truth.theta);
  json adj = json::array();
  for (Index h = 0; h < spec.p; ++h) {
    json r = json::array();
    for (Index k = 0; k < spec.p; ++k) r.push_back(static_cast<int>(s.truth.adjacency(h, k)));
    adj.push_back(r);
  }
  t["adjacency"] = adj;
  json d = json::array();
  for (Index h : s.truth.censored_set) d.push_back(h + 1);
  t["censored_set"] = d;
  write_file(fs::path(o.out) / "truth.json", t.dump(2) + "\n");
  out << "simulate: " << spec.n << " x " << spec.p << ", " << s.data.censored_count()
      << " censored cells\n";
  return kExitOk;
}

struct BenchmarkOptions {
  std::string study = "model1";
  std::string config;
  std::vector<std::string> set;
  std::optional<int> replicates;
  std::optional<std::uint64_t> seed;
  int threads = 1;
  std::string out = ".";
};

int cmd_benchmark(const BenchmarkOptions& o, std::ostream& out) {
  std::map<std::string, std::string> kv;
  if (!o.config.empty()) kv = read_config_file(o.config);
  for (const auto& s : o.set) {
    const auto more = parse_config_text(s);
    for (const auto& [k, v] : more) kv[k] = v;
  }
  std::string id = o.study;
  if (auto it = kv.find("study"); it != kv.end()) id = it->second;
  StudyConfig c = StudyConfig::defaults(id);
  c.apply(kv);
  if (o.replicates) c.replicates = *o.replicates;
  if (o.seed) c.seed = *o.seed;
  c.threads = o.threads;
  const StudyReport report = run_study(c);
  write_study_report(report, o.out);
  out << "benchmark: " << c.study << ", " << report.replicates.size() << " replicate runs written to "
      << o.out << "\n";
  return kExitOk;
}

struct RocOptions {
  std::string truth;
  std::string path;
  std::string out = ".";
};

int cmd_roc(const RocOptions& o, std::ostream& out) {
  if (o.truth.empty() || o.path.empty()) throw UsageError("roc requires --truth and --path");
  json t;
  json pj;
  try {
    t = json::parse(read_file(o.truth));
    pj = json::parse(read_file(o.path));
  } catch (const json::exception& e) {
    throw DataError(std::string("roc: malformed JSON: ") + e.what());
  }
  try {
    const Matrix theta_true = matrix_from_json(t.at("theta"));
    const Index p = theta_true.rows();
    Eigen::Matrix<std::int8_t, Eigen::Dynamic, Eigen::Dynamic> adj(p, p);
    const json& ja = t.at("adjacency");
    for (Index h = 0; h < p; ++h)
      for (Index k = 0; k < p; ++k)
        adj(h, k) = static_cast<std::int8_t>(ja[static_cast<std::size_t>(h)][static_cast<std::size_t>(k)].get<int>());
    if (pj.at("p").get<Index>() != p) throw DataError("roc: truth and path dimensions differ");

    const auto rhos = pj.at("rhos").get<std::vector<double>>();
    const json& edges = pj.at("edges");
    std::vector<double> tpr, fpr;
    std::ostringstream os;
    os << "# cglasso " << kVersion << "\n# config {\"truth\":" << json(o.truth).dump()
       << ",\"path\":" << json(o.path).dump() << "}\n";
    os << "rho,tpr,fpr\n";
    for (std::size_t k = 0; k < rhos.size(); ++k) {
      Matrix est = Matrix::Zero(p, p);
      for (const auto& e : edges.at(k)) {
        const Index h = e.at(0).get<Index>() - 1;
        const Index l = e.at(1).get<Index>() - 1;
        if (h < 0 || l < 0 || h >= p || l >= p) throw DataError("roc: edge index out of range");
        est(h, l) = est(l, h) = e.at(2).get<double>();
      }
      const auto [tp, fp] = edge_rates(est, adj);
      tpr.push_back(tp);
      fpr.push_back(fp);
      os << format_double(rhos[k]) << ',' << format_double(tp) << ',' << format_double(fp) << '\n';
    }
    write_file(fs::path(o.out) / "roc.csv", os.str());
    out << "roc: " << rhos.size() << " points, path AUC " << format_double(path_auc(fpr, tpr)) << "\n";
  } catch (const json::exception& e) {
    throw DataError(std::string("roc: unexpected JSON layout: ") + e.what());
  }
  return kExitOk;
}

std::string one_line(std::string s) {
  for (auto& ch : s)
    if (ch == '\n' || ch == '\r') ch = ' ';
  return s;
}

void add_run_options(CLI::App* sub, RunConfig& c, std::string& lower, std::string& upper,
                     std::string& na_side, std::string& mode, std::string& spacing) {
  sub->add_option("--input", c.input, "CSV data file")->required();
  sub->add_option("--lower", lower, "lower limits: one value or a comma-separated list");
  sub->add_option("--upper", upper, "upper limits: one value or a comma-separated list");
  sub->add_option("--na-side", na_side, "side of NA cells: left or right (one or per column)");
  sub->add_option("--mode", mode, "E-step: meanfield or exact")->capture_default_str();
  sub->add_option("--seed", c.seed, "master seed")->capture_default_str();
  sub->add_option("--out", c.out, "output directory")->capture_default_str();
  sub->add_option("--threads", c.threads, "worker threads (0 = auto)")->capture_default_str();
  sub->add_option("--gibbs-sweeps", c.gibbs_sweeps, "Gibbs sweeps per row (exact mode)")->capture_default_str();
  sub->add_option("--burn-in", c.burn_in, "Gibbs burn-in sweeps")->capture_default_str();
  sub->add_option("--em-tol", c.em_tol, "EM relative tolerance")->capture_default_str();
  sub->add_option("--em-max-iter", c.em_max_iter, "EM iteration cap")->capture_default_str();
  sub->add_option("--K", c.K, "number of rho values")->capture_default_str();
  sub->add_option("--rho-min", c.rho_min, "smallest rho")->capture_default_str();
  sub->add_option("--spacing", spacing, "linear or log")->capture_default_str();
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Censored graphical lasso"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  RunConfig fit_cfg;
  fit_cfg.command = "fit";
  RunConfig path_cfg;
  path_cfg.command = "path";
  std::string f_lower, f_upper, f_na, f_mode = "meanfield", f_spacing = "linear";
  std::string p_lower, p_upper, p_na, p_mode = "meanfield", p_spacing = "linear";

  auto* fit = app.add_subcommand("fit", "fit at a single rho");
  add_run_options(fit, fit_cfg, f_lower, f_upper, f_na, f_mode, f_spacing);
  double fit_rho = 0.0;
  fit->add_option("--rho", fit_rho, "penalty")->required();

  auto* path = app.add_subcommand("path", "fit a path of rho values and select one");
  add_run_options(path, path_cfg, p_lower, p_upper, p_na, p_mode, p_spacing);
  path->add_option("--criterion", path_cfg.criterion, "bic or abic")->capture_default_str();
  path->add_option("--estimator", path_cfg.estimator, "cglasso or glasso")->capture_default_str();
  path->add_flag("--exact-bic", path_cfg.exact_bic, "also compute the exact BIC");
  path->add_option("--bic-draws", path_cfg.bic_draws, "GHK draws for the exact BIC")->capture_default_str();

  SimulateOptions sim;
  auto* simc = app.add_subcommand("simulate", "draw a censored sample and its truth");
  simc->add_option("--p", sim.spec.p)->capture_default_str();
  simc->add_option("--n", sim.spec.n)->capture_default_str();
  simc->add_option("--edge-prob", sim.spec.edge_prob)->capture_default_str();
  simc->add_option("--H", sim.spec.H, "number of censored variables")->capture_default_str();
  simc->add_option("--u", sim.spec.u, "right-censoring threshold")->capture_default_str();
  simc->add_option("--censor-prob", sim.spec.censor_prob)->capture_default_str();
  simc->add_option("--background", sim.background, "calibrated or uniform")->capture_default_str();
  simc->add_option("--background-prob", sim.spec.background_prob)->capture_default_str();
  simc->add_option("--mu-lo", sim.spec.mu_lo)->capture_default_str();
  simc->add_option("--mu-hi", sim.spec.mu_hi)->capture_default_str();
  simc->add_option("--seed", sim.spec.seed)->capture_default_str();
  simc->add_option("--out", sim.out)->capture_default_str();

  BenchmarkOptions bench;
  auto* benchc = app.add_subcommand("benchmark", "run a simulation study");
  benchc->add_option("--study", bench.study, "study id")->capture_default_str();
  benchc->add_option("--config", bench.config, "key = value config file");
  benchc->add_option("--set", bench.set, "extra key=value overrides");
  benchc->add_option("--replicates", bench.replicates);
  benchc->add_option("--seed", bench.seed);
  benchc->add_option("--threads", bench.threads, "worker threads (0 = auto)")->capture_default_str();
  benchc->add_option("--out", bench.out)->capture_default_str();

  RocOptions roc;
  auto* rocc = app.add_subcommand("roc", "TPR/FPR along a path against a known truth");
  rocc->add_option("--truth", roc.truth)->required();
  rocc->add_option("--path", roc.path)->required();
  rocc->add_option("--out", roc.out)->capture_default_str();

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << "\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << one_line(e.what()) << "\n";
    return kExitUsage;
  }

  auto finish = [](RunConfig& c, const std::string& lower, const std::string& upper,
                   const std::string& na, const std::string& mode, const std::string& spacing) {
    try {
      if (!lower.empty()) c.lower = parse_double_list(lower);
      if (!upper.empty()) c.upper = parse_double_list(upper);
    } catch (const DataError& e) {
      throw UsageError(e.what());
    }
    c.na_side.clear();
    std::stringstream ss(na);
    std::string item;
    while (std::getline(ss, item, ','))
      if (!item.empty()) c.na_side.push_back(item);
    c.mode = parse_estep_mode(mode);
    c.spacing = parse_spacing(spacing);
  };

  try {
    if (fit->parsed()) {
      finish(fit_cfg, f_lower, f_upper, f_na, f_mode, f_spacing);
      fit_cfg.rho = fit_rho;
      return cmd_fit(fit_cfg, out, err);
    }
    if (path->parsed()) {
      finish(path_cfg, p_lower, p_upper, p_na, p_mode, p_spacing);
      return cmd_path(path_cfg, out, err);
    }
    if (simc->parsed()) return cmd_simulate(sim, out);
    if (benchc->parsed()) return cmd_benchmark(bench, out);
    if (rocc->parsed()) return cmd_roc(roc, out);
  } catch (const UsageError& e) {
    err << "error: " << one_line(e.what()) << "\n";
    return kExitUsage;
  } catch (const DataError& e) {
    err << "error: " << one_line(e.what()) << "\n";
    return kExitData;
  } catch (const NumericalError& e) {
    err << "error: " << one_line(e.what()) << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    err << "error: " << one_line(e.what()) << "\n";
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace cglasso
